# flake8: noqa
from hypothesis import given, strategies as st
import numpy as np
import pytest
from toricond.logic import ConvergenceError, InputError
from toricond.logic.quadrature import (
    aitken,
    integrate,
    integrate_box,
    tensor_rule,
    truncate_box,
)


@given(st.integers(min_value=1, max_value=3), st.integers(min_value=1, max_value=8))
def test_tensor_rule_exactness(n, order):
    nodes, weights = tensor_rule(n, order)
    assert nodes.shape == (order**n, n)
    assert np.isclose(weights.sum(), 1.0)
    # Exact for degree 2 * order - 1 in each coordinate
    degree = 2 * order - 1
    values = np.prod(nodes**degree, axis=1)
    assert np.isclose(values @ weights, (1 / (degree + 1)) ** n)


def test_integrate_box():
    result = integrate_box(lambda x: x[:, 0] ** 2 * x[:, 1], [0, 0], [1, 2])
    assert np.isclose(result.value, 2 / 3)
    assert result.error <= 1e-9
    kink = integrate_box(
        lambda x: np.abs(x[:, 0] - 0.3), [0], [1], abs_tol=1e-10, rel_tol=1e-12
    )
    assert np.isclose(kink.value, (0.3**2 + 0.7**2) / 2, atol=1e-8)
    assert kink.panels > 1


def test_degenerate_and_invalid_boxes():
    assert integrate_box(lambda x: x[:, 0], [0, 1], [1, 1]).value == 0
    with pytest.raises(InputError):
        integrate_box(lambda x: x[:, 0], [1], [0])
    with pytest.raises(InputError):
        integrate_box(lambda x: x[:, 0], [0], [np.inf])
    with pytest.raises(InputError):
        integrate(lambda x: x[:, 0], [np.nan], [1])


def test_panel_budget():
    with pytest.raises(ConvergenceError):
        integrate_box(lambda x: np.abs(x[:, 0] - 0.3), [0], [1], max_panels=1)


def test_truncate_box():
    lo, hi = truncate_box([-np.inf, 2.0], [np.inf, np.inf], 4.0)
    assert np.allclose(lo, [-4, 2])
    assert np.allclose(hi, [4, 6])
    lo, hi = truncate_box([-np.inf], [-10.0], 4.0)
    assert np.allclose(lo, [-14])


def test_aitken():
    assert np.isclose(aitken((1.0, 1.5, 1.75)), 2.0)
    # Steps that do not shrink are returned as they are
    assert aitken((1.0, 2.0, 3.0)) == 3.0
    assert aitken((1.0, 2.0, 1.5)) == 1.5


def test_gaussian_over_plane():
    result = integrate(
        lambda x: np.exp(-np.sum(x**2, axis=-1)), [-np.inf] * 2, [np.inf] * 2
    )
    assert np.isclose(result.value, np.pi, rtol=1e-6)
    assert result.radius is not None


def test_tail_check_and_extrapolation():
    result = integrate(
        lambda x: np.exp(-x[:, 0]),
        [0.0],
        [np.inf],
        tail_check=lambda lo, hi: hi[0] >= 10,
    )
    assert result.radius == 10
    assert np.isclose(result.value, 1.0, atol=1e-7)


def test_truncation_limit():
    with pytest.raises(ConvergenceError):
        integrate(
            lambda x: np.exp(-x[:, 0]),
            [0.0],
            [np.inf],
            tail_check=lambda lo, hi: False,
        )
