# flake8: noqa
from hypothesis import given, strategies as st
import math
import numpy as np
import pytest
from toricond.logic import InputError
from toricond.logic.supports import Support
from toricond.logic.kahler import DiagonalCovariance
from toricond.logic.randsys import Ensemble, Region
from toricond.logic.volume import (
    expected_roots,
    kac_rice_constant,
    kac_rice_real_roots,
    mixed_density,
    mixed_volume_integral,
    momentum_pushforward_volume,
    real_roots_bound,
    volume_element,
    wedge_density,
)
from tests.strategies import st_seed


TOL = dict(rel_tol=1e-6)


@st.composite
def st_spd_stack(draw):
    n = draw(st.integers(min_value=1, max_value=3))
    rng = np.random.default_rng(draw(st_seed))
    g = rng.standard_normal((n, n, n))
    return np.einsum("kij,klj->kil", g, g) + 0.1 * np.eye(n)


def test_mixed_density_example():
    assert np.isclose(mixed_density([np.eye(2), np.eye(2)]), 0.5)
    assert np.isclose(wedge_density([np.eye(2), np.eye(2)]), 0.5)


@given(st_spd_stack())
def test_density_expansions_agree(hessians):
    n = hessians.shape[0]
    a = mixed_density(hessians)
    assert a > 0
    assert np.isclose(a, wedge_density(hessians))
    same = np.stack([hessians[0]] * n)
    assert np.isclose(
        mixed_density(same), math.factorial(n) * volume_element(hessians[0])
    )


def test_density_is_vectorized():
    h = np.stack([np.eye(2)[None].repeat(5, axis=0)] * 2)
    assert mixed_density(h).shape == (5,)
    with pytest.raises(InputError):
        mixed_density(np.eye(2))


@pytest.mark.parametrize(
    "ensemble, expected",
    [
        (Ensemble.unmixed(Support.simplex(2)), 1),
        (Ensemble.unmixed(Support.cube(2)), 2),
        (
            Ensemble(
                [
                    (Support.simplex(2), DiagonalCovariance([5.0, 0.3, 2.0])),
                    (Support.cube(2), DiagonalCovariance([1.0, 4.0, 0.5, 2.0])),
                ]
            ),
            2,
        ),
        (Ensemble.kostlan(1, 5), 5),
    ],
)
def test_total_expected_roots_is_mixed_volume(ensemble, expected):
    result = mixed_volume_integral(ensemble, **TOL)
    assert np.isclose(result.value, expected, rtol=1e-4)
    assert result.radius is not None


def test_kostlan_disk():
    ens = Ensemble.kostlan(1, 4)
    disk = Region.from_p_box([-np.inf], [0.0])
    assert np.isclose(expected_roots(ens, disk, **TOL).value, 2, rtol=1e-5)
    upper = Region(1, [([-np.inf], [np.inf], [0.0], [np.pi])])
    assert np.isclose(expected_roots(ens, upper, **TOL).value, 2, rtol=1e-5)
    annulus = Region.from_p_box([-0.5], [0.5])
    value = expected_roots(ens, annulus, **TOL).value
    assert 0 < value < 4
    assert expected_roots(ens, Region.empty(1)).value == 0


def test_expected_roots_errors():
    with pytest.raises(InputError):
        expected_roots(Ensemble.kostlan(1, 2, "real"), Region.full(1))
    with pytest.raises(InputError):
        expected_roots(Ensemble.kostlan(1, 2), Region.full(2))
    flat = Ensemble.unmixed(Support([[0, 0], [1, 1], [2, 2]]))
    with pytest.raises(InputError):
        expected_roots(flat, Region.full(2))


def test_kac_rice_constant():
    assert np.isclose(kac_rice_constant(1), np.sqrt(2 / np.pi))
    assert np.isclose(kac_rice_constant(2), 1.0)


@pytest.mark.parametrize("degree", [1, 2, 4, 9])
def test_kostlan_real_roots(degree):
    """Test that real Kostlan polynomials have √d real roots on average."""
    ens = Ensemble.kostlan(1, degree, "real")
    everywhere = Region.full(1)
    total = kac_rice_real_roots(ens, everywhere, "all", **TOL).value
    positive = kac_rice_real_roots(ens, everywhere, **TOL).value
    assert np.isclose(total, np.sqrt(degree), rtol=1e-5)
    assert np.isclose(positive, total / 2)


def test_real_roots_bound():
    ens = Ensemble.unmixed(Support([0, 1, 2]), field="real")
    region = Region.from_p_box([-2.0], [2.0])
    bound = real_roots_bound(ens, region)
    kac_rice = kac_rice_real_roots(ens, region).value
    assert 0 < kac_rice <= bound
    assert real_roots_bound(ens, Region.from_p_box([1.0], [1.0])) == 0
    with pytest.raises(InputError):
        real_roots_bound(ens, Region.full(1))
    with pytest.raises(InputError):
        real_roots_bound(ens.with_field("complex"), region)
    with pytest.raises(InputError):
        kac_rice_real_roots(ens, region, orthant="negative")


def test_pushforward_segment():
    support = Support.segment(1)
    covariance = DiagonalCovariance([1, 1])
    value = momentum_pushforward_volume(support, covariance, [([0.25], [0.75])])
    assert np.isclose(value, np.pi / 2, rtol=1e-6)
    whole = momentum_pushforward_volume(support, covariance, [([0.0], [1.0])])
    assert np.isclose(whole, np.pi, rtol=1e-6)
    skewed = DiagonalCovariance([0.2, 7.0])
    value = momentum_pushforward_volume(Support([0, 3]), skewed, [([0.5], [2.0])])
    assert np.isclose(value, np.pi * 1.5, rtol=1e-6)


def test_pushforward_square():
    support = Support.cube(2)
    covariance = DiagonalCovariance([1.0, 2.0, 0.5, 1.5])
    boxes = [([0.25, 0.25], [0.75, 0.75]), ([0.1, 0.8], [0.3, 0.9])]
    value = momentum_pushforward_volume(support, covariance, boxes)
    expected = np.pi**2 * (0.25 + 0.02)
    assert np.isclose(value, expected, rtol=1e-3)


@pytest.mark.parametrize(
    "support, covariance, area",
    [
        (Support.cube(2), DiagonalCovariance.identity(4), 1.0),
        (Support.cube(2), DiagonalCovariance([1.0, 2.0, 0.5, 1.5]), 1.0),
        (
            Support([[0, 0], [2, 0], [0, 1], [2, 1]]),
            DiagonalCovariance.identity(4),
            2.0,
        ),
    ],
)
def test_pushforward_whole_hull(support, covariance, area):
    """Test that the preimage of the closed hull has volume π² times its area."""
    hull = support.hull()
    vertices = hull.vertex_array()
    box = (vertices.min(axis=0), vertices.max(axis=0))
    value = momentum_pushforward_volume(support, covariance, [box])
    assert np.isclose(value, np.pi**2 * area, rtol=1e-3)


def test_pushforward_simplex_corner():
    support = Support.simplex(2)
    covariance = DiagonalCovariance.identity(3)
    corner = [([0.0, 0.0], [0.25, 0.25])]
    value = momentum_pushforward_volume(support, covariance, corner)
    assert np.isclose(value, np.pi**2 / 16, rtol=1e-3)
    # Touching the hull along one face only
    edge = [([0.0, 0.25], [0.4, 0.5])]
    value = momentum_pushforward_volume(support, covariance, edge)
    assert np.isclose(value, np.pi**2 * 0.1, rtol=1e-3)


def test_pushforward_outside_hull():
    support = Support.cube(2)
    covariance = DiagonalCovariance.identity(4)
    with pytest.raises(InputError):
        momentum_pushforward_volume(support, covariance, [([0.5, 0.5], [1.2, 0.9])])
    with pytest.raises(InputError):
        momentum_pushforward_volume(
            Support.segment(1), DiagonalCovariance([1, 1]), [([0.5], [0.5])]
        )
