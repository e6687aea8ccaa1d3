# flake8: noqa
from hypothesis import given, strategies as st
import numpy as np
import pytest
from toricond.logic import InputError
from toricond.logic.supports import Support, mixed_volume_oracle
from toricond.logic.kahler import DiagonalCovariance
from toricond.logic.randsys import (
    Ensemble,
    Region,
    SparseSystem,
    relative_residual,
    sample,
)
from toricond.logic.rootfind import (
    RESIDUAL_TOL,
    RootList,
    all_roots,
    count_roots_in_region,
    real_roots,
    univariate_roots,
)
from tests.strategies import st_seed


IDENTITY3 = DiagonalCovariance.identity(3)
BIVARIATE = [
    Ensemble.linear(2),
    Ensemble.unmixed(Support.cube(2)),
    Ensemble.kostlan(2, 2),
    Ensemble.unmixed(Support.simplex(2, scale=2)),
    Ensemble(
        [
            (Support.simplex(2), DiagonalCovariance([1.0, 3.0, 0.5])),
            (Support.cube(2), DiagonalCovariance([2.0, 1.0, 1.0, 4.0])),
        ]
    ),
]


def _check_roots(f, ens, roots):
    assert not roots.degenerate
    assert len(roots) + roots.escapes == roots.expected
    for root, residual in zip(roots, roots.residuals):
        assert residual <= RESIDUAL_TOL
        assert np.isclose(relative_residual(f, ens, root), residual)


def test_x_minus_one():
    roots = univariate_roots([-1.0, 1.0], Support([0, 1]), DiagonalCovariance([1, 1]))
    assert len(roots) == 1
    assert np.allclose(roots[0].zeta, 1)
    assert not roots.degenerate


def test_x_squared_minus_one():
    roots = univariate_roots([-1.0, 0.0, 1.0], Support([0, 1, 2]), IDENTITY3)
    p, q = roots.points()
    assert np.allclose(p[:, 0], 0)
    assert np.allclose(np.sort(np.cos(q[:, 0])), [-1, 1])
    assert np.allclose(np.sin(q[:, 0]), 0)
    assert roots.expected == 2


def test_shifted_univariate_support():
    # x² (x - 2)(x + 3) with support {2, 3, 4}
    support = Support([2, 3, 4])
    roots = univariate_roots([-6.0, 1.0, 1.0], support, IDENTITY3)
    assert roots.expected == 2
    assert np.allclose(sorted(r.zeta[0].real for r in roots), [-3, 2])


def test_lost_roots_are_degenerate():
    roots = univariate_roots([-1.0, 1.0, 0.0], Support([0, 1, 2]), IDENTITY3)
    assert len(roots) == 1
    assert roots.degenerate


def test_escapes():
    roots = univariate_roots([-1e13, 1.0], Support([0, 1]), DiagonalCovariance([1, 1]))
    assert len(roots) == 0
    assert roots.escapes == 1
    assert not roots.degenerate


def test_univariate_errors():
    with pytest.raises(InputError):
        univariate_roots([0.0, 0.0], Support([0, 1]), DiagonalCovariance([1, 1]))
    with pytest.raises(InputError):
        univariate_roots([1.0, 1.0, 1.0], Support.simplex(2), IDENTITY3)
    ens = Ensemble.linear(3)
    with pytest.raises(InputError):
        all_roots(sample(ens, 1), ens)


@given(st.integers(min_value=1, max_value=8), st_seed)
def test_univariate_counts(degree, seed):
    ens = Ensemble.kostlan(1, degree)
    f = sample(ens, seed)
    roots = all_roots(f, ens)
    _check_roots(f, ens, roots)
    assert len(roots) == degree


@given(st.sampled_from(BIVARIATE), st_seed)
def test_bivariate_counts(ens, seed):
    f = sample(ens, seed)
    roots = all_roots(f, ens)
    assert roots.expected == mixed_volume_oracle(*ens.supports)
    _check_roots(f, ens, roots)


def test_bivariate_example_counts():
    assert len(all_roots(sample(BIVARIATE[0], 7), BIVARIATE[0])) == 1
    assert len(all_roots(sample(BIVARIATE[1], 7), BIVARIATE[1])) == 2
    assert len(all_roots(sample(BIVARIATE[2], 7), BIVARIATE[2])) == 4


def test_linear_root_matches_solve():
    ens = Ensemble.linear(2)
    f = sample(ens, 11)
    raw = np.array(f.raw(ens))
    zeta = np.linalg.solve(raw[:, 1:], -raw[:, 0])
    roots = all_roots(f, ens)
    assert np.allclose(roots[0].zeta, zeta)


def test_real_roots_of_a_real_line_pair():
    # x + y - 5 = 0 and x - y + 1 = 0 meet at (2, 3)
    ens = Ensemble.linear(2, field="real")
    f = SparseSystem([[-5.0, 1.0, 1.0], [1.0, 1.0, -1.0]])
    positive = real_roots(f, ens)
    assert len(positive) == 1
    assert np.allclose(positive[0].p, np.log([2, 3]))
    assert np.allclose(positive[0].q, 0)


def test_real_roots_orthants():
    ens = Ensemble.unmixed(Support([0, 1, 2]), field="real")
    x2_minus_1 = SparseSystem([[-1.0, 0.0, 1.0]])
    assert len(real_roots(x2_minus_1, ens)) == 1
    assert len(real_roots(x2_minus_1, ens, orthant="all")) == 2
    x2_plus_1 = SparseSystem([[1.0, 0.0, 1.0]])
    assert len(real_roots(x2_plus_1, ens, orthant="all")) == 0
    assert len(all_roots(x2_plus_1, ens)) == 2
    with pytest.raises(InputError):
        real_roots(SparseSystem([[1j, 0.0, 1.0]]), ens)
    with pytest.raises(InputError):
        real_roots(x2_minus_1, ens, orthant="negative")


@given(st_seed)
def test_real_roots_are_complex_roots(seed):
    ens = Ensemble.kostlan(2, 2, "real")
    f = sample(ens, seed)
    roots = all_roots(f, ens)
    every = real_roots(f, ens, "all", roots=roots)
    positive = real_roots(f, ens, roots=roots)
    assert len(positive) <= len(every) <= len(roots)
    for root in positive:
        assert np.allclose(root.q, 0)


def test_count_roots_in_region():
    ens = Ensemble.unmixed(Support([0, 1, 2]))
    # (x - 1/2)(x - 3)
    f = SparseSystem([[1.5, -3.5, 1.0]])
    roots = all_roots(f, ens)
    assert count_roots_in_region(roots, Region.from_p_box([-np.inf], [0.0])) == 1
    assert count_roots_in_region(roots, Region.full(1)) == 2
    assert count_roots_in_region(roots, Region.empty(1)) == 0


def test_root_list():
    roots = RootList([], [], escapes=2, expected=2)
    assert roots.count == 0
    assert roots.points()[0].size == 0
    exported = roots.export()
    assert exported["escapes"] == 2 and exported["roots"] == []
    assert "2 escapes" in repr(roots)
