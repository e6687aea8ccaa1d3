# flake8: noqa
from hypothesis import given, strategies as st
import numpy as np
import pytest
from scipy.optimize import minimize
from toricond.logic import Field, InputError
from toricond.logic.supports import Support
from toricond.logic.kahler import (
    DiagonalCovariance,
    KahlerFrame,
    TorusPoint,
    veronese_hat,
)
from toricond.logic.randsys import (
    Ensemble,
    Region,
    SparseSystem,
    evaluate,
    fiber_projection,
    sample,
)
from toricond.logic.conditioning import (
    ConditionMatrix,
    condition_bounds,
    condition_matrix,
    condition_sweep,
    distance_to_sigma,
    fiber_distance,
    kappa_over_region,
    mixed_dilation,
    restricted_condition,
    unmixed_condition,
)
from tests.strategies import st_seed


MIXED = Ensemble(
    [
        (Support([[0, 0], [1, 0], [0, 1], [2, 1]]), DiagonalCovariance([1, 2, 1, 3])),
        (Support.cube(2), DiagonalCovariance([2, 1, 1, 1])),
    ]
)
UNMIXED = Ensemble.unmixed(Support.dense_simplex(2, 2))
UNIVARIATE = Ensemble.kostlan(1, 3)
st_point = st.builds(
    lambda p, q: (p, q),
    st.floats(min_value=-1.5, max_value=1.5),
    st.floats(min_value=0, max_value=6.28),
)


def _root_system(ens, seed, p, q):
    """A random system of the fiber over (p, q), so (p, q) is a root."""
    point = TorusPoint(np.full(ens.n, p), np.full(ens.n, q))
    return fiber_projection(sample(ens, seed), ens, point), point


def test_example_values():
    ens = Ensemble.unmixed(Support.segment(1))
    f = SparseSystem([np.array([-1, 1]) / np.sqrt(2)])
    root = TorusPoint([0.0], [0.0])
    assert np.allclose(condition_matrix(f, ens, root).rows, [[0.5]])
    assert np.isclose(distance_to_sigma(f, ens, root), 1.0)
    bounds = condition_bounds(f, ens, root)
    assert np.isclose(bounds.lower, 1.0) and np.isclose(bounds.upper, 1.0)
    assert np.isclose(unmixed_condition(f, ens, root), 1.0)


def test_requires_root():
    f = SparseSystem([[1.0, 1.0]])
    ens = Ensemble.unmixed(Support.segment(1))
    with pytest.raises(InputError):
        condition_matrix(f, ens, TorusPoint([0.0]))
    with pytest.raises(InputError):
        distance_to_sigma(f, ens, TorusPoint([0.0]))


@given(st_seed, st_point)
def test_univariate_distance_formula(seed, point):
    """Test that d equals the component of f/‖f‖ along Dv at a root."""
    f, root = _root_system(UNIVARIATE, seed, *point)
    frame = KahlerFrame(*UNIVARIATE.items[0], root)
    dv = frame.dv[:, 0]
    expected = abs(f[0] @ dv) / (np.linalg.norm(f[0]) * np.linalg.norm(dv))
    assert np.isclose(distance_to_sigma(f, UNIVARIATE, root), expected)

def _least_relative_perturbation(f, ens, point, angles=720):
    """min over real g with a degenerate root at *point* of Σᵢ ‖fⁱ − gⁱ‖² / ‖fⁱ‖².

    For a direction u of the tangent space the systems with g(ζ) = 0 and
    Dg(ζ)u = 0 form a linear space. Projections onto these spaces over a grid
    of directions start an SLSQP search over all coefficients.
    """
    rows = [np.asarray(c, dtype=np.float64) for c in f]
    vecs = [veronese_hat(s, c, point).real for s, c in ens.items]
    jacs = [v[:, None] * s.exponents for v, (s, c) in zip(vecs, ens.items)]
    bounds = np.cumsum([0] + [r.size for r in rows])

    def split(x):
        return [x[a:b] for a, b in zip(bounds[:-1], bounds[1:])]

    def cost(x):
        return sum(np.sum((g - r) ** 2) / (r @ r) for g, r in zip(split(x), rows))

    def on_root(x):
        return np.array([g @ v for g, v in zip(split(x), vecs)])

    def singular(x):
        return np.linalg.det(np.array([g @ j for g, j in zip(split(x), jacs)]))

    n = ens.n
    turns = np.linspace(0, np.pi, angles if n > 1 else 1, endpoint=False)
    starts = []
    for t in turns:
        u = np.array([np.cos(t), np.sin(t)])[:n]
        g = []
        for r, v, j in zip(rows, vecs, jacs):
            basis, _ = np.linalg.qr(np.stack([v, j @ u], axis=1))
            g.append(r - basis @ (basis.T @ r))
        starts.append(np.concatenate(g))
    best = min(starts, key=cost)
    result = minimize(
        cost,
        best,
        method="SLSQP",
        constraints=[
            {"type": "eq", "fun": on_root},
            {"type": "eq", "fun": singular},
        ],
        options={"ftol": 1e-15, "maxiter": 500},
    )
    feasible = (
        np.max(np.abs(on_root(result.x))) < 1e-10
        and abs(singular(result.x)) < 1e-10
    )
    if feasible and cost(result.x) < cost(best):
        best = result.x
    return float(np.sqrt(cost(best)))


@pytest.mark.parametrize("seed", [3, 8, 21])
@pytest.mark.parametrize(
    "ens",
    [
        Ensemble.unmixed(Support([0, 1, 3]), DiagonalCovariance([1, 2, 0.5]), "real"),
        MIXED.with_field(Field.REAL),
    ],
)
def test_distance_is_least_relative_perturbation(ens, seed):
    point = TorusPoint(np.linspace(-0.3, 0.4, ens.n))
    f = fiber_projection(sample(ens, seed), ens, point)
    assert f.is_real
    expected = _least_relative_perturbation(f, ens, point)
    d = distance_to_sigma(f, ens, point)
    assert d <= expected * (1 + 1e-6)
    assert d == pytest.approx(expected, rel=1e-4)



@given(st_seed, st_point)
def test_unmixed_bounds_coincide(seed, point):
    f, root = _root_system(UNMIXED, seed, *point)
    d = distance_to_sigma(f, UNMIXED, root)
    lower, upper = condition_bounds(f, UNMIXED, root)
    assert 0 < d <= np.sqrt(2)
    assert np.isclose(lower, upper)
    assert np.isclose(1 / d, upper)


@given(st_seed, st_point)
def test_mixed_bounds_sandwich(seed, point):
    f, root = _root_system(MIXED, seed, *point)
    d = distance_to_sigma(f, MIXED, root)
    lower, upper = condition_bounds(f, MIXED, root)
    assert 0 < d <= np.sqrt(2) + 1e-12
    assert lower <= 1 / d * (1 + 1e-6)
    assert 1 / d <= upper * (1 + 1e-6)


@given(st_seed, st_point)
def test_distance_scale_invariance(seed, point):
    f, root = _root_system(MIXED, seed, *point)
    scaled = f.scale([3.0, 0.25j])
    assert np.isclose(
        distance_to_sigma(scaled, MIXED, root),
        distance_to_sigma(f, MIXED, root),
        rtol=1e-4,
    )


@given(st_seed, st_point)
def test_fiber_distance_off_roots(seed, point):
    f = sample(MIXED, seed)
    x = TorusPoint(np.full(2, point[0]), np.full(2, point[1]))
    values = evaluate(f, MIXED, x, normalized=True) / f.norms()
    d = fiber_distance(f, MIXED, x)
    assert np.sqrt(np.sum(np.abs(values) ** 2)) <= d + 1e-12
    assert d <= np.sqrt(2) + 1e-12


def test_double_root_is_degenerate():
    ens = Ensemble.unmixed(Support.segment(2))
    f = SparseSystem([[1.0, -2.0, 1.0]])
    root = TorusPoint([0.0])
    assert distance_to_sigma(f, ens, root) == 0
    assert condition_bounds(f, ens, root) == (np.inf, np.inf)
    assert unmixed_condition(f, ens, root) == np.inf
    assert condition_matrix(f, ens, root).is_singular


@given(st_seed, st_point)
def test_implicit_map_volume(seed, point):
    f, root = _root_system(UNMIXED, seed, *point)
    f = f.normalized()
    matrix = condition_matrix(f, UNMIXED, root)
    assert np.isclose(matrix.det_dg_gram_inverse(), abs(matrix.det()) ** 2)


def test_unmixed_condition_needs_unmixed():
    f, root = _root_system(MIXED, 1, 0.2, 0.3)
    with pytest.raises(InputError):
        unmixed_condition(f, MIXED, root)


@given(st_seed, st_point)
def test_restricted_condition_at_a_point(seed, point):
    f, root = _root_system(MIXED, seed, *point)
    value = restricted_condition(f, MIXED, Region.point(root))
    assert np.isclose(value, 1 / distance_to_sigma(f, MIXED, root), rtol=1e-6)


def test_condition_sweep():
    f = sample(UNIVARIATE, 5)
    region = Region.from_p_box([-1.0], [1.0])
    report = condition_sweep(f, UNIVARIATE, region, grid_points=4, refine_levels=1)
    assert report.evaluations == 4 * 4 * 2
    assert report.location.shape == (2,)
    assert -1 <= report.location[0] <= 1
    assert report.value >= 1
    with pytest.raises(InputError):
        condition_sweep(f, UNIVARIATE, Region.empty(1))


def test_mixed_dilation():
    identical = mixed_dilation([np.diag([1.0, 4.0])] * 2)
    assert np.isclose(identical.kappa_upper, 1.0)
    # Balancing diag(a, 1/a) gives max(a⁴, 4 / a⁴), least at a⁴ = 2
    pinned = mixed_dilation([np.eye(2), np.diag([1.0, 4.0])])
    assert np.isclose(pinned.kappa_upper, 2.0, rtol=1e-4)
    report = mixed_dilation([np.diag([1.0, 4.0]), np.diag([4.0, 1.0])])
    assert 1 <= report.kappa_upper <= 4 + 1e-9
    assert np.isclose(report.kappa_upper, np.max(report.per_support_ratios))
    assert np.isclose(np.linalg.det(report.minimizer), 1.0)
    scaled = mixed_dilation([np.diag([3.0, 12.0]), np.diag([0.4, 0.1])])
    assert np.isclose(scaled.kappa_upper, report.kappa_upper, rtol=1e-4)
    assert mixed_dilation([[[2.0]]]).kappa_upper == 1


def test_mixed_dilation_invalid():
    nearly_symmetric = [[2.0, 0.5 + 1e-13], [0.5, 2.0]]
    assert mixed_dilation([nearly_symmetric]).kappa_upper >= 1
    with pytest.raises(InputError):
        mixed_dilation([[[2.0, 0.5 + 1e-6], [0.5, 2.0]]])
    with pytest.raises(InputError):
        mixed_dilation([[[1.0, 2.0], [0.0, 1.0]]])
    with pytest.raises(InputError):
        mixed_dilation([[[1.0, 0.0], [0.0, -1.0]]])
    with pytest.raises(InputError):
        mixed_dilation([1.0, 2.0])


def test_kappa_over_region():
    region = Region.from_p_box([-1.0, -1.0], [1.0, 1.0])
    assert kappa_over_region(UNMIXED, region) == 1
    kappa = kappa_over_region(MIXED, region, grid_points=2)
    assert kappa >= 1
