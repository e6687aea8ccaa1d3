"""Mixed densities, expected root counts and the pushforward of the toric volume.

The expected number of roots in exp(U) of a complex system is the integral of
the wedge of the Kähler forms of its supports. The forms do not depend on the
angles, so for a box U = U_p × U_q

    E #roots = π⁻ⁿ λ(U_q) ∫_{U_p} D(p) dp

where `D = n! MixedDet(½H₁, …, ½Hₙ)` is the positive density computed by
`mixed_density`. Over the whole torus this is the mixed volume of the Newton
polytopes, whatever the covariances.

<u>__Example usage:__</u>
```python
mixed_density([np.eye(2), np.eye(2)])                  # 0.5
ens = Ensemble.unmixed(Support.simplex(2))
expected_roots(ens, Region.full(2)).value              # 1.0
momentum_pushforward_volume(
    Support.segment(1), DiagonalCovariance([1, 1]), [([0.25], [0.75])]
)                                                      # π / 2
```
"""
from typing import Optional, Sequence
from itertools import combinations, permutations, product
import math
import numpy as np
from scipy.optimize import brentq
from scipy.special import gammaln
from toricond.util import settings
from toricond.api.logging import Logger
from toricond.logic import Field, InputError, ConvergenceError
from toricond.logic.supports import Support, MAX_EXACT_DIM
from toricond.logic.kahler import (
    DiagonalCovariance,
    hessian,
    momentum,
    invert_momentum,
    invert_partial_momentum,
)
from toricond.logic.randsys import Ensemble, Region
from toricond.logic.quadrature import (
    QuadratureResult,
    integrate,
    integrate_box,
    ABS_TOL,
    REL_TOL,
)


BOUNDARY_DELTA = settings.get("quadrature.boundary_delta")
EDGE_TOL = settings.get("quadrature.edge_tol")
# Truncated faces are tested at this many points per coordinate
TEST_LATTICE = 5
# The outer integrand of a pushforward carries the inner quadrature error
OUTER_TOL_FACTOR = 100
BRACKET_DOUBLINGS = 12

log_numerics = Logger.channel("numerics")


def volume_element(h) -> np.ndarray:
    """det(½H), the toric volume element of a support with Hessian H."""
    return np.linalg.det(0.5 * np.asarray(h, dtype=np.float64))


def _stack(hessians) -> np.ndarray:
    h = np.asarray(hessians, dtype=np.float64)
    n = h.shape[0] if h.ndim >= 3 else 0
    if n < 1 or h.shape[-2:] != (n, n):
        raise InputError(f"Expected n Hessians of shape (n, n), got {h.shape}")
    return h


def mixed_density(hessians) -> np.ndarray:
    """The density of the wedge of the Kähler forms, n! MixedDet(½H₁, …, ½Hₙ).

    The mixed determinant is expanded by polarization,
    `Σ over nonempty S of (−1)^{n−|S|} det(Σ_{i∈S} ½Hᵢ)`.

    Args:
        hessians: Array of shape (n, ..., n, n), or a sequence of n matrices.

    Returns:
        Density of shape (...).
    """
    m = 0.5 * _stack(hessians)
    n = m.shape[0]
    total = 0.0
    for size in range(1, n + 1):
        sign = -1.0 if (n - size) % 2 else 1.0
        for subset in combinations(range(n), size):
            total = total + sign * np.linalg.det(m[list(subset)].sum(axis=0))
    return total


def _permutation_sign(perm: Sequence[int]) -> int:
    inversions = sum(
        1 for i, j in combinations(range(len(perm)), 2) if perm[i] > perm[j]
    )
    return -1 if inversions % 2 else 1


def wedge_density(hessians) -> np.ndarray:
    """The same density as `mixed_density`, by expanding the exterior product.

    The wedge of the forms `Σ_{jk} (½Hᵢ)_{jk} dp_j ∧ dq_k` has, against
    dp₁…dpₙ dq₁…dqₙ and after the sign (−1)^{n(n−1)/2}, the coefficient
    `Σ_{σ,τ} sgn σ sgn τ Πᵢ (½Hᵢ)_{σ(i) τ(i)}`.
    """
    m = 0.5 * _stack(hessians)
    n = m.shape[0]
    perms = [(p, _permutation_sign(p)) for p in permutations(range(n))]
    total = 0.0
    for sigma, sign_sigma in perms:
        for tau, sign_tau in perms:
            term = float(sign_sigma * sign_tau)
            for i in range(n):
                term = term * m[i, ..., sigma[i], tau[i]]
            total = total + term
    return total


class MixedDensityEvaluator:
    """The density of an ensemble as a function of p.

    Single points keep their Hessians in a bounded cache.
    """

    CACHE_SIZE = 4096

    def __init__(self, ensemble: Ensemble):
        """Initialize the class.

        Raises:
            InputError: If some support is not full dimensional.
        """
        ensemble.require_full_dim()
        self.__ensemble = ensemble
        self.__cache: dict[tuple[float, ...], np.ndarray] = {}

    @property
    def ensemble(self) -> Ensemble:
        """The ensemble."""
        return self.__ensemble

    def hessians(self, p) -> np.ndarray:
        """The n Hessians at the single point *p*, shape (n, n, n)."""
        key = tuple(float(x) for x in np.ravel(p))
        if key not in self.__cache:
            if len(self.__cache) >= self.CACHE_SIZE:
                self.__cache.clear()
            self.__cache[key] = self.__ensemble.hessians(np.array(key))
        return self.__cache[key]

    def __call__(self, p) -> np.ndarray:
        """The density at points *p* of shape (..., n)."""
        h = self.__ensemble.hessians(p)
        if self.__ensemble.is_unmixed:
            return math.factorial(self.__ensemble.n) * volume_element(h[0])
        return mixed_density(h)


def _face_points(lo: np.ndarray, hi: np.ndarray, k: int, value: float, count: int):
    axes = [np.linspace(a, b, count) for a, b in zip(lo, hi)]
    axes[k] = np.array([value])
    return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, lo.size)


def _tail_check(ensemble: Ensemble, lo: np.ndarray, hi: np.ndarray, delta: float):
    """A test that the momentum of every truncated face is near the hull boundary.

    Returns None when exact hulls are unavailable (n > 3).
    """
    if ensemble.n > MAX_EXACT_DIM:
        return None
    hulls = [s.hull() for s in ensemble.supports]

    def check(t_lo: np.ndarray, t_hi: np.ndarray) -> bool:
        faces = []
        for k in range(lo.size):
            if not np.isfinite(lo[k]):
                faces.append(_face_points(t_lo, t_hi, k, t_lo[k], TEST_LATTICE))
            if not np.isfinite(hi[k]):
                faces.append(_face_points(t_lo, t_hi, k, t_hi[k], TEST_LATTICE))
        points = np.concatenate(faces)
        for (support, covariance), hull in zip(ensemble.items, hulls):
            y = momentum(support, covariance, points)
            if np.any(hull.interior_distance(y) > delta):
                return False
        return True

    return check


def _p_integral(
    density,
    ensemble: Ensemble,
    lo,
    hi,
    abs_tol: Optional[float],
    rel_tol: Optional[float],
) -> QuadratureResult:
    lo = np.asarray(lo, dtype=np.float64)
    hi = np.asarray(hi, dtype=np.float64)
    if np.any(lo == hi):
        return QuadratureResult(0.0, 0.0, 0)
    tail = None
    if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
        tail = _tail_check(ensemble, lo, hi, BOUNDARY_DELTA)
    return integrate(density, lo, hi, tail, abs_tol=abs_tol, rel_tol=rel_tol)


def _check_region(ensemble: Ensemble, region: Region):
    if region.n != ensemble.n:
        raise InputError(f"Region has {region.n} coordinates, ensemble {ensemble.n}")


def expected_roots(
    ensemble: Ensemble,
    region: Region,
    abs_tol: Optional[float] = None,
    rel_tol: Optional[float] = None,
) -> QuadratureResult:
    """Expected number of roots in exp(U) of a complex ensemble.

    The angular factor is exact; p-integrals are cached per distinct p-box.

    Raises:
        InputError: For real ensembles or supports that are not full dimensional.
        ConvergenceError: If a quadrature does not converge.
    """
    if ensemble.field is not Field.COMPLEX:
        raise InputError("Expected complex root counts need a complex ensemble")
    _check_region(ensemble, region)
    density = MixedDensityEvaluator(ensemble)
    integrals: dict[tuple, QuadratureResult] = {}
    values = []
    error = 0.0
    panels = 0
    radius = None
    for box in region.boxes:
        q_volume = box.q_volume()
        if q_volume == 0 or box.p_volume() == 0:
            continue
        key = (box.p_lo, box.p_hi)
        if key not in integrals:
            integrals[key] = _p_integral(
                density, ensemble, box.p_lo, box.p_hi, abs_tol, rel_tol
            )
            panels += integrals[key].panels
        result = integrals[key]
        values.append(result.value * q_volume)
        error += result.error * q_volume
        if result.radius is not None:
            radius = max(radius or 0.0, result.radius)
    scale = np.pi ** -ensemble.n
    return QuadratureResult(math.fsum(values) * scale, error * scale, panels, radius)


def mixed_volume_integral(
    ensemble: Ensemble,
    abs_tol: Optional[float] = None,
    rel_tol: Optional[float] = None,
) -> QuadratureResult:
    """The normalized mixed volume of the Newton polytopes, by quadrature.

    Equal to `expected_roots` over the whole torus.
    """
    return expected_roots(ensemble, Region.full(ensemble.n), abs_tol, rel_tol)


def real_roots_bound(
    ensemble: Ensemble,
    region: Region,
    abs_tol: Optional[float] = None,
    rel_tol: Optional[float] = None,
) -> float:
    """Upper bound on the expected number of positive real roots with p in U_p.

    `(4π²)^{−n/2} √λ(U_p) √((2π)ⁿ ∫_{U_p} D(p) dp)` over the p-projection U_p
    of *region*.

    Raises:
        InputError: For complex ensembles or unbounded p-projections.
    """
    if ensemble.field is not Field.REAL:
        raise InputError("The real root bound needs a real ensemble")
    _check_region(ensemble, region)
    if not region.is_p_bounded:
        raise InputError("The real root bound needs a bounded p-region")
    n = ensemble.n
    lam = region.p_volume()
    if lam == 0:
        return 0.0
    density = MixedDensityEvaluator(ensemble)
    integral = math.fsum(
        _p_integral(density, ensemble, lo, hi, abs_tol, rel_tol).value
        for lo, hi in region.p_boxes()
    )
    return float(
        (4 * np.pi**2) ** (-n / 2)
        * math.sqrt(lam)
        * math.sqrt(max((2 * np.pi) ** n * integral, 0.0))
    )


def kac_rice_constant(n: int) -> float:
    """E|det G| for an n×n matrix G of independent standard normals."""
    k = np.arange(1, n + 1)
    log_terms = 0.5 * np.log(2) + gammaln((k + 1) / 2) - gammaln(k / 2)
    return float(np.exp(np.sum(log_terms)))


def kac_rice_density(ensemble: Ensemble, p) -> np.ndarray:
    """Density in p of the expected positive real roots of an unmixed real ensemble.

    `c_n (2π)^{−n/2} √det(½H(p))` with c_n from `kac_rice_constant`.
    """
    if not ensemble.is_unmixed:
        raise InputError("The Kac-Rice density is implemented for unmixed ensembles")
    support, covariance = ensemble.items[0]
    det = volume_element(hessian(support, covariance, p))
    n = ensemble.n
    return kac_rice_constant(n) * (2 * np.pi) ** (-n / 2) * np.sqrt(np.maximum(det, 0))


def kac_rice_real_roots(
    ensemble: Ensemble,
    region: Region,
    orthant: str = "positive",
    abs_tol: Optional[float] = None,
    rel_tol: Optional[float] = None,
) -> QuadratureResult:
    """Expected real roots with p in the p-projection of *region*.

    Args:
        ensemble: An unmixed ensemble; coefficients are taken as real.
        region: Only the p-projection is used.
        orthant: "positive" for roots in the positive orthant, "all" for all
            2ⁿ orthants (equal by the sign symmetry of the coefficients).
        abs_tol: Absolute quadrature tolerance.
        rel_tol: Relative quadrature tolerance.
    """
    if orthant not in ("positive", "all"):
        raise InputError(f'Unknown orthant "{orthant}", expected "positive" or "all"')
    _check_region(ensemble, region)
    ensemble.require_full_dim()
    factor = 2**ensemble.n if orthant == "all" else 1
    results = [
        _p_integral(
            lambda p: kac_rice_density(ensemble, p), ensemble, lo, hi, abs_tol, rel_tol
        )
        for lo, hi in region.p_boxes()
    ]
    return QuadratureResult(
        factor * math.fsum(r.value for r in results),
        factor * math.fsum(r.error for r in results),
        sum(r.panels for r in results),
    )


def _check_momentum_box(hull, lo: np.ndarray, hi: np.ndarray, n: int):
    if lo.shape != (n,) or hi.shape != (n,) or np.any(lo >= hi):
        raise InputError(f"Invalid momentum box {lo} to {hi}")
    corners = np.array(list(product(*zip(lo, hi))))
    if np.any(hull.interior_distance(corners) < -EDGE_TOL):
        raise InputError(f"Momentum box {lo.tolist()} to {hi.tolist()} leaves the hull")


def _segment_preimage(support, covariance, lo, hi, abs_tol, rel_tol) -> float:
    a_min, a_max = float(support.exponents.min()), float(support.exponents.max())
    p_lo = (
        -np.inf
        if lo[0] <= a_min + EDGE_TOL
        else invert_momentum(support, covariance, lo)[0]
    )
    p_hi = (
        np.inf
        if hi[0] >= a_max - EDGE_TOL
        else invert_momentum(support, covariance, hi)[0]
    )

    def density(p):
        return volume_element(hessian(support, covariance, p))

    return integrate(density, [p_lo], [p_hi], abs_tol=abs_tol, rel_tol=rel_tol).value


class _Slices:
    """The preimage of a box, sliced along the last log-coordinate.

    With y' the first n − 1 momentum coordinates and t = p_n, the map
    `p ↦ (y', t)` is a diffeomorphism with Jacobian det H', H' the leading
    block of the Hessian. Along t with y' fixed, y_n is strictly increasing
    and tends to the ends of the slice of the hull at y'. The preimage of
    [lo, hi] is therefore `{(y', t) : y' ∈ [lo', hi'], t_lo(y') ≤ t ≤ t_hi(y')}`
    and the volume element becomes `det(½H) / det H'` in these coordinates.
    Faces of the box on the hull boundary give infinite t bounds.
    """

    def __init__(self, support, covariance, hull, abs_tol, rel_tol):
        self.support = support
        self.covariance = covariance
        halfspaces = hull.halfspaces()
        self.normals = np.array([[float(c) for c in a] for a, _ in halfspaces])
        self.offsets = np.array([float(b) for _, b in halfspaces])
        self.abs_tol = abs_tol
        self.rel_tol = rel_tol

    def bounds(self, y_head: np.ndarray) -> tuple[float, float]:
        """The range of y_n over the hull at y'."""
        rest = self.offsets - self.normals[:, :-1] @ y_head
        last = self.normals[:, -1]
        upper = rest[last > 0] / last[last > 0]
        lower = rest[last < 0] / last[last < 0]
        return float(lower.max()), float(upper.min())

    def last_momentum(self, y_head: np.ndarray, t: float) -> float:
        x = invert_partial_momentum(self.support, self.covariance, y_head, [t])[0]
        return float(momentum(self.support, self.covariance, np.append(x, t))[-1])

    def limit(self, y_head: np.ndarray, target: float) -> float:
        """The t at which y_n reaches *target*, inside the slice."""

        def excess(t):
            return self.last_momentum(y_head, t) - target

        a, b = -1.0, 1.0
        for _ in range(BRACKET_DOUBLINGS):
            if excess(a) < 0:
                break
            a *= 2
        for _ in range(BRACKET_DOUBLINGS):
            if excess(b) > 0:
                break
            b *= 2
        if excess(a) >= 0 or excess(b) <= 0:
            raise ConvergenceError(
                f"Could not bracket the preimage boundary y_n = {target}"
            )
        return float(brentq(excess, a, b, xtol=1e-12))

    def density(self, y_head: np.ndarray, t: np.ndarray) -> np.ndarray:
        x = invert_partial_momentum(self.support, self.covariance, y_head, t)
        h = hessian(self.support, self.covariance, np.column_stack([x, t]))
        full = volume_element(h)
        head = np.linalg.det(h[:, :-1, :-1])
        return np.divide(full, head, out=np.zeros_like(full), where=head > 0)

    def fiber(self, y_head: np.ndarray, lo: float, hi: float) -> float:
        """∫ det(½H)/det H' dt over the t-interval of the preimage at y'."""
        s_lo, s_hi = self.bounds(y_head)
        t_lo = -np.inf if lo <= s_lo + EDGE_TOL else self.limit(y_head, lo)
        t_hi = np.inf if hi >= s_hi - EDGE_TOL else self.limit(y_head, hi)
        if t_lo >= t_hi:
            return 0.0
        return integrate(
            lambda t: self.density(y_head, t[:, 0]),
            [t_lo],
            [t_hi],
            abs_tol=self.abs_tol,
            rel_tol=self.rel_tol,
        ).value

    def volume(self, lo: np.ndarray, hi: np.ndarray) -> float:
        """∫ det(½H) dp over the preimage of [lo, hi]."""

        def outer(y_heads):
            return np.array([self.fiber(y, lo[-1], hi[-1]) for y in y_heads])

        return integrate_box(
            outer,
            lo[:-1],
            hi[:-1],
            abs_tol=self.abs_tol * OUTER_TOL_FACTOR,
            rel_tol=self.rel_tol * OUTER_TOL_FACTOR,
        ).value


def momentum_pushforward_volume(
    support: Support,
    covariance: DiagonalCovariance,
    boxes: Sequence[tuple],
    abs_tol: Optional[float] = None,
    rel_tol: Optional[float] = None,
) -> float:
    """The toric volume of the cylinder over the momentum preimage of V.

    Computes `(2π)ⁿ ∫ det(½H(p)) dp` over `(∇g_A)⁻¹(V)` for V the union of
    the given disjoint boxes, which equals πⁿ λ(V) since the momentum map
    carries the toric volume to a multiple of the Lebesgue measure.

    The preimage is integrated in the coordinates (y₁, …, yₙ₋₁, pₙ): an outer
    quadrature over the leading momentum coordinates of the box and, at each
    node, a quadrature along pₙ between the inverted faces of the box. Boxes
    may reach the boundary of the hull, where the preimage is unbounded.

    <u>__Example usage:__</u>
    ```python
    square = Support.cube(2)
    flat = DiagonalCovariance([1] * 4)
    momentum_pushforward_volume(square, flat, [([0, 0], [1, 1])])  # π²
    ```

    Args:
        support: A full dimensional support.
        covariance: Its covariance.
        boxes: Boxes (lo, hi) of momentum space inside the closed hull.
        abs_tol: Absolute tolerance of the innermost quadratures.
        rel_tol: Relative tolerance of the innermost quadratures.

    Raises:
        InputError: If a box leaves the hull.
        ConvergenceError: If a quadrature or an inversion fails.
    """
    support.require_full_dim()
    covariance.check(support)
    abs_tol = ABS_TOL if abs_tol is None else abs_tol
    rel_tol = REL_TOL if rel_tol is None else rel_tol
    n = support.n
    hull = support.hull()
    slices = _Slices(support, covariance, hull, abs_tol, rel_tol) if n > 1 else None
    total = []
    for lo, hi in boxes:
        lo = np.atleast_1d(np.asarray(lo, dtype=np.float64))
        hi = np.atleast_1d(np.asarray(hi, dtype=np.float64))
        _check_momentum_box(hull, lo, hi, n)
        if slices is None:
            total.append(
                _segment_preimage(support, covariance, lo, hi, abs_tol, rel_tol)
            )
        else:
            total.append(slices.volume(lo, hi))
    log_numerics(f"Pushforward of {len(total)} boxes")
    return float((2 * np.pi) ** n * math.fsum(total))
