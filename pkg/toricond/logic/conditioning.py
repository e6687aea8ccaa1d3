"""Condition matrices, distances to the discriminant and the mixed dilation.

At a root (p, q) of a system f the condition matrix D(f) has rows
`fⁱ · Dv_{Aᵢ}`. With every fⁱ scaled to unit norm, the distance from f to the
systems of the fiber that have a degenerate root at (p, q) is

    d² = min over unit v ∈ ℂⁿ of Σᵢ |vᵢ|² / ‖D(f)⁻¹v‖²_{Aᵢ}

where `‖u‖_{Aᵢ}` is the Hermitian norm of `toricond.logic.kahler.KahlerFrame`.
Writing `Bᵢ = Rᵢ D(f)⁻¹` with Rᵢ the Cholesky factor of the metric of Aᵢ
turns every Aᵢ-norm into a plain Euclidean norm `‖Bᵢ v‖`. At points that are
not roots, the part of f̃ outside the fiber adds `Σᵢ |f̃ⁱ · v_{Aᵢ}|²`.

The minimization over v is a multistart quasi-Newton search with fixed seeds.
One start is always the maximizer of the lower condition bound, which keeps
`lower <= 1 / d <= upper` exact for the computed values. Unmixed ensembles
use the closed form `d² = 1 / σ_max(B)²`.

<u>__Example usage:__</u>
```python
ens = Ensemble.unmixed(Support.segment(1))
f = SparseSystem([np.array([-1, 1]) / np.sqrt(2)])
root = TorusPoint([0.0], [0.0])
condition_matrix(f, ens, root).rows      # [[0.5]]
distance_to_sigma(f, ens, root)          # 1.0
condition_bounds(f, ens, root)           # ConditionBounds(lower=1.0, upper=1.0)
```
"""
from typing import Callable, NamedTuple, Optional, Sequence
from functools import cached_property
import numpy as np
from scipy.optimize import minimize
from toricond.util import settings
from toricond.api.logging import Logger
from toricond.logic import Field, InputError
from toricond.logic.kahler import TorusPoint, KahlerFrame
from toricond.logic.quadrature import truncate_box
from toricond.logic.randsys import (
    Ensemble,
    Region,
    SparseSystem,
    relative_residual,
)


IDENTITY_TOL = settings.get("numerics.identity_tol")
ROOT_TOL = settings.get("numerics.root_tol")
SINGULAR_TOL = settings.get("numerics.singular_tol")
MULTISTART = settings.get("conditioning.multistart")
MULTISTART_SEED = settings.get("conditioning.multistart_seed")
GRID_POINTS = settings.get("conditioning.grid_points")
REFINE_LEVELS = settings.get("conditioning.refine_levels")
P_CLIP = settings.get("conditioning.p_clip")
DILATION_MULTISTART = settings.get("dilation.multistart")
DILATION_SEED = settings.get("dilation.multistart_seed")
DILATION_GRID = settings.get("dilation.grid_points")
NELDER_MEAD_OPTIONS = {
    "xatol": 1e-12,
    "fatol": 1e-14,
    "maxiter": 4000,
    "adaptive": True,
}

log_numerics = Logger.channel("numerics")


class ConditionMatrix:
    """The condition matrix D(f) of a system at a point of the torus."""

    def __init__(self, f: SparseSystem, ensemble: Ensemble, point: TorusPoint):
        """Initialize the class.

        Does not check that *point* is a root; see `condition_matrix`.
        """
        f.check(ensemble)
        self.__frames: tuple[KahlerFrame, ...] = tuple(ensemble.frames(point))
        self.__rows: np.ndarray = np.array(
            [c @ frame.dv for c, frame in zip(f, self.__frames)]
        )
        self.__point = point

    @property
    def rows(self) -> np.ndarray:
        """The n×n matrix with rows fⁱ · Dv_{Aᵢ}."""
        return self.__rows

    @property
    def frames(self) -> tuple[KahlerFrame, ...]:
        """The Kähler frames used."""
        return self.__frames

    @property
    def point(self) -> TorusPoint:
        """The base point."""
        return self.__point

    @property
    def n(self) -> int:
        """Matrix size."""
        return self.__rows.shape[0]

    def det(self) -> complex:
        """det D(f)."""
        return complex(np.linalg.det(self.__rows))

    @property
    def is_singular(self) -> bool:
        """If the condition number of D(f) exceeds 1 / `numerics.singular_tol`."""
        cond = np.linalg.cond(self.__rows)
        return not np.isfinite(cond) or cond > 1 / SINGULAR_TOL

    def dg(self) -> np.ndarray:
        """Derivative of the implicit root map G, an n × ΣMᵢ complex matrix.

        Perturbing the coefficients by ḟ moves the root by `DG ḟ`, where
        `DG = −D(f)⁻¹ D_F` and D_F has the unit Veronese vector vᵢ of
        equation i in block i of row i.
        """
        blocks = [frame.v for frame in self.__frames]
        total = sum(b.size for b in blocks)
        d_f = np.zeros((self.n, total), dtype=np.complex128)
        start = 0
        for i, block in enumerate(blocks):
            d_f[i, start : start + block.size] = block
            start += block.size
        return -np.linalg.solve(self.__rows, d_f)

    def det_dg_gram_inverse(self) -> float:
        """det(DG DGᴴ)⁻¹, equal to |det D(f)|² at a root."""
        dg = self.dg()
        return float(1 / np.linalg.det(dg @ dg.conj().T).real)

    def __repr__(self):
        """Repr."""
        return f"<ConditionMatrix n={self.n} at {self.point}>"


class ConditionBounds(NamedTuple):
    """Lower and upper bounds on the condition number at a root."""

    lower: float
    upper: float


class DilationReport(NamedTuple):
    """Result of `mixed_dilation`."""

    kappa_upper: float
    """Upper bound on the mixed dilation, max of *per_support_ratios*."""
    minimizer: np.ndarray
    """Upper triangular L with det 1 realizing *kappa_upper*."""
    per_support_ratios: np.ndarray
    """Eigenvalue ratios of LᵀHᵢL."""


class SweepReport(NamedTuple):
    """Result of a grid sweep over a region."""

    value: float
    """The maximum found."""
    location: Optional[np.ndarray]
    """Coordinates of the maximum."""
    spacing: np.ndarray
    """Grid spacing per coordinate at the finest level."""
    evaluations: int
    """Number of evaluated grid points."""


def _require_root(f: SparseSystem, ensemble: Ensemble, point: TorusPoint):
    residual = relative_residual(f, ensemble, point)
    if residual > ROOT_TOL:
        raise InputError(
            f"Point is not a root: relative residual {residual:.3e} > {ROOT_TOL}"
        )


def condition_matrix(
    f: SparseSystem,
    ensemble: Ensemble,
    point: TorusPoint,
) -> ConditionMatrix:
    """The condition matrix D(f) at the root *point*.

    Raises:
        InputError: If *point* is not a root within `numerics.root_tol`.
    """
    _require_root(f, ensemble, point)
    return ConditionMatrix(f, ensemble, point)


class _FiberGeometry:
    """The matrices Bᵢ of a normalized system at one point."""

    def __init__(self, f: SparseSystem, ensemble: Ensemble, point: TorusPoint):
        f.check(ensemble)
        ensemble.require_full_dim()
        norms = f.norms()
        if np.any(norms == 0):
            raise InputError("Systems with a zero equation have no projective class")
        unit = f.scale(1 / norms)
        frames = ensemble.frames(point)
        values = np.array([c @ frame.v for c, frame in zip(unit, frames)])
        rows = np.array([c @ frame.dv for c, frame in zip(unit, frames)])
        self.n = ensemble.n
        self.unmixed = ensemble.is_unmixed
        self.perp2 = float(np.sum(np.abs(values) ** 2))
        cond = np.linalg.cond(rows)
        self.singular = not np.isfinite(cond) or cond > 1 / SINGULAR_TOL
        scale = np.max(np.abs(rows))
        self.real = (
            ensemble.field is Field.REAL
            and f.is_real
            and np.max(np.abs(rows.imag)) <= 1e-12 * scale
        )
        if self.real:
            rows = rows.real
        if self.singular:
            return
        inverse = np.linalg.inv(rows)
        self.b = np.stack([frame.cholesky @ inverse for frame in frames])
        if self.real:
            self.b = self.b.real
        self.grams = np.einsum("kji,kjl->kil", self.b.conj(), self.b)
        self.sigma_max = np.array([np.linalg.norm(b, 2) for b in self.b])

    def vector(self, x: np.ndarray) -> np.ndarray:
        if self.real:
            return x
        return x[: self.n] + 1j * x[self.n :]

    def coords(self, v: np.ndarray) -> np.ndarray:
        if self.real:
            return np.real(v).astype(np.float64)
        return np.concatenate([v.real, v.imag])

    def ratio_sum(self, x: np.ndarray) -> tuple[float, np.ndarray]:
        """Σᵢ |vᵢ|² / ‖Bᵢ v‖² and its gradient in real coordinates."""
        v = self.vector(x)
        gv = np.einsum("kij,j->ki", self.grams, v)
        b = np.einsum("i,ki->k", v.conj(), gv).real
        if np.any(b <= 0):
            return np.inf, np.zeros_like(x)
        a = np.abs(v) ** 2
        grad = 2 * v / b - 2 * np.sum((a / b**2)[:, None] * gv, axis=0)
        return float(np.sum(a / b)), self.coords(grad)

    def ratio_value(self, v: np.ndarray) -> float:
        return self.ratio_sum(self.coords(v / np.linalg.norm(v)))[0]

    def min_norm(self, v: np.ndarray) -> float:
        """minᵢ ‖Bᵢ v‖ for unit v."""
        v = v / np.linalg.norm(v)
        return float(np.min(np.linalg.norm(self.b @ v, axis=1)))

    def starts(self) -> list[np.ndarray]:
        """Basis vectors, top singular vectors of every Bᵢ, then seeded noise."""
        dtype = np.float64 if self.real else np.complex128
        starts = [np.eye(self.n, dtype=dtype)[k] for k in range(self.n)]
        for b in self.b:
            _, _, vh = np.linalg.svd(b)
            starts.append(vh[0].conj())
        rng = np.random.default_rng(MULTISTART_SEED)
        while len(starts) < max(MULTISTART, 2 * self.n + 1):
            v = rng.standard_normal(self.n)
            if not self.real:
                v = v + 1j * rng.standard_normal(self.n)
            starts.append(v)
        return starts

    @cached_property
    def lower_bound(self) -> tuple[float, np.ndarray]:
        """max over unit v of minᵢ ‖Bᵢ v‖, with its maximizer."""
        if self.unmixed:
            _, _, vh = np.linalg.svd(self.b[0])
            return float(self.sigma_max[0]), vh[0].conj()
        best_v = None
        best = -np.inf
        dim = self.n if self.real else 2 * self.n

        def constraint(y):
            v = self.vector(y[:dim])
            return np.linalg.norm(self.b @ v, axis=1) ** 2 - y[dim]

        def constraint_jac(y):
            v = self.vector(y[:dim])
            gv = np.einsum("kij,j->ki", self.grams, v)
            jac = np.array([self.coords(2 * g) for g in gv])
            return np.hstack([jac, -np.ones((self.n, 1))])

        sphere = {
            "type": "eq",
            "fun": lambda y: np.array([y[:dim] @ y[:dim] - 1.0]),
            "jac": lambda y: np.append(2 * y[:dim], 0.0)[None, :],
        }
        for start in self.starts():
            start = start / np.linalg.norm(start)
            value = self.min_norm(start)
            if value > best:
                best, best_v = value, start
            y0 = np.append(self.coords(start), value**2)
            result = minimize(
                lambda y: -y[dim],
                y0,
                jac=lambda y: np.append(np.zeros(dim), -1.0),
                method="SLSQP",
                constraints=[
                    {"type": "ineq", "fun": constraint, "jac": constraint_jac},
                    sphere,
                ],
            )
            v = self.vector(result.x[:dim])
            if not np.all(np.isfinite(v)) or np.linalg.norm(v) == 0:
                log_numerics(f"Lower bound search failed: {result.message}")
                continue
            value = self.min_norm(v)
            if value > best:
                best, best_v = value, v / np.linalg.norm(v)
        return float(best), best_v

    @property
    def upper_bound(self) -> float:
        return float(np.max(self.sigma_max))

    def fiber_min(self) -> float:
        """min over unit v of Σᵢ |vᵢ|² / ‖Bᵢ v‖²."""
        if self.unmixed:
            return float(1 / self.sigma_max[0] ** 2)
        _, v_star = self.lower_bound
        best = self.ratio_value(v_star)
        for start in [v_star] + self.starts():
            result = minimize(
                self.ratio_sum,
                self.coords(start / np.linalg.norm(start)),
                jac=True,
                method="BFGS",
            )
            v = self.vector(result.x)
            if not np.all(np.isfinite(v)) or np.linalg.norm(v) == 0:
                log_numerics(f"Distance search failed: {result.message}")
                continue
            best = min(best, self.ratio_value(v))
        return float(best)

    def distance(self) -> float:
        if self.singular:
            return float(np.sqrt(min(self.perp2, self.n)))
        return float(np.sqrt(min(self.perp2 + self.fiber_min(), self.n)))


def fiber_distance(f: SparseSystem, ensemble: Ensemble, point: TorusPoint) -> float:
    """d_P(f, Σ_{(p,q)}), the distance to systems with a degenerate root at *point*.

    Defined for every point of the torus, root or not.
    """
    return _FiberGeometry(f, ensemble, point).distance()


def distance_to_sigma(f: SparseSystem, ensemble: Ensemble, point: TorusPoint) -> float:
    """d_P(f, Σ_{(p,q)}) at the root *point*, a value in [0, √n].

    Returns 0 when D(f) is singular.

    Raises:
        InputError: If *point* is not a root.
    """
    _require_root(f, ensemble, point)
    geometry = _FiberGeometry(f, ensemble, point)
    if geometry.singular:
        return 0.0
    return geometry.distance()


def condition_bounds(
    f: SparseSystem,
    ensemble: Ensemble,
    point: TorusPoint,
) -> ConditionBounds:
    """Lower and upper bounds on the condition number at the root *point*.

    `lower = max_v minᵢ ‖Bᵢ v‖` and `upper = maxᵢ σ_max(Bᵢ)`, so that
    `lower <= 1 / distance_to_sigma <= upper`. Both are (inf, inf) at a
    degenerate root.
    """
    _require_root(f, ensemble, point)
    geometry = _FiberGeometry(f, ensemble, point)
    if geometry.singular:
        return ConditionBounds(np.inf, np.inf)
    lower, _ = geometry.lower_bound
    return ConditionBounds(min(lower, geometry.upper_bound), geometry.upper_bound)


def unmixed_condition(f: SparseSystem, ensemble: Ensemble, point: TorusPoint) -> float:
    """The condition number 1 / d_P(f, Σ_{(p,q)}) of an unmixed ensemble."""
    if not ensemble.is_unmixed:
        raise InputError("The condition number is only defined for unmixed ensembles")
    d = distance_to_sigma(f, ensemble, point)
    return np.inf if d == 0 else 1 / d


def _box_grid(lo: np.ndarray, hi: np.ndarray, points: int):
    """Cell midpoints of a regular grid; zero-width coordinates stay fixed."""
    axes = []
    spacing = []
    for a, b in zip(lo, hi):
        if a == b:
            axes.append(np.array([a]))
            spacing.append(0.0)
        else:
            h = (b - a) / points
            axes.append(a + h * (np.arange(points) + 0.5))
            spacing.append(h)
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack(mesh, axis=-1).reshape(-1, len(lo)), np.array(spacing)


def _sweep_box(
    score: Callable[[np.ndarray], float],
    lo: np.ndarray,
    hi: np.ndarray,
    points: int,
    levels: int,
) -> SweepReport:
    """Maximize *score* on a grid, then on finer grids around the best point."""
    grid, spacing = _box_grid(lo, hi, points)
    best, best_x = -np.inf, None
    evaluations = 0
    for level in range(levels + 1):
        if level:
            half = spacing / 2
            grid, spacing = _box_grid(
                np.maximum(lo, best_x - half),
                np.minimum(hi, best_x + half),
                points,
            )
        for x in grid:
            value = score(x)
            evaluations += 1
            if value > best:
                best, best_x = value, x
        if best == np.inf:
            break
    return SweepReport(float(best), best_x, spacing, evaluations)


def _best_of(reports: Sequence[SweepReport]) -> SweepReport:
    best = max(reports, key=lambda r: r.value)
    evaluations = sum(r.evaluations for r in reports)
    return SweepReport(best.value, best.location, best.spacing, evaluations)


def condition_sweep(
    f: SparseSystem,
    ensemble: Ensemble,
    region: Region,
    grid_points: Optional[int] = None,
    refine_levels: Optional[int] = None,
    p_clip: Optional[float] = None,
) -> SweepReport:
    """Grid search for the largest 1 / d_P(f, Σ_{(p,q)}) over *region*.

    Every box is searched on its own grid of *grid_points* cell midpoints per
    coordinate, followed by *refine_levels* local refinements. Infinite
    p-bounds are clipped to [−p_clip, p_clip]. The location is (p, q).

    Raises:
        InputError: If the region is empty.
    """
    if region.is_empty:
        raise InputError("Cannot sweep an empty region")
    if region.n != ensemble.n:
        raise InputError(f"Region has {region.n} coordinates, ensemble {ensemble.n}")
    points = GRID_POINTS if grid_points is None else grid_points
    levels = REFINE_LEVELS if refine_levels is None else refine_levels
    clip = P_CLIP if p_clip is None else p_clip
    n = ensemble.n

    def score(x: np.ndarray) -> float:
        d = fiber_distance(f, ensemble, TorusPoint(x[:n], x[n:]))
        return np.inf if d == 0 else 1 / d

    reports = []
    for box in region.boxes:
        p_lo, p_hi = truncate_box(box.p_lo, box.p_hi, clip)
        lo = np.concatenate([p_lo, box.q_lo])
        hi = np.concatenate([p_hi, box.q_hi])
        reports.append(_sweep_box(score, lo, hi, points, levels))
    return _best_of(reports)


def restricted_condition(
    f: SparseSystem,
    ensemble: Ensemble,
    region: Region,
    grid_points: Optional[int] = None,
    refine_levels: Optional[int] = None,
    p_clip: Optional[float] = None,
) -> float:
    """The restricted condition number µ(f; U) = 1 / min over U of d_P(f, Σ_{(p,q)}).

    See `condition_sweep` for the search and its options.
    """
    return condition_sweep(
        f, ensemble, region, grid_points, refine_levels, p_clip
    ).value


def _check_hessians(hessians) -> np.ndarray:
    h = np.asarray(hessians, dtype=np.float64)
    if h.ndim != 3 or h.shape[1] != h.shape[2] or h.shape[0] < 1:
        raise InputError(f"Expected a stack of square matrices, got shape {h.shape}")
    for i, m in enumerate(h):
        if not np.allclose(m, m.T, rtol=IDENTITY_TOL, atol=0):
            raise InputError(f"Matrix {i} is not symmetric")
        try:
            np.linalg.cholesky(m)
        except np.linalg.LinAlgError:
            raise InputError(f"Matrix {i} is not positive definite")
    return h


def _ratios(hessians: np.ndarray, L: np.ndarray) -> np.ndarray:
    eig = np.linalg.eigvalsh(L.T @ hessians @ L)
    if np.any(eig[:, 0] <= 0):
        return np.full(len(hessians), np.inf)
    return eig[:, -1] / eig[:, 0]


def _unit_det(L: np.ndarray) -> np.ndarray:
    return L / abs(np.linalg.det(L)) ** (1 / L.shape[0])


def _to_triangular(params: np.ndarray, n: int) -> np.ndarray:
    """Upper triangular L with det 1 from n−1 log-diagonals and the upper part."""
    L = np.zeros((n, n))
    log_diag = np.append(params[: n - 1], -np.sum(params[: n - 1]))
    L[np.diag_indices(n)] = np.exp(log_diag)
    L[np.triu_indices(n, 1)] = params[n - 1 :]
    return L


def _from_triangular(L: np.ndarray) -> np.ndarray:
    n = L.shape[0]
    L = _unit_det(L)
    return np.concatenate([np.log(np.diag(L))[: n - 1], L[np.triu_indices(n, 1)]])


def mixed_dilation(hessians) -> DilationReport:
    """An upper bound on the mixed dilation of positive definite H₁, …, Hₙ.

    Minimizes `maxᵢ cond(LᵀHᵢL)` over upper triangular L with unit
    determinant by multistart Nelder–Mead. Starts are the identity, the L
    with `LᵀHᵢL = I` for every i, and seeded perturbations of the best.

    Raises:
        InputError: If a matrix is not symmetric positive definite.
    """
    h = _check_hessians(hessians)
    n = h.shape[1]
    if n == 1:
        L = np.ones((1, 1))
        ratios = _ratios(h, L)
        return DilationReport(float(np.max(ratios)), L, ratios)
    if all(np.allclose(m, h[0], rtol=1e-12, atol=0) for m in h[1:]):
        eigvals, eigvecs = np.linalg.eigh(h[0])
        L = _unit_det(eigvecs @ np.diag(eigvals**-0.5) @ eigvecs.T)
        ratios = _ratios(h, L)
        return DilationReport(float(np.max(ratios)), L, ratios)

    def objective(params):
        return float(np.log(np.max(_ratios(h, _to_triangular(params, n)))))

    starts = [np.zeros(n - 1 + n * (n - 1) // 2)]
    for m in h:
        chol_upper = np.linalg.cholesky(m).T
        starts.append(_from_triangular(np.linalg.inv(chol_upper)))
    best = min(starts, key=objective)
    rng = np.random.default_rng(DILATION_SEED)
    for _ in range(DILATION_MULTISTART):
        starts.append(best + 0.5 * rng.standard_normal(best.size))
    best_value = objective(best)
    for start in starts:
        result = minimize(
            objective,
            start,
            method="Nelder-Mead",
            options=NELDER_MEAD_OPTIONS,
        )
        if result.fun < best_value:
            best, best_value = result.x, result.fun
    L = _to_triangular(best, n)
    ratios = _ratios(h, L)
    return DilationReport(float(np.max(ratios)), L, ratios)


def dilation_sweep(
    ensemble: Ensemble,
    region: Region,
    grid_points: Optional[int] = None,
    p_clip: Optional[float] = None,
) -> SweepReport:
    """Grid maximum of `mixed_dilation` over the p-boxes of *region*.

    The Hessians depend on p only, so angles are ignored. Unmixed ensembles
    give 1 without a search.
    """
    if region.is_empty:
        raise InputError("Cannot sweep an empty region")
    ensemble.require_full_dim()
    n = ensemble.n
    if ensemble.is_unmixed:
        return SweepReport(1.0, None, np.zeros(n), 0)
    points = DILATION_GRID if grid_points is None else grid_points
    clip = P_CLIP if p_clip is None else p_clip

    def score(p: np.ndarray) -> float:
        return mixed_dilation(ensemble.hessians(p)).kappa_upper

    reports = []
    for box in region.boxes:
        lo, hi = truncate_box(box.p_lo, box.p_hi, clip)
        reports.append(_sweep_box(score, lo, hi, points, levels=0))
    return _best_of(reports)


def kappa_over_region(
    ensemble: Ensemble,
    region: Region,
    grid_points: Optional[int] = None,
    p_clip: Optional[float] = None,
) -> float:
    """κ_U, the largest mixed dilation bound over a grid of *region*."""
    return dilation_sweep(ensemble, region, grid_points, p_clip).value
