"""All roots in the complex torus of systems in one or two variables.

Roots are returned in logarithmic coordinates as `TorusPoint`s and are
accepted when the relative residual `‖(fⁱ · v_{Aᵢ})ᵢ‖ / ‖f‖` is at most
`rootfind.residual_tol` after Newton polishing.

One variable: the companion eigenvalues of the shifted dense polynomial.

Two variables: the second variable is hidden, the Sylvester resultant in the
first variable is interpolated at roots of unity and its roots found as a
univariate problem. The first variable is read off the null vector of the
Sylvester matrix. If a null space is not one dimensional the roles of the
variables are swapped, then random unimodular changes of exponents are
tried. When every attempt fails the system is reported degenerate.

Roots with a coordinate of modulus beyond `rootfind.escape_bound` (or below
its inverse) are escapes toward the toric boundary: they are counted but not
listed. Listed roots closer than `rootfind.merge_tol` are merged.

<u>__Example usage:__</u>
```python
ens = Ensemble.unmixed(Support.simplex(2))
roots = all_roots(sample(ens, seed=7), ens)
len(roots)            # 1
roots.degenerate      # False
```
"""
from typing import Iterator, Optional, Sequence
import math
import numpy as np
from toricond.util import settings
from toricond.api.logging import Logger
from toricond.logic import InputError, DegenerateSystemError
from toricond.logic.supports import Support, mixed_volume_oracle
from toricond.logic.kahler import DiagonalCovariance, TorusPoint
from toricond.logic.randsys import (
    Ensemble,
    Region,
    SparseSystem,
    relative_residual,
)


MERGE_TOL = settings.get("rootfind.merge_tol")
ESCAPE_BOUND = settings.get("rootfind.escape_bound")
RESIDUAL_TOL = settings.get("rootfind.residual_tol")
REAL_ANGLE_TOL = settings.get("rootfind.real_angle_tol")
PENCIL_COND = settings.get("rootfind.pencil_cond")
UNIMODULAR_ATTEMPTS = settings.get("rootfind.unimodular_attempts")
UNIMODULAR_SEED = settings.get("rootfind.unimodular_seed")
NEWTON_STEPS = 30
# Relative size below which resultant coefficients count as zero
TRIM_TOL = 1e-10
ORTHANTS = ("positive", "all")

log_numerics = Logger.channel("numerics")


class RootList:
    """Roots of a system with the bookkeeping of the solver."""

    def __init__(
        self,
        roots: Sequence[TorusPoint],
        residuals: Sequence[float],
        escapes: int = 0,
        merged: int = 0,
        degenerate: bool = False,
        expected: Optional[int] = None,
    ):
        """Initialize the class.

        Args:
            roots: The accepted roots.
            residuals: Relative residual of each root.
            escapes: Number of roots escaping toward the toric boundary.
            merged: Number of roots dropped as duplicates of a listed root.
            degenerate: If the solver or the root count signals a degenerate
                system.
            expected: The generic number of roots, when known.
        """
        assert len(roots) == len(residuals)
        self.__roots: tuple[TorusPoint, ...] = tuple(roots)
        self.__residuals: np.ndarray = np.asarray(residuals, dtype=np.float64)
        self.__escapes = int(escapes)
        self.__merged = int(merged)
        self.__degenerate = bool(degenerate)
        self.__expected = expected

    @property
    def roots(self) -> tuple[TorusPoint, ...]:
        """The roots."""
        return self.__roots

    @property
    def residuals(self) -> np.ndarray:
        """Relative residuals of the roots."""
        return self.__residuals

    @property
    def escapes(self) -> int:
        """Roots lost toward the toric boundary."""
        return self.__escapes

    @property
    def merged(self) -> int:
        """Roots merged into a neighbor."""
        return self.__merged

    @property
    def degenerate(self) -> bool:
        """If the roots of this system should not be trusted as a generic count."""
        return self.__degenerate

    @property
    def expected(self) -> Optional[int]:
        """The generic root count (Bernshtein number), if known."""
        return self.__expected

    @property
    def count(self) -> int:
        """Number of listed roots."""
        return len(self.__roots)

    def points(self) -> tuple[np.ndarray, np.ndarray]:
        """The roots as arrays p and q of shape (count, n)."""
        if not self.__roots:
            return np.empty((0, 0)), np.empty((0, 0))
        return (
            np.array([r.p for r in self.__roots]),
            np.array([r.q for r in self.__roots]),
        )

    def export(self) -> dict:
        """Export to a serializable dictionary."""
        return {
            "roots": [r.export() for r in self.__roots],
            "residuals": self.__residuals.tolist(),
            "escapes": self.escapes,
            "merged": self.merged,
            "degenerate": self.degenerate,
            "expected": self.expected,
        }

    def __len__(self) -> int:
        """Number of listed roots."""
        return self.count

    def __iter__(self) -> Iterator[TorusPoint]:
        """Iterate the roots."""
        return iter(self.__roots)

    def __getitem__(self, index: int) -> TorusPoint:
        """The root at *index*."""
        return self.__roots[index]

    def __repr__(self):
        """Repr."""
        flags = " degenerate" if self.degenerate else ""
        return (
            f"<RootList {self.count} roots, {self.escapes} escapes, "
            f"{self.merged} merged{flags}>"
        )


def _scaled_evaluation(raw, exps, z):
    """Values and Jacobian in z of the raw system, each row scaled by its max term."""
    n = len(raw)
    values = np.empty(n, dtype=np.complex128)
    jac = np.empty((n, n), dtype=np.complex128)
    for i, (c, a) in enumerate(zip(raw, exps)):
        e = a @ z
        terms = c * np.exp(e - e.real.max())
        values[i] = terms.sum()
        jac[i] = terms @ a
    return values, jac


def _escaped(z: np.ndarray) -> bool:
    return bool(np.any(np.abs(z.real) > math.log(ESCAPE_BOUND)))


def _polish(
    f: SparseSystem,
    ensemble: Ensemble,
    z: np.ndarray,
    real: bool = False,
) -> tuple[np.ndarray, float]:
    """Newton in logarithmic coordinates; returns the best iterate and residual."""
    raw = f.raw(ensemble)
    exps = [s.exponents.astype(np.float64) for s in ensemble.supports]
    best_z = z
    best = relative_residual(f, ensemble, TorusPoint(z.real, z.imag))
    for _ in range(NEWTON_STEPS):
        values, jac = _scaled_evaluation(raw, exps, z)
        try:
            if real:
                step = np.linalg.solve(jac.real, values.real)
            else:
                step = np.linalg.solve(jac, values)
        except np.linalg.LinAlgError:
            break
        if not np.all(np.isfinite(step)):
            break
        z = z - step
        if _escaped(z):
            break
        residual = relative_residual(f, ensemble, TorusPoint(z.real, z.imag))
        if residual < best:
            best_z, best = z, residual
        if np.max(np.abs(step)) <= 1e-15 * (1 + np.max(np.abs(z))):
            break
    return best_z, best


def _finish(
    f: SparseSystem,
    ensemble: Ensemble,
    candidates: Sequence[np.ndarray],
    escapes: int,
    expected: Optional[int],
    degenerate: bool = False,
    real: bool = False,
) -> RootList:
    """Polish, filter by residual, merge near duplicates and check the count."""
    accepted: list[TorusPoint] = []
    residuals: list[float] = []
    merged = 0
    rejected = 0
    for z in candidates:
        if _escaped(z):
            escapes += 1
            continue
        z, residual = _polish(f, ensemble, z, real)
        if _escaped(z):
            escapes += 1
            continue
        if residual > RESIDUAL_TOL:
            rejected += 1
            log_numerics(f"Rejected root candidate with residual {residual:.3e}")
            continue
        point = TorusPoint(z.real, z.imag)
        if any(point.distance(other) < MERGE_TOL for other in accepted):
            merged += 1
            continue
        accepted.append(point)
        residuals.append(residual)
    order = sorted(
        range(len(accepted)), key=lambda i: (*accepted[i].p, *accepted[i].q)
    )
    if expected is not None and len(accepted) + escapes != expected:
        degenerate = True
    if rejected or merged:
        degenerate = True
    return RootList(
        [accepted[i] for i in order],
        [residuals[i] for i in order],
        escapes,
        merged,
        degenerate,
        expected,
    )


def _as_system(f) -> SparseSystem:
    if isinstance(f, SparseSystem):
        return f
    return SparseSystem([np.asarray(f)])


def univariate_roots(
    f,
    support: Support,
    covariance: DiagonalCovariance,
) -> RootList:
    """All roots in ℂ* of a polynomial in one variable.

    Args:
        f: Whitened coefficients, as an array or a one-equation `SparseSystem`.
        support: A support in one variable.
        covariance: Its covariance.

    Raises:
        InputError: For the zero polynomial or a support in several variables.
    """
    if support.n != 1:
        raise InputError(f"Expected a univariate support, got n = {support.n}")
    ensemble = Ensemble([(support, covariance)])
    system = _as_system(f)
    system.check(ensemble)
    raw = system.raw(ensemble)[0]
    if not np.any(raw != 0):
        raise InputError("The zero polynomial has no isolated roots")
    a = support.exponents[:, 0]
    expected = int(a.max() - a.min())
    dense = np.zeros(expected + 1, dtype=np.complex128)
    dense[a - a.min()] = raw
    nonzero = np.flatnonzero(dense)
    dense = dense[nonzero[0] : nonzero[-1] + 1]
    lost = expected - (dense.size - 1)
    candidates = []
    if dense.size > 1:
        for x in np.roots(dense[::-1]):
            if x == 0 or not np.isfinite(x):
                lost += 1
                continue
            candidates.append(np.array([np.log(complex(x))]))
    return _finish(system, ensemble, candidates, 0, expected, degenerate=lost > 0)


def _shifted_terms(exponents: np.ndarray) -> np.ndarray:
    return exponents - exponents.min(axis=0)


def _x_coefficients(exps: np.ndarray, coeffs: np.ndarray, y: complex) -> np.ndarray:
    """Coefficients in x of a polynomial at a fixed value y, lowest degree first."""
    out = np.zeros(int(exps[:, 0].max()) + 1, dtype=np.complex128)
    np.add.at(out, exps[:, 0], coeffs * y ** exps[:, 1].astype(np.float64))
    return out


def _sylvester(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Sylvester matrix acting on (x^{N−1}, …, x, 1) for coefficient vectors a, b."""
    d1, d2 = a.size - 1, b.size - 1
    size = d1 + d2
    s = np.zeros((size, size), dtype=np.complex128)
    for j in range(d2):
        for k in range(d1 + 1):
            s[j, size - 1 - (k + j)] = a[k]
    for j in range(d1):
        for k in range(d2 + 1):
            s[d2 + j, size - 1 - (k + j)] = b[k]
    return s


class _PencilFailure(Exception):
    """The hidden-variable reduction is not reliable for this exponent frame."""


def _hidden_variable(exps: list[np.ndarray], raw: list[np.ndarray]) -> list[np.ndarray]:
    """Roots (log x, log y) of two polynomials with nonnegative exponents."""
    d = [int(e[:, 0].max()) for e in exps]
    e_deg = [int(e[:, 1].max()) for e in exps]
    if min(d) < 1:
        raise _PencilFailure("a polynomial does not involve the eliminated variable")
    bound = d[1] * e_deg[0] + d[0] * e_deg[1]
    if bound < 1:
        raise _PencilFailure("the resultant is constant")
    samples = bound + 1
    nodes = np.exp(2j * np.pi * np.arange(samples) / samples)
    values = np.array(
        [
            np.linalg.det(
                _sylvester(
                    _x_coefficients(exps[0], raw[0], y),
                    _x_coefficients(exps[1], raw[1], y),
                )
            )
            for y in nodes
        ]
    )
    resultant = np.fft.fft(values) / samples
    scale = np.max(np.abs(resultant))
    if scale == 0:
        raise _PencilFailure("the resultant vanishes identically")
    significant = np.flatnonzero(np.abs(resultant) >= TRIM_TOL * scale)
    resultant = resultant[significant[0] : significant[-1] + 1]
    roots = []
    if resultant.size < 2:
        return roots
    for y in np.roots(resultant[::-1]):
        if y == 0 or not np.isfinite(y):
            continue
        s = _sylvester(
            _x_coefficients(exps[0], raw[0], y),
            _x_coefficients(exps[1], raw[1], y),
        )
        _, sv, vh = np.linalg.svd(s)
        if sv.size > 1 and sv[-2] < sv[0] / PENCIL_COND:
            raise _PencilFailure("the Sylvester null space is not one dimensional")
        null = vh[-1].conj()
        if null[-1] == 0 or null[-2] == 0:
            roots.append(np.array([np.inf, np.log(complex(y))]))
            continue
        x = null[-2] / null[-1]
        roots.append(np.array([np.log(complex(x)), np.log(complex(y))]))
    return roots


def _frames(attempts: int, seed: int) -> Iterator[np.ndarray]:
    """Exponent changes to try: identity, the swap, then random shears."""
    yield np.eye(2, dtype=np.int64)
    yield np.array([[0, 1], [1, 0]], dtype=np.int64)
    rng = np.random.default_rng(seed)
    for attempt in range(attempts):
        k = int(rng.integers(1, 4)) * int(rng.choice([-1, 1]))
        if attempt % 2:
            yield np.array([[1, 0], [k, 1]], dtype=np.int64)
        else:
            yield np.array([[1, k], [0, 1]], dtype=np.int64)


def bivariate_roots(f: SparseSystem, ensemble: Ensemble) -> RootList:
    """All isolated roots in (ℂ*)² of a system in two variables.

    Raises:
        InputError: If the ensemble is not bivariate or a support is not full
            dimensional.
        DegenerateSystemError: If every exponent frame gives an ill-conditioned
            resultant pencil.
    """
    if ensemble.n != 2:
        raise InputError(f"Expected a bivariate ensemble, got n = {ensemble.n}")
    ensemble.require_full_dim()
    f.check(ensemble)
    raw = f.raw(ensemble)
    if any(not np.any(c != 0) for c in raw):
        raise InputError("A zero equation has no isolated roots")
    expected = int(mixed_volume_oracle(*ensemble.supports))
    shifted = [_shifted_terms(s.exponents) for s in ensemble.supports]
    # x_j^g is a new variable when every exponent of x_j is a multiple of g
    stacked = np.concatenate(shifted)
    g = np.gcd.reduce(stacked, axis=0)
    reduced = [e // g for e in shifted]
    found = None
    for frame in _frames(UNIMODULAR_ATTEMPTS, UNIMODULAR_SEED):
        exps = [_shifted_terms(e @ frame) for e in reduced]
        try:
            found = [frame @ z for z in _hidden_variable(exps, raw)]
        except _PencilFailure as error:
            log_numerics(f"Resultant frame {frame.tolist()} failed: {error}")
            continue
        break
    if found is None:
        raise DegenerateSystemError("Every resultant pencil is ill-conditioned")
    candidates = []
    escapes = 0
    for z in found:
        if not np.all(np.isfinite(z)):
            escapes += int(np.prod(g))
            continue
        for shift in np.ndindex(*g):
            candidates.append((z + 2j * np.pi * np.array(shift)) / g)
    return _finish(f, ensemble, candidates, escapes, expected)


def all_roots(f: SparseSystem, ensemble: Ensemble) -> RootList:
    """All roots of a system in one or two variables."""
    if ensemble.n == 1:
        support, covariance = ensemble.items[0]
        return univariate_roots(f, support, covariance)
    if ensemble.n == 2:
        return bivariate_roots(f, ensemble)
    raise InputError(f"Root finding is implemented for n <= 2, got n = {ensemble.n}")


def _angle_error(q: np.ndarray, allowed: Sequence[float]) -> np.ndarray:
    errors = [np.abs(np.mod(q - a + np.pi, 2 * np.pi) - np.pi) for a in allowed]
    return np.min(errors, axis=0)


def real_roots(
    f: SparseSystem,
    ensemble: Ensemble,
    orthant: str = "positive",
    roots: Optional[RootList] = None,
) -> RootList:
    """The real roots of a real system, re-verified by real Newton.

    Args:
        f: A system with real coefficients.
        ensemble: Its ensemble.
        orthant: "positive" keeps roots with q = 0, "all" keeps q ∈ {0, π}ⁿ.
        roots: Complex roots of *f* if already computed.
    """
    if orthant not in ORTHANTS:
        raise InputError(f'Unknown orthant "{orthant}", expected one of {ORTHANTS}')
    if not f.is_real:
        raise InputError("Real roots need real coefficients")
    roots = all_roots(f, ensemble) if roots is None else roots
    allowed = [0.0] if orthant == "positive" else [0.0, np.pi]
    candidates = []
    for root in roots:
        if np.all(_angle_error(root.q, allowed) <= REAL_ANGLE_TOL):
            near_zero = _angle_error(root.q, [0.0]) <= _angle_error(root.q, [np.pi])
            candidates.append(root.p + 1j * np.where(near_zero, 0.0, np.pi))
    # Snapped angles stay fixed: real Newton only moves p
    return _finish(f, ensemble, candidates, 0, None, roots.degenerate, real=True)


def count_roots_in_region(roots: RootList, region: Region) -> int:
    """Number of listed roots lying in *region*."""
    return sum(1 for r in roots if region.contains(r))
