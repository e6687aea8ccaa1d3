"""The toric Kähler layer of a support.

For a support A with diagonal covariance C the potential is

    g_A(p) = ½ log Σ_α C_αα exp(2 A^α·p)

Its gradient is the momentum map, a diffeomorphism of ℝⁿ onto the interior of
the Newton polytope when A is full dimensional, and its Hessian defines the
metric `½ D²g_A` of the Hermitian structure at a point of the torus.

All exponential sums are shifted by their maximum (log-sum-exp), so the
functions here are finite for |A·p| far beyond the float exponent range. The
vectorized functions accept arrays of points with shape (..., n).

Coefficients are whitened: a coefficient vector f evaluates as `f · v̂_A`,
where `v̂_A = C^{1/2} exp(A z)` is the Veronese map of `veronese_hat`.
"""
from typing import Optional
from functools import cached_property
import numpy as np
from scipy.special import logsumexp, softmax
from toricond.util import settings
from toricond.logic import InputError, ConvergenceError
from toricond.logic.supports import Support, MAX_EXACT_DIM


TWO_PI = 2 * np.pi
NEWTON_TOL = settings.get("kahler.newton_tol")
NEWTON_MAX_ITER = settings.get("kahler.newton_max_iter")


class DiagonalCovariance:
    """Positive diagonal covariance weights of one support."""

    def __init__(self, weights):
        """Initialize the class.

        Args:
            weights: Strictly positive finite reals, one per monomial.

        Raises:
            InputError: On empty, non-finite or non-positive weights.
        """
        arr = np.array(weights, dtype=np.float64).ravel()
        if arr.size < 1:
            raise InputError("Covariance needs at least one weight")
        if not np.all(np.isfinite(arr)) or not np.all(arr > 0):
            raise InputError(f"Covariance weights must be positive: {arr.tolist()}")
        arr.setflags(write=False)
        self.__weights: np.ndarray = arr

    @property
    def weights(self) -> np.ndarray:
        """Read-only array of the diagonal entries."""
        return self.__weights

    @property
    def sqrt(self) -> np.ndarray:
        """Square roots of the weights (the whitening scale)."""
        return np.sqrt(self.__weights)

    @property
    def size(self) -> int:
        """Number of weights."""
        return self.__weights.size

    def check(self, support: Support):
        """Raise `toricond.logic.InputError` if *support* has another size."""
        if support.size != self.size:
            raise InputError(
                f"Covariance has {self.size} weights but support has "
                f"{support.size} monomials"
            )

    def export(self) -> list[float]:
        """Export the weights as a list."""
        return self.__weights.tolist()

    @classmethod
    def identity(cls, size: int) -> "DiagonalCovariance":
        """Unit weights."""
        return cls(np.ones(size))

    def __len__(self) -> int:
        """Number of weights."""
        return self.size

    def __eq__(self, other) -> bool:
        """Equality."""
        if isinstance(other, DiagonalCovariance):
            return np.array_equal(self.weights, other.weights)
        return False

    def __hash__(self):
        """Hash."""
        return hash(self.__weights.tobytes())

    def __repr__(self):
        """Repr."""
        return f"<DiagonalCovariance {self.export()}>"


class TorusPoint:
    """A point ζ = exp(p + iq) of the complex torus in logarithmic coordinates.

    The angles q are reduced to [0, 2π).
    """

    def __init__(self, p, q=None):
        """Initialize the class.

        Args:
            p: Real n-vector of log-moduli.
            q: Real n-vector of arguments (default: zeros).
        """
        p = np.atleast_1d(np.array(p, dtype=np.float64))
        if q is None:
            q = np.zeros_like(p)
        q = np.atleast_1d(np.array(q, dtype=np.float64))
        if p.ndim != 1 or p.shape != q.shape or p.size < 1:
            raise InputError(f"Point needs matching p and q vectors: {p}, {q}")
        if not (np.all(np.isfinite(p)) and np.all(np.isfinite(q))):
            raise InputError(f"Point coordinates must be finite: {p}, {q}")
        q = np.mod(q, TWO_PI)
        q[q >= TWO_PI] = 0.0
        p.setflags(write=False)
        q.setflags(write=False)
        self.__p: np.ndarray = p
        self.__q: np.ndarray = q

    @property
    def p(self) -> np.ndarray:
        """Log-moduli."""
        return self.__p

    @property
    def q(self) -> np.ndarray:
        """Arguments in [0, 2π)."""
        return self.__q

    @property
    def n(self) -> int:
        """Number of coordinates."""
        return self.__p.size

    @property
    def z(self) -> np.ndarray:
        """The complex logarithm p + iq."""
        return self.__p + 1j * self.__q

    @property
    def zeta(self) -> np.ndarray:
        """The point exp(p + iq)."""
        return np.exp(self.z)

    @classmethod
    def from_zeta(cls, zeta) -> "TorusPoint":
        """The point with coordinates *zeta* (all nonzero)."""
        zeta = np.atleast_1d(np.asarray(zeta, dtype=np.complex128))
        if np.any(zeta == 0):
            raise InputError("Torus points have nonzero coordinates")
        return cls(np.log(np.abs(zeta)), np.angle(zeta))

    def distance(self, other: "TorusPoint") -> float:
        """Euclidean distance in (p, q) with angles compared modulo 2π."""
        dq = np.mod(self.q - other.q + np.pi, TWO_PI) - np.pi
        return float(np.sqrt(np.sum((self.p - other.p) ** 2) + np.sum(dq**2)))

    def export(self) -> dict:
        """Export to a serializable dictionary."""
        return {"p": self.__p.tolist(), "q": self.__q.tolist()}

    def __eq__(self, other) -> bool:
        """Equality."""
        if isinstance(other, TorusPoint):
            return np.array_equal(self.p, other.p) and np.array_equal(self.q, other.q)
        return False

    def __hash__(self):
        """Hash."""
        return hash((self.__p.tobytes(), self.__q.tobytes()))

    def __repr__(self):
        """Repr."""
        return f"<TorusPoint p={self.p.tolist()} q={self.q.tolist()}>"


def _exponents(support: Support) -> np.ndarray:
    return support.exponents.astype(np.float64)


def _log_terms(support: Support, covariance: DiagonalCovariance, p) -> np.ndarray:
    """log(C_αα) + 2 A^α·p with shape (..., M)."""
    covariance.check(support)
    p = np.asarray(p, dtype=np.float64)
    if p.shape[-1:] != (support.n,):
        raise InputError(f"Expected points with {support.n} coordinates, got {p.shape}")
    return np.log(covariance.weights) + 2.0 * (p @ _exponents(support).T)


def monomial_weights(support: Support, covariance: DiagonalCovariance, p) -> np.ndarray:
    """The probability weights w_α ∝ C_αα exp(2 A^α·p), shape (..., M)."""
    return softmax(_log_terms(support, covariance, p), axis=-1)


def potential(support: Support, covariance: DiagonalCovariance, p) -> np.ndarray:
    """The potential g_A(p) = ½ log Σ_α C_αα exp(2 A^α·p).

    Equals log ‖v̂_A(p + iq)‖ for every q.
    """
    return 0.5 * logsumexp(_log_terms(support, covariance, p), axis=-1)


def momentum(
    support: Support,
    covariance: DiagonalCovariance,
    p,
    require_full_dim: bool = True,
) -> np.ndarray:
    """The momentum map ∇g_A(p) = Σ_α w_α A^α, shape (..., n).

    Args:
        support: The support A.
        covariance: The covariance C.
        p: Points of shape (..., n).
        require_full_dim: Reject supports that are not full dimensional.
    """
    if require_full_dim:
        support.require_full_dim()
    return monomial_weights(support, covariance, p) @ _exponents(support)


def hessian(
    support: Support,
    covariance: DiagonalCovariance,
    p,
    require_full_dim: bool = True,
) -> np.ndarray:
    """The Hessian D²g_A(p), shape (..., n, n).

    Twice the covariance matrix of the rows of A under the weights w_α:
    `2 (Σ w_α A^αᵀA^α − ∇g ∇gᵀ)`.
    """
    if require_full_dim:
        support.require_full_dim()
    A = _exponents(support)
    w = monomial_weights(support, covariance, p)
    mean = w @ A
    second = np.einsum("...m,mi,mj->...ij", w, A, A)
    return 2.0 * (second - mean[..., :, None] * mean[..., None, :])


def _check_point(support: Support, point: TorusPoint):
    if point.n != support.n:
        raise InputError(f"Point has {point.n} coordinates, support has {support.n}")


def veronese_hat(
    support: Support,
    covariance: DiagonalCovariance,
    point: TorusPoint,
) -> np.ndarray:
    """The Veronese vector v̂_A = C^{1/2} exp(A (p + iq)), complex M-vector.

    Components overflow to infinity for very large |A·p|; use `veronese` for
    the normalized vector.
    """
    covariance.check(support)
    _check_point(support, point)
    return covariance.sqrt * np.exp(_exponents(support) @ point.z)


def veronese(
    support: Support,
    covariance: DiagonalCovariance,
    point: TorusPoint,
) -> np.ndarray:
    """The unit vector v_A = v̂_A / ‖v̂_A‖, computed without overflow."""
    covariance.check(support)
    _check_point(support, point)
    A = _exponents(support)
    log_moduli = 0.5 * np.log(covariance.weights) + A @ point.p
    log_norm = 0.5 * logsumexp(2.0 * log_moduli)
    return np.exp(log_moduli - log_norm) * np.exp(1j * (A @ point.q))


def _dveronese_from(v: np.ndarray, A: np.ndarray) -> np.ndarray:
    mean = (np.abs(v) ** 2) @ A
    return v[:, None] * (A - mean)


def dveronese(
    support: Support,
    covariance: DiagonalCovariance,
    point: TorusPoint,
) -> np.ndarray:
    """Derivative of the unit Veronese map, complex M×n.

    `Dv_A = P_{v̂} Diag(v̂/‖v̂‖) A`, which simplifies to `Diag(v)(A − 1 ∇gᵀ)`.
    Columns are orthogonal to v̂.
    """
    v = veronese(support, covariance, point)
    return _dveronese_from(v, _exponents(support))


class KahlerFrame:
    """Cached Kähler data of one support at one point of the torus.

    <u>__Example usage:__</u>
    ```python
    frame = KahlerFrame(Support([0, 1]), DiagonalCovariance([1, 1]), TorusPoint([0]))
    frame.hessian        # [[0.5]]
    frame.norm_of([1])   # 0.5
    ```
    """

    def __init__(
        self,
        support: Support,
        covariance: DiagonalCovariance,
        point: TorusPoint,
    ):
        """Initialize the class."""
        covariance.check(support)
        _check_point(support, point)
        self.__support = support
        self.__covariance = covariance
        self.__point = point
        self.__v = veronese(support, covariance, point)
        self.__log_norm = float(potential(support, covariance, point.p))
        self.__dv = _dveronese_from(self.__v, _exponents(support))
        self.__hessian = hessian(support, covariance, point.p, require_full_dim=False)

    @property
    def support(self) -> Support:
        """The support."""
        return self.__support

    @property
    def covariance(self) -> DiagonalCovariance:
        """The covariance."""
        return self.__covariance

    @property
    def point(self) -> TorusPoint:
        """The base point."""
        return self.__point

    @property
    def v(self) -> np.ndarray:
        """The unit Veronese vector."""
        return self.__v

    @property
    def log_norm(self) -> float:
        """log ‖v̂_A‖, equal to the potential at p."""
        return self.__log_norm

    @property
    def veronese_hat(self) -> np.ndarray:
        """The unnormalized Veronese vector."""
        return self.__v * np.exp(self.__log_norm)

    @property
    def norm(self) -> float:
        """‖v̂_A‖."""
        return float(np.exp(self.__log_norm))

    @property
    def dv(self) -> np.ndarray:
        """Derivative of the unit Veronese map."""
        return self.__dv

    @property
    def hessian(self) -> np.ndarray:
        """D²g_A at p."""
        return self.__hessian

    @property
    def metric(self) -> np.ndarray:
        """The Hermitian metric ½D²g_A."""
        return 0.5 * self.__hessian

    @cached_property
    def cholesky(self) -> np.ndarray:
        """Upper triangular R with metric = RᵀR.

        Raises:
            InputError: If the metric is not positive definite.
        """
        try:
            lower = np.linalg.cholesky(self.metric)
        except np.linalg.LinAlgError:
            raise InputError("Metric is not positive definite (support not full dim)")
        return lower.T

    def inner(self, u, w) -> complex:
        """The Hermitian product uᴴ(½D²g_A)w."""
        u = np.asarray(u, dtype=np.complex128)
        w = np.asarray(w, dtype=np.complex128)
        return complex(np.conj(u) @ self.metric @ w)

    def norm_of(self, u) -> float:
        """The norm sqrt(uᴴ(½D²g_A)u), equal to ‖Dv_A u‖."""
        return float(np.sqrt(max(self.inner(u, u).real, 0.0)))

    def __repr__(self):
        """Repr."""
        return f"<KahlerFrame {self.support} at {self.point}>"


def norm_a(u, frame: KahlerFrame) -> float:
    """The Hermitian norm of the tangent vector *u* in *frame*."""
    return frame.norm_of(u)


def invert_momentum(
    support: Support,
    covariance: DiagonalCovariance,
    y,
    p0=None,
    tol: Optional[float] = None,
    max_iter: Optional[int] = None,
) -> np.ndarray:
    """Solve ∇g_A(p) = y by damped Newton on the convex g_A(p) − y·p.

    Args:
        support: A full dimensional support.
        covariance: The covariance.
        y: Target point in the interior of the Newton polytope.
        p0: Starting point (default: origin).
        tol: Tolerance on the momentum residual.
        max_iter: Newton iteration cap.

    Raises:
        InputError: If *y* is not in the open hull (checked for n <= 3).
        ConvergenceError: If the residual does not reach *tol*.
    """
    tol = NEWTON_TOL if tol is None else tol
    max_iter = NEWTON_MAX_ITER if max_iter is None else max_iter
    support.require_full_dim()
    y = np.asarray(y, dtype=np.float64)
    if y.shape != (support.n,):
        raise InputError(f"Target must have {support.n} coordinates, got {y.shape}")
    if support.n <= MAX_EXACT_DIM and support.hull().interior_distance(y) <= 0:
        raise InputError(f"Target {y.tolist()} is not inside the Newton polytope")
    p = np.zeros(support.n) if p0 is None else np.array(p0, dtype=np.float64)

    def merit(x):
        return float(potential(support, covariance, x) - y @ x)

    residual = np.inf
    for _ in range(max_iter):
        grad = momentum(support, covariance, p, require_full_dim=False) - y
        residual = float(np.linalg.norm(grad))
        if residual <= tol:
            return p
        step = -np.linalg.solve(
            hessian(support, covariance, p, require_full_dim=False), grad
        )
        if residual < 1e-6:
            p = p + step
            continue
        t = 1.0
        f0 = merit(p)
        slope = float(grad @ step)
        while merit(p + t * step) > f0 + 1e-4 * t * slope and t > 1e-12:
            t *= 0.5
        p = p + t * step
    raise ConvergenceError("Momentum inversion did not converge", residual=residual)


def invert_partial_momentum(
    support: Support,
    covariance: DiagonalCovariance,
    y,
    t,
    tol: Optional[float] = None,
    max_iter: Optional[int] = None,
) -> np.ndarray:
    """Solve the first n − 1 momentum equations with the last coordinate fixed.

    For each value of *t* finds x with `∂g_A/∂p_k(x, t) = y_k` for k < n, by
    damped Newton on the convex function `x ↦ g_A(x, t) − y·x`. The solution
    exists whenever y lies in the interior of the projection of the Newton
    polytope that drops the last coordinate.

    Args:
        support: A full dimensional support with n >= 2.
        covariance: The covariance.
        y: The n − 1 leading momentum coordinates.
        t: Values of the last coordinate p_n, shape (k,).
        tol: Tolerance on the residual of each equation system.
        max_iter: Newton iteration cap.

    Returns:
        Array of shape (k, n − 1).

    Raises:
        InputError: On a univariate support or mismatched shapes.
        ConvergenceError: If some residual does not reach *tol*.
    """
    tol = NEWTON_TOL if tol is None else tol
    max_iter = NEWTON_MAX_ITER if max_iter is None else max_iter
    support.require_full_dim()
    n = support.n
    if n < 2:
        raise InputError("Partial momentum inversion needs at least two variables")
    y = np.asarray(y, dtype=np.float64)
    if y.shape != (n - 1,):
        raise InputError(f"Target must have {n - 1} coordinates, got {y.shape}")
    t = np.atleast_1d(np.asarray(t, dtype=np.float64))
    x = np.zeros((t.size, n - 1))

    def points(x):
        return np.concatenate([x, t[:, None]], axis=1)

    def merit(x):
        return potential(support, covariance, points(x)) - x @ y

    residual = np.full(t.size, np.inf)
    for _ in range(max_iter):
        p = points(x)
        grad = momentum(support, covariance, p, require_full_dim=False)[:, :-1] - y
        residual = np.linalg.norm(grad, axis=1)
        if np.all(residual <= tol):
            return x
        h = hessian(support, covariance, p, require_full_dim=False)[:, :-1, :-1]
        step = -np.linalg.solve(h, grad[..., None])[..., 0]
        step[residual <= tol] = 0
        # Close to the solution merit differences drop below rounding
        searching = residual >= 1e-6
        scale = np.ones(t.size)
        f0 = merit(x)
        slope = np.sum(grad * step, axis=1)
        for _ in range(60):
            worse = searching & (
                merit(x + scale[:, None] * step) > f0 + 1e-4 * scale * slope
            )
            if not np.any(worse):
                break
            scale = np.where(worse, 0.5 * scale, scale)
        x = x + scale[:, None] * step
    raise ConvergenceError(
        "Partial momentum inversion did not converge", residual=float(residual.max())
    )
