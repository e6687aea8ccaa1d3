"""Adaptive tensor Gauss–Legendre quadrature over boxes of ℝⁿ.

A panel is integrated twice: with one tensor rule over the whole panel and
with the same rule over its 2ⁿ halves. The difference is the panel error. The
panel with the largest error is split until the total error meets the
tolerance or the panel budget runs out.

Boxes with infinite bounds are truncated to a growing radius. Growth stops
once a caller supplied tail test passes (or, without one, once the value
settles). The last three truncations are then extrapolated with Aitken's
delta-squared step when their differences shrink geometrically.

<u>__Example usage:__</u>
```python
integrate(lambda x: np.exp(-np.sum(x**2, axis=-1)), [-np.inf] * 2, [np.inf] * 2)
# QuadratureResult(value=3.14159..., ...)
```
The integrand receives points of shape (k, n) and returns k values.
"""
from typing import Callable, NamedTuple, Optional
import heapq
import itertools
import math
import numpy as np
from toricond.util import settings
from toricond.api.logging import Logger
from toricond.logic import ConvergenceError, InputError


ORDER = settings.get("quadrature.order")
ABS_TOL = settings.get("quadrature.abs_tol")
REL_TOL = settings.get("quadrature.rel_tol")
MAX_PANELS = settings.get("quadrature.max_panels")
TRUNCATION_START = settings.get("quadrature.truncation_start")
TRUNCATION_STEP = settings.get("quadrature.truncation_step")
TRUNCATION_MAX = settings.get("quadrature.truncation_max")

Integrand = Callable[[np.ndarray], np.ndarray]
TailCheck = Callable[[np.ndarray, np.ndarray], bool]

log_numerics = Logger.channel("numerics")


class QuadratureResult(NamedTuple):
    """Value and error estimate of an integral."""

    value: float
    error: float
    panels: int
    """Number of panels of the final subdivision (summed over truncations)."""
    radius: Optional[float] = None
    """Truncation radius used for unbounded boxes."""


def tensor_rule(n: int, order: int) -> tuple[np.ndarray, np.ndarray]:
    """Tensor Gauss–Legendre nodes and weights on [0, 1]ⁿ."""
    x, w = np.polynomial.legendre.leggauss(order)
    x = 0.5 * (x + 1)
    w = 0.5 * w
    nodes = np.stack(np.meshgrid(*[x] * n, indexing="ij"), axis=-1).reshape(-1, n)
    weights = np.prod(
        np.stack(np.meshgrid(*[w] * n, indexing="ij"), axis=-1).reshape(-1, n),
        axis=1,
    )
    return nodes, weights


def _children(lo: np.ndarray, hi: np.ndarray) -> list[tuple[np.ndarray, np.ndarray]]:
    mid = 0.5 * (lo + hi)
    children = []
    for corner in itertools.product((0, 1), repeat=lo.size):
        corner = np.array(corner, dtype=bool)
        children.append((np.where(corner, mid, lo), np.where(corner, hi, mid)))
    return children


class _Panels:
    """Evaluates panels with one batched integrand call each."""

    def __init__(self, func: Integrand, n: int, order: int):
        self.func = func
        self.nodes, self.weights = tensor_rule(n, order)

    def rule(self, boxes: list[tuple[np.ndarray, np.ndarray]]) -> np.ndarray:
        lo = np.array([b[0] for b in boxes])
        width = np.array([b[1] - b[0] for b in boxes])
        points = lo[:, None, :] + width[:, None, :] * self.nodes[None, :, :]
        values = np.asarray(self.func(points.reshape(-1, lo.shape[1])))
        values = values.reshape(len(boxes), -1)
        return (values @ self.weights) * np.prod(width, axis=1)

    def estimate(self, lo: np.ndarray, hi: np.ndarray) -> tuple[float, float]:
        """Refined value of a panel and its error estimate."""
        children = _children(lo, hi)
        values = self.rule([(lo, hi)] + children)
        fine = math.fsum(values[1:])
        return fine, abs(fine - values[0])


def integrate_box(
    func: Integrand,
    lo,
    hi,
    abs_tol: Optional[float] = None,
    rel_tol: Optional[float] = None,
    max_panels: Optional[int] = None,
    order: Optional[int] = None,
) -> QuadratureResult:
    """Integrate *func* over the finite box [lo, hi].

    Raises:
        InputError: On infinite or reversed bounds.
        ConvergenceError: If the tolerance is not met within *max_panels*.
    """
    abs_tol = ABS_TOL if abs_tol is None else abs_tol
    rel_tol = REL_TOL if rel_tol is None else rel_tol
    max_panels = MAX_PANELS if max_panels is None else max_panels
    order = ORDER if order is None else order
    lo = np.atleast_1d(np.asarray(lo, dtype=np.float64))
    hi = np.atleast_1d(np.asarray(hi, dtype=np.float64))
    finite = np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))
    if lo.shape != hi.shape or not finite:
        raise InputError(f"Expected a finite box, got {lo} to {hi}")
    if np.any(lo > hi):
        raise InputError(f"Box bounds are reversed: {lo} > {hi}")
    if np.any(lo == hi):
        return QuadratureResult(0.0, 0.0, 0)
    panels = _Panels(func, lo.size, order)
    counter = itertools.count()
    value, error = panels.estimate(lo, hi)
    heap = [(-error, next(counter), lo, hi, value)]
    total_value, total_error = value, error
    while total_error > max(abs_tol, rel_tol * abs(total_value)):
        if len(heap) >= max_panels:
            raise ConvergenceError(
                f"Quadrature did not converge within {max_panels} panels",
                residual=total_error,
            )
        neg_error, _, p_lo, p_hi, p_value = heapq.heappop(heap)
        total_value -= p_value
        total_error += neg_error
        for c_lo, c_hi in _children(p_lo, p_hi):
            c_value, c_error = panels.estimate(c_lo, c_hi)
            heapq.heappush(heap, (-c_error, next(counter), c_lo, c_hi, c_value))
            total_value += c_value
            total_error += c_error
    value = math.fsum(item[4] for item in heap)
    error = math.fsum(-item[0] for item in heap)
    return QuadratureResult(value, error, len(heap))


def truncate_box(lo, hi, radius: float) -> tuple[np.ndarray, np.ndarray]:
    """Replace infinite bounds by ±radius, keeping at least a width of radius."""
    lo = np.array(lo, dtype=np.float64)
    hi = np.array(hi, dtype=np.float64)
    for k in range(lo.size):
        if not np.isfinite(lo[k]):
            lo[k] = min(-radius, hi[k] - radius) if np.isfinite(hi[k]) else -radius
        if not np.isfinite(hi[k]):
            hi[k] = max(radius, lo[k] + radius)
    return lo, hi


def aitken(values: tuple[float, float, float]) -> float:
    """Aitken's extrapolation of three values with shrinking same-sign steps.

    Returns the last value unchanged when the steps do not shrink
    geometrically.
    """
    a, b, c = values
    d1 = b - a
    d2 = c - b
    if d1 == 0 or d2 == 0 or np.sign(d1) != np.sign(d2) or abs(d2) >= abs(d1):
        return c
    return c - d2 * d2 / (d2 - d1)


def integrate(
    func: Integrand,
    lo,
    hi,
    tail_check: Optional[TailCheck] = None,
    abs_tol: Optional[float] = None,
    rel_tol: Optional[float] = None,
    max_panels: Optional[int] = None,
    order: Optional[int] = None,
) -> QuadratureResult:
    """Integrate *func* over the box [lo, hi], bounds possibly infinite.

    Args:
        func: Vectorized integrand.
        lo: Lower bounds.
        hi: Upper bounds.
        tail_check: Called with a truncated box; returning True ends the
            growth of the truncation radius. Without it growth ends when
            consecutive truncations agree to the tolerance.
        abs_tol: Absolute tolerance.
        rel_tol: Relative tolerance.
        max_panels: Panel budget per truncation.
        order: Gauss–Legendre order per coordinate.

    Raises:
        ConvergenceError: If a truncation does not converge or the radius
            reaches `quadrature.truncation_max` first.
    """
    abs_tol = ABS_TOL if abs_tol is None else abs_tol
    rel_tol = REL_TOL if rel_tol is None else rel_tol
    lo = np.atleast_1d(np.asarray(lo, dtype=np.float64))
    hi = np.atleast_1d(np.asarray(hi, dtype=np.float64))
    if np.any(np.isnan(lo)) or np.any(np.isnan(hi)) or np.any(lo > hi):
        raise InputError(f"Invalid box {lo} to {hi}")
    options = dict(
        abs_tol=abs_tol, rel_tol=rel_tol, max_panels=max_panels, order=order
    )
    if np.all(np.isfinite(lo)) and np.all(np.isfinite(hi)):
        return integrate_box(func, lo, hi, **options)

    def at(radius: float) -> QuadratureResult:
        return integrate_box(func, *truncate_box(lo, hi, radius), **options)

    radius = TRUNCATION_START
    history = [at(radius)]
    while True:
        if tail_check is not None:
            done = tail_check(*truncate_box(lo, hi, radius))
        elif len(history) >= 2:
            change = abs(history[-1].value - history[-2].value)
            done = change <= max(abs_tol, rel_tol * abs(history[-1].value))
        else:
            done = False
        if done:
            break
        if radius + TRUNCATION_STEP > TRUNCATION_MAX:
            residual = (
                abs(history[-1].value - history[-2].value)
                if len(history) >= 2
                else history[-1].error
            )
            raise ConvergenceError(
                f"Truncation radius reached {TRUNCATION_MAX}", residual=residual
            )
        radius += TRUNCATION_STEP
        history.append(at(radius))
    log_numerics(f"Truncated unbounded box at radius {radius}")
    while len(history) < 3:
        radius += TRUNCATION_STEP
        history.append(at(radius))
    last = history[-3:]
    value = aitken(tuple(r.value for r in last))
    error = abs(value - last[-1].value) + last[-1].error
    panels = sum(r.panels for r in last)
    return QuadratureResult(value, error, panels, radius)
