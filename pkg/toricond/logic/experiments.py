"""Monte Carlo estimates of tail probabilities and root counts, and bound checks.

Every estimate is a deterministic function of its inputs, the seed and the
number of trials. Trial t draws from `SeedStream.rng(t)`, so results do not
depend on the number of worker threads. Sub-experiments (the two sides of an
inequality) draw from spawned child streams.

Trials whose system is flagged degenerate by the root finder are discarded
and counted in `TrialReport.discarded_degenerate`.

<u>__Example usage:__</u>
```python
report = estimate_nu_lin(2, eps=0.1, trials=1000, seed=7)
report.estimate, report.interval
rows = check_thm1(Support.segment(2), [0.1, 0.2], trials=10_000, seed=7)
all(row.passed for row in rows)
```
"""
from typing import Callable, NamedTuple, Optional, Sequence, TypeVar, Union
from concurrent.futures import ThreadPoolExecutor
import math
import numpy as np
from scipy.stats import norm, ortho_group, unitary_group
from toricond.util import settings
from toricond.util.time import pingpong
from toricond.api.logging import Logger
from toricond.logic import Field, InputError, ConvergenceError, DegenerateSystemError
from toricond.logic.prng import SeedStream
from toricond.logic.supports import Support
from toricond.logic.kahler import (
    DiagonalCovariance,
    TorusPoint,
    hessian,
    invert_momentum,
    momentum,
    potential,
)
from toricond.logic.randsys import Ensemble, Region, SparseSystem, sample
from toricond.logic.conditioning import (
    distance_to_sigma,
    kappa_over_region,
    restricted_condition,
)
from toricond.logic.volume import (
    expected_roots,
    momentum_pushforward_volume,
    real_roots_bound,
)
from toricond.logic.rootfind import (
    RootList,
    all_roots,
    count_roots_in_region,
    real_roots,
)


THREADS = settings.get("experiments.threads")
CONFIDENCE = settings.get("experiments.confidence")
FIBER_GRID = settings.get("experiments.fiber_grid")
FIBER_TRIALS = settings.get("experiments.fiber_trials")
PROGRESS_EVERY = settings.get("experiments.progress_every")
MAX_ROOTFIND_DIM = 2
# Finite difference step of the momentum derivative checks
FD_STEP = 1e-5
# Largest momentum error of an inverted midpoint
ROUND_TRIP_TOL = 1e-9

T = TypeVar("T")
Seed = Union[int, SeedStream]

log_experiments = Logger.channel("experiments")


class TrialReport(NamedTuple):
    """A Monte Carlo estimate with its confidence interval."""

    estimate: float
    stderr: float
    """Sample standard deviation over √trials."""
    trials: int
    """Trials that were not discarded."""
    interval: tuple[float, float]
    """Wilson interval for probabilities, normal interval for means."""
    seed: int
    discarded_degenerate: int = 0

    @property
    def lower(self) -> float:
        """Lower end of the confidence interval."""
        return self.interval[0]

    @property
    def upper(self) -> float:
        """Upper end of the confidence interval."""
        return self.interval[1]

    def export(self) -> dict:
        """Export to a serializable dictionary."""
        return {
            "estimate": self.estimate,
            "stderr": self.stderr,
            "trials": self.trials,
            "lower": self.lower,
            "upper": self.upper,
            "seed": self.seed,
            "discarded_degenerate": self.discarded_degenerate,
        }


class CheckRow(NamedTuple):
    """One line of a bound check: an empirical left side against a bound."""

    eps: float
    lhs: TrialReport
    rhs: float
    """The bound (its point estimate when it is itself estimated)."""
    rhs_upper: float
    """Upper confidence end of the bound (equal to *rhs* for exact bounds)."""
    passed: bool
    details: Optional[dict] = None

    @property
    def slack(self) -> float:
        """Bound minus estimate; positive when the estimate is below the bound."""
        return self.rhs - self.lhs.estimate

    def export(self) -> dict:
        """Export to a flat serializable dictionary."""
        return {
            "eps": self.eps,
            **{f"lhs_{k}": v for k, v in self.lhs.export().items()},
            "rhs": self.rhs,
            "rhs_upper": self.rhs_upper,
            "slack": self.slack,
            "passed": self.passed,
            **(self.details or {}),
        }


class MomentumReport(NamedTuple):
    """Numerical checks of the momentum map of one support."""

    samples: int
    interior_fraction: float
    """Fraction of sampled momentum values strictly inside the hull."""
    min_interior_distance: float
    inversion_error: float
    """Largest |p − (∇g)⁻¹(∇g(p))| over the samples."""
    midpoint_failures: int
    """Momentum midpoints ½(∇g(p) + ∇g(p')) that did not invert to a round trip."""
    midpoint_error: float
    """Largest |∇g(x) − m| over the inverted midpoints m."""
    gradient_error: float
    """Largest relative error of ∇g against central differences of g."""
    hessian_error: float
    """Largest relative error of D²g against central differences of ∇g."""
    pushforward: tuple[tuple[float, float], ...]
    """(computed, πⁿ λ(V)) per momentum box."""

    @property
    def pushforward_errors(self) -> tuple[float, ...]:
        """Relative errors of the pushforward volumes."""
        return tuple(abs(c - e) / e for c, e in self.pushforward)

    def export(self) -> dict:
        """Export to a serializable dictionary."""
        data = self._asdict()
        data["pushforward"] = [list(pair) for pair in self.pushforward]
        data["pushforward_errors"] = list(self.pushforward_errors)
        return data


def _stream(seed: Seed) -> SeedStream:
    return seed if isinstance(seed, SeedStream) else SeedStream(seed)


def _z_value(confidence: float) -> float:
    return float(norm.ppf(0.5 + confidence / 2))


def wilson_interval(
    successes: int, trials: int, confidence: Optional[float] = None
) -> tuple[float, float]:
    """Wilson score interval of a binomial proportion."""
    if trials == 0:
        return 0.0, 1.0
    z = _z_value(CONFIDENCE if confidence is None else confidence)
    phat = successes / trials
    denominator = 1 + z * z / trials
    center = (phat + z * z / (2 * trials)) / denominator
    half = (
        z
        * math.sqrt(phat * (1 - phat) / trials + z * z / (4 * trials * trials))
        / denominator
    )
    return max(0.0, min(center - half, phat)), min(1.0, max(center + half, phat))


def proportion_report(
    events: Sequence[bool], seed: int, discarded: int = 0
) -> TrialReport:
    """Report of the frequency of *events*."""
    trials = len(events)
    successes = int(sum(events))
    estimate = successes / trials if trials else 0.0
    stderr = math.sqrt(estimate * (1 - estimate) / trials) if trials else 0.0
    interval = wilson_interval(successes, trials)
    return TrialReport(estimate, stderr, trials, interval, seed, discarded)


def mean_report(values: Sequence[float], seed: int, discarded: int = 0) -> TrialReport:
    """Report of the mean of *values* with a normal confidence interval."""
    values = np.asarray(values, dtype=np.float64)
    trials = values.size
    if trials == 0:
        return TrialReport(math.nan, math.nan, 0, (math.nan, math.nan), seed, discarded)
    estimate = float(values.mean())
    stderr = float(values.std(ddof=1) / math.sqrt(trials)) if trials > 1 else 0.0
    half = _z_value(CONFIDENCE) * stderr
    interval = (estimate - half, estimate + half)
    return TrialReport(estimate, stderr, trials, interval, seed, discarded)


def run_trials(
    trial: Callable[[np.random.Generator], T],
    trials: int,
    seed: Seed,
    threads: Optional[int] = None,
    description: str = "trials",
) -> list[T]:
    """Run *trial* on the generators 0..trials−1 of the seed stream.

    Results are returned in trial order whatever the number of *threads*.
    """
    if trials < 0:
        raise InputError(f"Number of trials must be non-negative, got {trials}")
    stream = _stream(seed)
    threads = THREADS if threads is None else max(1, int(threads))

    def one(t: int) -> T:
        result = trial(stream.rng(t))
        if PROGRESS_EVERY and (t + 1) % PROGRESS_EVERY == 0:
            log_experiments(f"{description}: {t + 1} of {trials} trials done")
        return result

    with pingpong(f"{trials} {description}", logger=log_experiments):
        if threads == 1:
            return [one(t) for t in range(trials)]
        with ThreadPoolExecutor(max_workers=threads) as executor:
            return list(executor.map(one, range(trials)))


def _split(results: Sequence[Optional[T]]) -> tuple[list[T], int]:
    kept = [r for r in results if r is not None]
    return kept, len(results) - len(kept)


def _linear_root(f: SparseSystem, n: int) -> Optional[TorusPoint]:
    """The root of an affine linear system, None if it leaves the torus."""
    raw = np.array([np.asarray(c) for c in f])
    try:
        x = np.linalg.solve(raw[:, 1 : n + 1], -raw[:, 0])
    except np.linalg.LinAlgError:
        return None
    if np.any(x == 0) or not np.all(np.isfinite(x)):
        return None
    return TorusPoint.from_zeta(x)


def linear_distances(
    n: int,
    trials: int,
    seed: Seed,
    field: Union[Field, str] = Field.COMPLEX,
    threads: Optional[int] = None,
) -> tuple[list[float], int]:
    """Distances d_P(f, Σ) at the root of sampled linear systems.

    Returns the distances and the number of discarded trials.
    """
    ensemble = Ensemble.linear(n, field)

    def trial(rng: np.random.Generator) -> Optional[float]:
        f = sample(ensemble, rng)
        root = _linear_root(f, n)
        if root is None:
            return None
        try:
            return distance_to_sigma(f, ensemble, root)
        except InputError:
            return None

    return _split(run_trials(trial, trials, seed, threads, "linear systems"))


def estimate_nu_lin(
    n: int,
    eps: float,
    trials: int,
    seed: Seed,
    field: Union[Field, str] = Field.COMPLEX,
    threads: Optional[int] = None,
) -> TrialReport:
    """Probability that the condition number of a random linear system exceeds 1/ε.

    Args:
        n: Number of variables.
        eps: The threshold ε > 0.
        trials: Number of sampled systems.
        seed: Seed of the trials.
        field: "complex" for ν^Lin, "real" for its real counterpart. See
            `estimate_nu_fiber` for the tails of sparse supports.
        threads: Worker threads.
    """
    if eps <= 0:
        raise InputError(f"Threshold must be positive, got {eps}")
    distances, discarded = linear_distances(n, trials, seed, field, threads)
    return proportion_report(
        [d < eps for d in distances], _stream(seed).seed, discarded
    )


def _gaussian(shape, field: Field, rng: np.random.Generator) -> np.ndarray:
    z = rng.standard_normal(shape)
    if field is Field.COMPLEX:
        z = z + 1j * rng.standard_normal(shape)
    return z


def weighted_square(n: int, field: Field, rng: np.random.Generator) -> np.ndarray:
    """An n×n Gaussian matrix drawn with density proportional to |det|^β.

    β is 1 for real and 2 for complex entries, the weight a root puts on the
    derivative part of its fiber. Entries follow `sample`. The QR factors are
    independent: Q is Haar distributed and R upper triangular with standard
    entries above a χ distributed diagonal.
    """
    beta = 1 if field is Field.REAL else 2
    r = np.triu(_gaussian((n, n), field, rng), 1)
    r[np.diag_indices(n)] = np.sqrt(rng.chisquare(beta * (n + 1 - np.arange(n))))
    if n == 1:
        return r
    group = ortho_group if field is Field.REAL else unitary_group
    return group.rvs(n, random_state=rng) @ r


def fiber_distances(
    n: int,
    extra: Union[int, Sequence[int]],
    trials: int,
    seed: Seed,
    field: Union[Field, str] = Field.COMPLEX,
    threads: Optional[int] = None,
) -> list[float]:
    """Distances to the discriminant of the fiber part of a system at its root.

    The derivative part G is a `weighted_square` and equation i has *extra*
    further Gaussian coefficients hᵢ outside the tangent space, so the
    distance is `σ_min(G / D)` with `Dᵢ = (‖Gᵢ‖² + ‖hᵢ‖²)^½`. With no extra
    coefficients this is the law of the distance at the root of a linear system.
    """
    field = Field.parse(field)
    extras = np.asarray(extra, dtype=np.int64)
    if extras.ndim == 0:
        extras = np.full(n, int(extras))
    if extras.shape != (n,) or np.any(extras < 0):
        raise InputError(f"Expected {n} non-negative extra coefficient counts: {extra}")
    beta = 1 if field is Field.REAL else 2

    def trial(rng: np.random.Generator) -> float:
        g = weighted_square(n, field, rng)
        rest = np.array([rng.chisquare(beta * k) if k else 0.0 for k in extras])
        norms = np.sqrt(np.sum(np.abs(g) ** 2, axis=1) + rest)
        return float(np.linalg.svd(g / norms[:, None], compute_uv=False)[-1])

    return run_trials(trial, trials, seed, threads, "fibers")


def estimate_nu_fiber(
    n: int,
    eps: float,
    trials: int,
    seed: Seed,
    extra: Union[int, Sequence[int]] = 0,
    field: Union[Field, str] = Field.COMPLEX,
    threads: Optional[int] = None,
) -> TrialReport:
    """Probability that a root weighted fiber lies within ε of the discriminant.

    This is the tail of the condition number at a root of an ensemble whose
    equation i has n + 1 + extra[i] monomials, in the frame where its
    coefficients are standard. Zero *extra* gives ν^Lin, or its real
    counterpart, without sampling linear systems.

    Args:
        n: Number of variables.
        eps: The threshold ε > 0.
        trials: Number of sampled fibers.
        seed: Seed of the trials.
        extra: Coefficients per equation outside the derivative part, one
            count for all equations or one per equation.
        field: "complex" or "real".
        threads: Worker threads.
    """
    if eps <= 0:
        raise InputError(f"Threshold must be positive, got {eps}")
    distances = fiber_distances(n, extra, trials, seed, field, threads)
    return proportion_report([d < eps for d in distances], _stream(seed).seed)


def _roots_of(f: SparseSystem, ensemble: Ensemble) -> Optional[RootList]:
    """Roots of *f*, real positive ones for real ensembles; None if degenerate."""
    try:
        roots = all_roots(f, ensemble)
    except DegenerateSystemError:
        return None
    if roots.degenerate:
        return None
    if ensemble.field is Field.REAL:
        roots = real_roots(f, ensemble, "positive", roots)
    return roots


def _require_rootfind(ensemble: Ensemble, region: Region):
    if ensemble.n > MAX_ROOTFIND_DIM:
        raise InputError(f"Root based estimates need n <= {MAX_ROOTFIND_DIM}")
    if region.n != ensemble.n:
        raise InputError(f"Region has {region.n} coordinates, ensemble {ensemble.n}")
    ensemble.require_full_dim()


def root_distances(
    ensemble: Ensemble,
    region: Region,
    trials: int,
    seed: Seed,
    threads: Optional[int] = None,
) -> tuple[list[float], int]:
    """Per trial, the least d_P(f, Σ_{(p,q)}) over the roots of f in *region*.

    Trials without roots in the region give inf. Real ensembles use their
    positive real roots.
    """
    _require_rootfind(ensemble, region)

    def trial(rng: np.random.Generator) -> Optional[float]:
        f = sample(ensemble, rng)
        roots = _roots_of(f, ensemble)
        if roots is None:
            return None
        distances = [
            distance_to_sigma(f, ensemble, r) for r in roots if region.contains(r)
        ]
        return min(distances, default=math.inf)

    return _split(run_trials(trial, trials, seed, threads, "sparse systems"))


def estimate_nu_A(
    ensemble: Ensemble,
    region: Region,
    eps: float,
    trials: int,
    seed: Seed,
    threads: Optional[int] = None,
) -> TrialReport:
    """Probability that some root in *region* has condition number above 1/ε.

    Only roots are inspected; see `estimate_nu_A_sweep` for the variant that
    also searches fiber points that are not roots.
    """
    if eps <= 0:
        raise InputError(f"Threshold must be positive, got {eps}")
    stream = _stream(seed)
    if region.is_empty:
        return proportion_report([False] * trials, stream.seed)
    distances, discarded = root_distances(ensemble, region, trials, stream, threads)
    return proportion_report([d < eps for d in distances], stream.seed, discarded)


def estimate_nu_A_sweep(
    ensemble: Ensemble,
    region: Region,
    eps: float,
    trials: int,
    seed: Seed,
    grid_points: Optional[int] = None,
    threads: Optional[int] = None,
) -> TrialReport:
    """Like `estimate_nu_A`, also counting fiber points of a coarse grid of *region*.

    A trial is an event when a root in the region or a grid point of the
    restricted condition sweep comes within ε of the discriminant.
    """
    if eps <= 0:
        raise InputError(f"Threshold must be positive, got {eps}")
    stream = _stream(seed)
    if region.is_empty:
        return proportion_report([False] * trials, stream.seed)
    _require_rootfind(ensemble, region)
    grid = FIBER_GRID if grid_points is None else grid_points

    def trial(rng: np.random.Generator) -> Optional[bool]:
        f = sample(ensemble, rng)
        roots = _roots_of(f, ensemble)
        if roots is None:
            return None
        if any(
            distance_to_sigma(f, ensemble, r) < eps
            for r in roots
            if region.contains(r)
        ):
            return True
        return restricted_condition(f, ensemble, region, grid, 0) > 1 / eps

    events, discarded = _split(run_trials(trial, trials, stream, threads, "sweeps"))
    return proportion_report(events, stream.seed, discarded)


def estimate_expected_roots(
    ensemble: Ensemble,
    region: Region,
    trials: int,
    seed: Seed,
    threads: Optional[int] = None,
) -> TrialReport:
    """Mean number of complex roots in *region*."""
    stream = _stream(seed)
    _require_rootfind(ensemble, region)
    ensemble = ensemble.with_field(Field.COMPLEX)

    def trial(rng: np.random.Generator) -> Optional[int]:
        f = sample(ensemble, rng)
        roots = _roots_of(f, ensemble)
        return None if roots is None else count_roots_in_region(roots, region)

    counts, discarded = _split(run_trials(trial, trials, stream, threads, "systems"))
    return mean_report(counts, stream.seed, discarded)


def estimate_expected_real_roots(
    ensemble: Ensemble,
    region: Region,
    trials: int,
    seed: Seed,
    orthant: str = "positive",
    threads: Optional[int] = None,
) -> TrialReport:
    """Mean number of real roots in *region*.

    Args:
        ensemble: The ensemble; coefficients are drawn real.
        region: Real roots have angles 0 or π, so regions restricting angles
            select orthants.
        trials: Number of sampled systems.
        seed: Seed of the trials.
        orthant: "positive" or "all" (see `toricond.logic.rootfind.real_roots`).
        threads: Worker threads.
    """
    stream = _stream(seed)
    ensemble = ensemble.with_field(Field.REAL)
    if region.is_empty:
        return mean_report([0.0] * trials, stream.seed)
    _require_rootfind(ensemble, region)

    def trial(rng: np.random.Generator) -> Optional[int]:
        f = sample(ensemble, rng)
        try:
            roots = all_roots(f, ensemble)
        except DegenerateSystemError:
            return None
        if roots.degenerate:
            return None
        return count_roots_in_region(real_roots(f, ensemble, orthant, roots), region)

    counts, discarded = _split(
        run_trials(trial, trials, stream, threads, "real systems")
    )
    return mean_report(counts, stream.seed, discarded)


def thm1_bound(support: Support, eps: float) -> float:
    """n³(n+1) Vol(A) (#A−1)(#A−2) ε⁴, the tail bound for unmixed ensembles."""
    n = support.n
    m = support.size
    return float(n**3 * (n + 1) * support.normalized_volume() * (m - 1) * (m - 2)) * (
        eps**4
    )


def check_thm1(
    support: Support,
    eps_grid: Sequence[float],
    trials: int,
    seed: Seed,
    covariance: Optional[DiagonalCovariance] = None,
    threads: Optional[int] = None,
) -> list[CheckRow]:
    """Compare the probability of an ill-conditioned root with its ε⁴ bound.

    A row passes when the upper confidence end of the probability is below
    the bound.
    """
    support.require_full_dim()
    ensemble = Ensemble.unmixed(support, covariance)
    region = Region.full(support.n)
    stream = _stream(seed)
    distances, discarded = root_distances(ensemble, region, trials, stream, threads)
    rows = []
    for eps in eps_grid:
        if eps <= 0:
            raise InputError(f"Threshold must be positive, got {eps}")
        lhs = proportion_report([d < eps for d in distances], stream.seed, discarded)
        bound = thm1_bound(support, eps)
        rows.append(CheckRow(eps, lhs, bound, bound, lhs.upper <= bound))
    return rows


def check_thm3(
    ensemble: Ensemble,
    region: Region,
    trials: int,
    seed: Seed,
    threads: Optional[int] = None,
) -> CheckRow:
    """Compare the mean number of positive real roots with its volume bound.

    Passes when the estimate is at most the bound plus two standard errors.
    """
    ensemble = ensemble.with_field(Field.REAL)
    lhs = estimate_expected_real_roots(ensemble, region, trials, seed, threads=threads)
    bound = real_roots_bound(ensemble, region)
    passed = lhs.estimate <= bound + 2 * lhs.stderr
    return CheckRow(math.nan, lhs, bound, bound, passed)


def _fiber_trials(trials: int, fiber_trials: Optional[int]) -> int:
    return max(trials, FIBER_TRIALS) if fiber_trials is None else fiber_trials


def check_thm5(
    ensemble: Ensemble,
    region: Region,
    eps: float,
    trials: int,
    seed: Seed,
    threads: Optional[int] = None,
    fiber_trials: Optional[int] = None,
) -> CheckRow:
    """Compare ν^A(U, ε) with the fiber tail at the dilated threshold √κ_U ε.

    The right side is the ratio of expected root counts of the ensemble and of
    the linear ensemble over U, times the tail of `estimate_nu_fiber` with the
    monomials of every support beyond n + 1 as extra coefficients. When every
    support has n + 1 monomials the tail is ν^Lin(n, √κ_U ε). The row passes
    when the estimate of ν^A(U, ε) is at most the upper confidence end of the
    right side. The tail uses *fiber_trials* samples, by default *trials* and
    at least `experiments.fiber_trials`.
    """
    stream = _stream(seed)
    n = ensemble.n
    lhs = estimate_nu_A(ensemble, region, eps, trials, stream.spawn(0), threads)
    complex_ensemble = ensemble.with_field(Field.COMPLEX)
    linear = Ensemble.linear(n)
    ratio = (
        expected_roots(complex_ensemble, region).value
        / expected_roots(linear, region).value
    )
    kappa = kappa_over_region(ensemble, region)
    extra = [size - n - 1 for size in ensemble.sizes]
    nu = estimate_nu_fiber(
        n,
        math.sqrt(kappa) * eps,
        _fiber_trials(trials, fiber_trials),
        stream.spawn(1),
        extra,
        ensemble.field,
        threads,
    )
    rhs = ratio * nu.estimate
    rhs_upper = ratio * nu.upper
    details = {"ratio": ratio, "kappa": kappa, "nu_fiber": nu.estimate}
    return CheckRow(eps, lhs, rhs, rhs_upper, lhs.estimate <= rhs_upper, details)


def check_thm6(
    support: Support,
    covariance: Optional[DiagonalCovariance],
    region: Region,
    eps: float,
    trials: int,
    seed: Seed,
    threads: Optional[int] = None,
    fiber_trials: Optional[int] = None,
) -> CheckRow:
    """Compare the real tail probability with E(U) ν_ℝ(n, ε) for an unmixed support.

    E(U) is the Monte Carlo mean of positive real roots in U. ν_ℝ is the real
    `estimate_nu_fiber` with the #A − n − 1 monomials outside the derivative
    part as extra coefficients. Passes as in `check_thm5`.
    """
    stream = _stream(seed)
    ensemble = Ensemble.unmixed(support, covariance, Field.REAL)
    lhs = estimate_nu_A(ensemble, region, eps, trials, stream.spawn(0), threads)
    expected = estimate_expected_real_roots(
        ensemble, region, trials, stream.spawn(1), threads=threads
    )
    nu_real = estimate_nu_fiber(
        support.n,
        eps,
        _fiber_trials(trials, fiber_trials),
        stream.spawn(2),
        support.size - support.n - 1,
        Field.REAL,
        threads,
    )
    rhs = expected.estimate * nu_real.estimate
    rhs_upper = max(expected.upper, 0.0) * nu_real.upper
    details = {"expected_real_roots": expected.estimate, "nu_real": nu_real.estimate}
    return CheckRow(eps, lhs, rhs, rhs_upper, lhs.estimate <= rhs_upper, details)


def _relative(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.max(np.abs(a - b)) / max(np.max(np.abs(b)), 1.0))


def check_momentum(
    support: Support,
    covariance: Optional[DiagonalCovariance],
    boxes: Sequence[tuple],
    samples: int,
    seed: Seed,
    spread: float = 3.0,
) -> MomentumReport:
    """Check the momentum map of *support* on random points p ∈ [−spread, spread]ⁿ."""
    if samples < 1:
        raise InputError(f"Momentum checks need at least one sample, got {samples}")
    support.require_full_dim()
    if covariance is None:
        covariance = DiagonalCovariance.identity(support.size)
    n = support.n
    rng = _stream(seed).rng(0)
    hull = support.hull()
    p = rng.uniform(-spread, spread, size=(samples, n))
    y = momentum(support, covariance, p)
    interior = hull.interior_distance(y)
    inversion = max(
        (
            float(np.max(np.abs(invert_momentum(support, covariance, yk) - pk)))
            for pk, yk in zip(p, y)
        ),
        default=0.0,
    )
    other = rng.uniform(-spread, spread, size=(samples, n))
    midpoints = 0.5 * (y + momentum(support, covariance, other))
    failures = 0
    midpoint_error = 0.0
    for target in midpoints:
        try:
            x = invert_momentum(support, covariance, target)
        except (InputError, ConvergenceError):
            failures += 1
            continue
        error = float(np.max(np.abs(momentum(support, covariance, x) - target)))
        if error > ROUND_TRIP_TOL:
            failures += 1
        midpoint_error = max(midpoint_error, error)
    step = FD_STEP * np.eye(n)
    fd_grad = np.stack(
        [
            (
                potential(support, covariance, p + step[k])
                - potential(support, covariance, p - step[k])
            )
            / (2 * FD_STEP)
            for k in range(n)
        ],
        axis=-1,
    )
    fd_hess = np.stack(
        [
            (
                momentum(support, covariance, p + step[k])
                - momentum(support, covariance, p - step[k])
            )
            / (2 * FD_STEP)
            for k in range(n)
        ],
        axis=-1,
    )
    pushforward = []
    for lo, hi in boxes:
        lam = float(np.prod(np.asarray(hi, float) - np.asarray(lo, float)))
        computed = momentum_pushforward_volume(support, covariance, [(lo, hi)])
        pushforward.append((computed, np.pi**n * lam))
    return MomentumReport(
        samples=samples,
        interior_fraction=float(np.mean(interior > 0)),
        min_interior_distance=float(np.min(interior)),
        inversion_error=inversion,
        midpoint_failures=failures,
        midpoint_error=midpoint_error,
        gradient_error=_relative(fd_grad, y),
        hessian_error=_relative(fd_hess, hessian(support, covariance, p)),
        pushforward=tuple(pushforward),
    )
