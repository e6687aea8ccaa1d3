"""The experiment subcommands of the command line tool.

Every subcommand reads a run configuration (see `toricond.run.config`),
computes its results and writes two files to the output directory:

- `<command>.csv`: one row per ε, root, region or box, with fixed columns per
  subcommand and a leading `schema_version` column.
- `<command>.json`: a summary, the PASS/FAIL verdict of checks and the full
  resolved config.

The output directory is `--out`, else the `TORICOND_OUT` environment variable,
else `settings.get("output.directory")`.

Exit codes: 0 success, 1 unknown subcommand, 2 invalid config or input,
3 numerical non-convergence, 4 a check or tolerance failed.
"""
from typing import Callable, NamedTuple, Optional
import os
import math
import argparse
from pathlib import Path
import numpy as np
from toricond.util import settings
from toricond.util.file import csv_dump, json_dump, format_value
from toricond.util.time import pingpong
from toricond.api.logging import logger
from toricond.logic import (
    Field,
    ConfigError,
    ConvergenceError,
    DegenerateSystemError,
    InputError,
)
from toricond.logic.prng import SeedStream
from toricond.logic.supports import MAX_EXACT_DIM, mixed_volume_oracle
from toricond.logic.randsys import sample
from toricond.logic.conditioning import (
    condition_bounds,
    condition_sweep,
    distance_to_sigma,
    kappa_over_region,
)
from toricond.logic.volume import (
    expected_roots,
    kac_rice_real_roots,
    mixed_volume_integral,
    real_roots_bound,
)
from toricond.logic.rootfind import all_roots
from toricond.logic import experiments
from toricond.run.config import COMMANDS, RunConfig, load_config


SCHEMA_VERSION = settings.get("output.schema_version")
FLOAT_DIGITS = settings.get("output.float_digits")
OUTPUT_DIR = settings.get("output.directory")
OUTPUT_ENV_VAR = settings.get("output.env_var")
MIXED_VOLUME_TOL = 0.01
PUSHFORWARD_TOL = 1e-3
GRADIENT_TOL = 1e-6
HESSIAN_TOL = 1e-5
INVERSION_TOL = 1e-6

EXIT_OK = 0
EXIT_UNKNOWN_COMMAND = 1
EXIT_INVALID = 2
EXIT_NUMERICS = 3
EXIT_FAILED = 4

TAIL_COLUMNS = ("eps", "estimate", "stderr", "lower", "upper", "trials", "discarded")
CHECK_COLUMNS = (*TAIL_COLUMNS, "rhs", "rhs_upper", "slack", "passed")


class CommandResult(NamedTuple):
    """Output of a subcommand."""

    columns: tuple[str, ...]
    rows: list[tuple]
    summary: dict
    passed: Optional[bool] = None
    """Verdict of checks, None for plain computations."""


def _tail_row(eps: float, report: experiments.TrialReport) -> tuple:
    return (
        eps,
        report.estimate,
        report.stderr,
        report.lower,
        report.upper,
        report.trials,
        report.discarded_degenerate,
    )


def _check_row(row: experiments.CheckRow) -> tuple:
    return (
        *_tail_row(row.eps, row.lhs),
        row.rhs,
        row.rhs_upper,
        row.slack,
        row.passed,
    )


def _vector(values) -> str:
    return " ".join(format_value(float(x), FLOAT_DIGITS) for x in values)


def _require_unmixed(config: RunConfig):
    if not config.ensemble.is_unmixed:
        raise ConfigError(f"{config.command} needs an unmixed ensemble", "ensemble")


def run_mixed_volume(config: RunConfig) -> CommandResult:
    """Mixed volume by quadrature next to the exact oracle."""
    ensemble = config.ensemble.with_field(Field.COMPLEX)
    result = mixed_volume_integral(ensemble, config.abs_tol, config.rel_tol)
    oracle = math.nan
    rel_err = math.nan
    if ensemble.n <= MAX_EXACT_DIM:
        oracle = float(mixed_volume_oracle(*ensemble.supports))
        rel_err = abs(result.value - oracle) / oracle if oracle else math.nan
    passed = None if math.isnan(rel_err) else rel_err <= MIXED_VOLUME_TOL
    row = (result.value, result.error, oracle, rel_err, result.panels)
    summary = dict(zip(("integral", "error", "oracle", "rel_err", "panels"), row))
    return CommandResult(
        ("integral", "error", "oracle", "rel_err", "panels"), [row], summary, passed
    )


def run_expect_roots(config: RunConfig) -> CommandResult:
    """Expected roots in the region, by quadrature and by Monte Carlo.

    Complex ensembles integrate the mixed density. Real ensembles report the
    Kac–Rice integral of unmixed ensembles next to the Monte Carlo count.
    """
    ensemble = config.ensemble
    region = config.region
    summary = {"field": ensemble.field.name.lower()}
    quadrature = (math.nan, math.nan)
    if ensemble.field is Field.COMPLEX:
        result = expected_roots(ensemble, region, config.abs_tol, config.rel_tol)
        quadrature = (result.value, result.error)
    elif ensemble.is_unmixed:
        result = kac_rice_real_roots(
            ensemble, region, config.orthant, config.abs_tol, config.rel_tol
        )
        quadrature = (result.value, result.error)
        if region.is_p_bounded and not region.is_empty:
            summary["real_roots_bound"] = real_roots_bound(ensemble, region)
    report = None
    if config.trials and ensemble.n <= experiments.MAX_ROOTFIND_DIM:
        if ensemble.field is Field.COMPLEX:
            report = experiments.estimate_expected_roots(
                ensemble, region, config.trials, config.seed, config.threads
            )
        else:
            report = experiments.estimate_expected_real_roots(
                ensemble,
                region,
                config.trials,
                config.seed,
                config.orthant,
                config.threads,
            )
    mc = (math.nan, math.nan, 0, 0)
    if report is not None:
        mc = (
            report.estimate,
            report.stderr,
            report.trials,
            report.discarded_degenerate,
        )
    columns = (
        "quadrature",
        "error",
        "mc_estimate",
        "mc_stderr",
        "mc_trials",
        "discarded",
    )
    row = (*quadrature, *mc)
    summary |= dict(zip(columns, row))
    return CommandResult(columns, [row], summary)


def run_condition(config: RunConfig) -> CommandResult:
    """Condition bounds at every root and the restricted condition over the region.

    The system is the configured one, or the first system drawn from the seed.
    """
    ensemble = config.ensemble
    system = config.system
    if system is None:
        system = sample(ensemble, SeedStream(config.seed).rng(0))
    system.check(ensemble)
    rows = []
    if ensemble.n <= experiments.MAX_ROOTFIND_DIM:
        roots = all_roots(system, ensemble)
        for index, root in enumerate(roots):
            bounds = condition_bounds(system, ensemble, root)
            rows.append(
                (
                    index,
                    _vector(root.p),
                    _vector(root.q),
                    config.region.contains(root),
                    distance_to_sigma(system, ensemble, root),
                    bounds.lower,
                    bounds.upper,
                )
            )
    summary = {"system": system.export(), "roots": len(rows)}
    if not config.region.is_empty:
        sweep = condition_sweep(system, ensemble, config.region)
        summary["restricted_condition"] = sweep.value
        summary["restricted_location"] = (
            None if sweep.location is None else sweep.location.tolist()
        )
        summary["sweep_evaluations"] = sweep.evaluations
        if ensemble.full_dim:
            summary["kappa"] = kappa_over_region(ensemble, config.region)
    columns = ("root", "p", "q", "in_region", "distance", "lower", "upper")
    return CommandResult(columns, rows, summary)


def run_nu_lin(config: RunConfig) -> CommandResult:
    """Tail probabilities of the condition number of random linear systems."""
    distances, discarded = experiments.linear_distances(
        config.ensemble.n,
        config.trials,
        config.seed,
        config.ensemble.field,
        config.threads,
    )
    rows = [
        _tail_row(
            eps,
            experiments.proportion_report(
                [d < eps for d in distances], config.seed, discarded
            ),
        )
        for eps in config.eps
    ]
    return CommandResult(TAIL_COLUMNS, rows, {"n": config.ensemble.n})


def run_nu_sparse(config: RunConfig) -> CommandResult:
    """Tail probabilities of the condition of roots in the region."""
    distances, discarded = experiments.root_distances(
        config.ensemble, config.region, config.trials, config.seed, config.threads
    )
    rows = []
    for eps in config.eps:
        report = experiments.proportion_report(
            [d < eps for d in distances], config.seed, discarded
        )
        sweep = (math.nan, math.nan)
        if config.sweep:
            swept = experiments.estimate_nu_A_sweep(
                config.ensemble,
                config.region,
                eps,
                config.trials,
                config.seed,
                threads=config.threads,
            )
            sweep = (swept.estimate, swept.upper)
        rows.append((*_tail_row(eps, report), *sweep))
    columns = (*TAIL_COLUMNS, "sweep_estimate", "sweep_upper")
    return CommandResult(columns, rows, {"sweep": config.sweep})


def _check_result(rows: list[experiments.CheckRow], summary: dict) -> CommandResult:
    return CommandResult(
        CHECK_COLUMNS,
        [_check_row(r) for r in rows],
        {**summary, "rows": [r.export() for r in rows]},
        all(r.passed for r in rows),
    )


def run_check_thm1(config: RunConfig) -> CommandResult:
    """Tail of the condition of roots against the ε⁴ bound."""
    _require_unmixed(config)
    support, covariance = config.ensemble.items[0]
    rows = experiments.check_thm1(
        support, config.eps, config.trials, config.seed, covariance, config.threads
    )
    return _check_result(rows, {})


def run_check_thm3(config: RunConfig) -> CommandResult:
    """Mean positive real roots against the volume bound."""
    row = experiments.check_thm3(
        config.ensemble, config.region, config.trials, config.seed, config.threads
    )
    return _check_result([row], {})


def run_check_thm5(config: RunConfig) -> CommandResult:
    """Sparse tail against the dilated linear tail."""
    rows = [
        experiments.check_thm5(
            config.ensemble,
            config.region,
            eps,
            config.trials,
            config.seed,
            config.threads,
        )
        for eps in config.eps
    ]
    return _check_result(rows, {})


def run_check_thm6(config: RunConfig) -> CommandResult:
    """Real tail against expected real roots times the real linear tail."""
    _require_unmixed(config)
    support, covariance = config.ensemble.items[0]
    rows = [
        experiments.check_thm6(
            support,
            covariance,
            config.region,
            eps,
            config.trials,
            config.seed,
            config.threads,
        )
        for eps in config.eps
    ]
    return _check_result(rows, {})


def run_momentum_check(config: RunConfig) -> CommandResult:
    """Momentum map checks of the first support of the ensemble."""
    support, covariance = config.ensemble.items[0]
    report = experiments.check_momentum(
        support, covariance, config.boxes, config.samples, config.seed
    )
    rows = [
        (_vector(lo), _vector(hi), computed, expected, error)
        for (lo, hi), (computed, expected), error in zip(
            config.boxes, report.pushforward, report.pushforward_errors
        )
    ]
    passed = (
        report.interior_fraction == 1
        and report.midpoint_failures == 0
        and report.inversion_error <= INVERSION_TOL
        and report.gradient_error <= GRADIENT_TOL
        and report.hessian_error <= HESSIAN_TOL
        and all(e <= PUSHFORWARD_TOL for e in report.pushforward_errors)
    )
    columns = ("lo", "hi", "computed", "expected", "rel_err")
    return CommandResult(columns, rows, report.export(), passed)


COMMAND_FUNCTIONS: dict[str, Callable[[RunConfig], CommandResult]] = {
    "mixed-volume": run_mixed_volume,
    "expect-roots": run_expect_roots,
    "condition": run_condition,
    "nu-lin": run_nu_lin,
    "nu-sparse": run_nu_sparse,
    "check-thm1": run_check_thm1,
    "check-thm3": run_check_thm3,
    "check-thm5": run_check_thm5,
    "check-thm6": run_check_thm6,
    "momentum-check": run_momentum_check,
}
assert set(COMMAND_FUNCTIONS) == set(COMMANDS)


def resolve_output_dir(out: Optional[str] = None) -> Path:
    """The output directory: *out*, the environment variable or the setting."""
    if out:
        return Path(out)
    env_value = os.environ.get(OUTPUT_ENV_VAR)
    if env_value:
        return Path(env_value)
    return Path(OUTPUT_DIR)


def write_outputs(
    config: RunConfig, result: CommandResult, out_dir: Path
) -> tuple[Path, Path]:
    """Write the CSV rows and the JSON summary of a command."""
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_file = out_dir / f"{config.command}.csv"
    json_file = out_dir / f"{config.command}.json"
    csv_dump(
        csv_file,
        ("schema_version", *result.columns),
        [(SCHEMA_VERSION, *row) for row in result.rows],
        FLOAT_DIGITS,
    )
    json_dump(
        json_file,
        {
            "schema_version": SCHEMA_VERSION,
            "command": config.command,
            "passed": result.passed,
            "summary": _plain(result.summary),
            "config": config.export(),
        },
    )
    return csv_file, json_file


def _plain(data):
    """Numpy scalars and arrays to plain python values."""
    if isinstance(data, dict):
        return {k: _plain(v) for k, v in data.items()}
    if isinstance(data, (list, tuple)):
        return [_plain(v) for v in data]
    if isinstance(data, np.ndarray):
        return _plain(data.tolist())
    if isinstance(data, np.generic):
        return data.item()
    return data


def execute(config: RunConfig, out: Optional[str] = None) -> int:
    """Run a validated config, write its outputs and return the exit code."""
    try:
        with pingpong(config.command, logger=logger):
            result = COMMAND_FUNCTIONS[config.command](config)
    except InputError as e:
        logger(f"Invalid input: {e}")
        return EXIT_INVALID
    except (ConvergenceError, DegenerateSystemError) as e:
        logger(f"Numerical failure: {e}")
        return EXIT_NUMERICS
    csv_file, json_file = write_outputs(config, result, resolve_output_dir(out))
    logger(f"Wrote {csv_file} and {json_file}")
    if result.passed is False:
        logger(f"{config.command}: FAIL")
        return EXIT_FAILED
    if result.passed:
        logger(f"{config.command}: PASS")
    return EXIT_OK


def _parser(prog: str, description: str, config_required: bool = False):
    parser = argparse.ArgumentParser(prog=prog, description=description)
    parser.add_argument(
        "--config",
        required=config_required,
        default=None,
        help="path or name of a run config (default: the builtin example)",
    )
    parser.add_argument("--seed", type=int, default=None, help="seed of the trials")
    parser.add_argument("--trials", type=int, default=None, help="number of trials")
    parser.add_argument("--threads", type=int, default=None, help="worker threads")
    parser.add_argument(
        "--out",
        default=None,
        help=f"output directory (default: ${OUTPUT_ENV_VAR} or {OUTPUT_DIR})",
    )
    return parser


def _main(command: Optional[str], args, config_required: bool) -> int:
    prog = f"toricond {command or 'run'}"
    description = (
        COMMAND_FUNCTIONS[command].__doc__.splitlines()[0]
        if command
        else "Run the command named in a config."
    )
    parsed = _parser(prog, description, config_required).parse_args(args)
    overrides = {
        "seed": parsed.seed,
        "trials": parsed.trials,
        "threads": parsed.threads,
    }
    try:
        config = load_config(parsed.config, command, overrides)
    except InputError as e:
        logger(f"Invalid config: {e}")
        return EXIT_INVALID
    return execute(config, parsed.out)


def entry_point_command(command: str) -> Callable[[list[str]], int]:
    """The entry point of a single subcommand."""

    def entry_point(args) -> int:
        return _main(command, args, config_required=False)

    entry_point.__doc__ = f"Entry point of the {command} subcommand."
    return entry_point


def entry_point_run(args) -> int:
    """Entry point of the run subcommand (the command is read from the config)."""
    return _main(None, args, config_required=True)
