"""Run configurations for the command line tool.

A run configuration is a TOML document. Every subcommand ships with a builtin
example in `toricond/configs`, and user configs may be placed in the usr dir
(see `toricond.util.file.get_usr_dir`). A config argument is either a path or
the name of a builtin or user config.

```toml
command = "check-thm1"
seed = 7
trials = 10000
eps = [0.1, 0.2, 0.3]

[ensemble]
field = "complex"
supports = [[0, 1, 2]]      # a flat list is a univariate support
unmixed = true              # repeat the single support n times
# covariances = [[1.0, 2.0, 1.0]] or ["kostlan 2"] or ["identity"]
# kostlan = { n = 1, degree = 4 }
# linear = 2

[region]
boxes = [{ p_lo = [-inf], p_hi = [0.0] }]  # q_lo / q_hi optional

[quadrature]
abs_tol = 1e-9
rel_tol = 1e-7
```

Validation failures raise `toricond.logic.ConfigError` carrying the dotted
path of the offending entry.
"""
from typing import Any, Optional
from dataclasses import dataclass
from pathlib import Path
import numpy as np
from tomlkit.exceptions import TOMLKitError
from toricond.util import PACKAGE_DIR
from toricond.util.file import file_load, toml_loads, get_usr_dir
from toricond.logic import Field, ConfigError, InputError
from toricond.logic.prng import SeedStream
from toricond.logic.supports import Support
from toricond.logic.kahler import DiagonalCovariance
from toricond.logic.randsys import (
    Ensemble,
    Region,
    SparseSystem,
    multinomial_weights,
)


COMMANDS = (
    "mixed-volume",
    "expect-roots",
    "condition",
    "nu-lin",
    "nu-sparse",
    "check-thm1",
    "check-thm3",
    "check-thm5",
    "check-thm6",
    "momentum-check",
)
BUILTIN_CONFIGS_DIR = PACKAGE_DIR / "configs"
USR_CONFIGS_DIR = get_usr_dir("configs")
TOP_LEVEL_KEYS = {
    "command",
    "seed",
    "trials",
    "threads",
    "eps",
    "orthant",
    "sweep",
    "ensemble",
    "region",
    "quadrature",
    "momentum",
    "system",
}
DEFAULT_TRIALS = 1000
DEFAULT_EPS = (0.1,)


@dataclass(frozen=True)
class RunConfig:
    """A validated run configuration."""

    command: str
    """The subcommand, one of `COMMANDS`."""
    ensemble: Ensemble
    region: Region
    """The region U (the whole torus unless given)."""
    eps: tuple[float, ...]
    """Thresholds ε of tail probabilities."""
    trials: int
    seed: int
    threads: int
    abs_tol: Optional[float] = None
    rel_tol: Optional[float] = None
    orthant: str = "positive"
    """Orthants counted by real root estimates."""
    sweep: bool = False
    """Also run the fiber sweep variant of `nu-sparse`."""
    samples: int = 1000
    """Random samples of `momentum-check`."""
    boxes: tuple = ()
    """Momentum boxes (lo, hi) of `momentum-check`."""
    system: Optional[SparseSystem] = None
    """A fixed system for `condition` (sampled from the seed otherwise)."""
    source: str = ""
    """Where the config was loaded from."""

    def export(self) -> dict:
        """The full resolved config as a serializable dictionary."""
        return {
            "command": self.command,
            "source": self.source,
            "seed": self.seed,
            "trials": self.trials,
            "threads": self.threads,
            "eps": list(self.eps),
            "orthant": self.orthant,
            "sweep": self.sweep,
            "ensemble": self.ensemble.export(),
            "region": self.region.export(),
            "quadrature": {"abs_tol": self.abs_tol, "rel_tol": self.rel_tol},
            "momentum": {
                "samples": self.samples,
                "boxes": [
                    {"lo": list(lo), "hi": list(hi)} for lo, hi in self.boxes
                ],
            },
            "system": None if self.system is None else self.system.export(),
        }


def resolve_config_path(name: str) -> Path:
    """The file of a config given by path or by builtin or user config name."""
    path = Path(name)
    if path.is_file():
        return path
    stem = path.stem if path.suffix == ".toml" else name
    for directory in (USR_CONFIGS_DIR, BUILTIN_CONFIGS_DIR):
        candidate = directory / f"{stem}.toml"
        if candidate.is_file():
            return candidate
    raise ConfigError(f'No config file or builtin config named "{name}"', "config")


def builtin_configs() -> list[str]:
    """Names of the builtin configs."""
    return sorted(p.stem for p in BUILTIN_CONFIGS_DIR.glob("*.toml"))


def load_config(
    name: Optional[str] = None,
    command: Optional[str] = None,
    overrides: Optional[dict] = None,
) -> RunConfig:
    """Load and validate a run configuration.

    Args:
        name: Path or name of the config (default: the builtin config of
            *command*).
        command: The subcommand; overrides the `command` entry of the file.
        overrides: Values taking priority over the file (seed, trials, threads).

    Raises:
        ConfigError: If the config cannot be found, parsed or validated.
    """
    if name is None:
        if command is None:
            raise ConfigError("Either a config or a command is required", "config")
        name = command
    path = resolve_config_path(name)
    try:
        data = toml_loads(file_load(path))
    except TOMLKitError as e:
        raise ConfigError(f"Malformed TOML in {path}: {e}", "config")
    return parse_config(data, command, overrides, source=str(path))


def parse_config(
    data: dict,
    command: Optional[str] = None,
    overrides: Optional[dict] = None,
    source: str = "",
) -> RunConfig:
    """Validate a config document (see the module documentation)."""
    data = {**data, **{k: v for k, v in (overrides or {}).items() if v is not None}}
    unknown = set(data) - TOP_LEVEL_KEYS
    if unknown:
        raise ConfigError(f"Unknown keys {sorted(unknown)}", sorted(unknown)[0])
    command = command or data.get("command")
    if command not in COMMANDS:
        raise ConfigError(
            f'Unknown command "{command}", expected one of {COMMANDS}', "command"
        )
    seed = data.get("seed")
    seed = SeedStream.get_random_seed() if seed is None else _int(seed, "seed", 0)
    trials = _int(data.get("trials", DEFAULT_TRIALS), "trials", 0)
    threads = _int(data.get("threads", 1), "threads", 1)
    eps = tuple(_float_list(data.get("eps", list(DEFAULT_EPS)), "eps", positive=True))
    orthant = data.get("orthant", "positive")
    if orthant not in ("positive", "all"):
        raise ConfigError('Expected "positive" or "all"', "orthant")
    sweep = data.get("sweep", False)
    if not isinstance(sweep, bool):
        raise ConfigError("Expected true or false", "sweep")
    ensemble = parse_ensemble(_table(data.get("ensemble"), "ensemble"))
    region = parse_region(data.get("region"), ensemble.n)
    quadrature = _table(data.get("quadrature", {}), "quadrature")
    _no_unknown(quadrature, {"abs_tol", "rel_tol"}, "quadrature")
    abs_tol = _optional_float(quadrature.get("abs_tol"), "quadrature.abs_tol")
    rel_tol = _optional_float(quadrature.get("rel_tol"), "quadrature.rel_tol")
    samples, boxes = _parse_momentum(data.get("momentum", {}), ensemble.n)
    system = _parse_system(data.get("system"), ensemble)
    return RunConfig(
        command=command,
        ensemble=ensemble,
        region=region,
        eps=eps,
        trials=trials,
        seed=seed,
        threads=threads,
        abs_tol=abs_tol,
        rel_tol=rel_tol,
        orthant=orthant,
        sweep=sweep,
        samples=samples,
        boxes=boxes,
        system=system,
        source=source,
    )


def parse_ensemble(data: dict, path: str = "ensemble") -> Ensemble:
    """Build an ensemble from its config table."""
    _no_unknown(
        data, {"field", "supports", "covariances", "unmixed", "kostlan", "linear"}, path
    )
    try:
        field = Field.parse(data.get("field", "complex"))
    except InputError as e:
        raise ConfigError(str(e), f"{path}.field")
    kinds = [k for k in ("supports", "kostlan", "linear") if k in data]
    if len(kinds) != 1:
        raise ConfigError(
            'Exactly one of "supports", "kostlan" or "linear" is required', path
        )
    if "linear" in data:
        return Ensemble.linear(_int(data["linear"], f"{path}.linear", 1), field)
    if "kostlan" in data:
        table = _table(data["kostlan"], f"{path}.kostlan")
        _no_unknown(table, {"n", "degree"}, f"{path}.kostlan")
        n = _int(table.get("n"), f"{path}.kostlan.n", 1)
        degree = _int(table.get("degree"), f"{path}.kostlan.degree", 1)
        return Ensemble.kostlan(n, degree, field)
    supports = data["supports"]
    if not isinstance(supports, list) or not supports:
        raise ConfigError("Expected a non-empty list of supports", f"{path}.supports")
    supports = [
        _support(s, f"{path}.supports[{i}]") for i, s in enumerate(supports)
    ]
    unmixed = data.get("unmixed", False)
    if unmixed:
        if len(supports) != 1:
            raise ConfigError("Unmixed ensembles take one support", f"{path}.supports")
        supports = supports * supports[0].n
    covariances = data.get("covariances")
    if covariances is None:
        covariances = ["identity"] * len(supports)
    elif not isinstance(covariances, list):
        raise ConfigError("Expected a list", f"{path}.covariances")
    elif unmixed and len(covariances) == 1:
        covariances = covariances * len(supports)
    items = []
    for i, support in enumerate(supports):
        entry_path = f"{path}.covariances[{i}]"
        if i >= len(covariances):
            raise ConfigError("Missing covariance entry", entry_path)
        items.append((support, _covariance(covariances[i], support, entry_path)))
    if len(covariances) > len(supports):
        raise ConfigError("More covariances than supports", f"{path}.covariances")
    try:
        return Ensemble(items, field)
    except InputError as e:
        raise ConfigError(str(e), path)


def parse_region(data: Any, n: int, path: str = "region") -> Region:
    """Build a region from its config table (the whole torus when *data* is None)."""
    if data is None:
        return Region.full(n)
    data = _table(data, path)
    _no_unknown(data, {"full", "empty", "boxes"}, path)
    if data.get("full", False):
        return Region.full(n)
    if data.get("empty", False):
        return Region.empty(n)
    boxes = data.get("boxes")
    if not isinstance(boxes, list):
        raise ConfigError("Expected a list of boxes", f"{path}.boxes")
    parsed = []
    for i, box in enumerate(boxes):
        box_path = f"{path}.boxes[{i}]"
        box = _table(box, box_path)
        _no_unknown(box, {"p_lo", "p_hi", "q_lo", "q_hi"}, box_path)
        bounds = []
        for key in ("p_lo", "p_hi", "q_lo", "q_hi"):
            value = box.get(key)
            if value is None:
                if key.startswith("p"):
                    raise ConfigError("Missing bound", f"{box_path}.{key}")
                bounds.append(None)
                continue
            bounds.append(
                _float_list(value, f"{box_path}.{key}", length=n, finite=False)
            )
        parsed.append(tuple(bounds))
    try:
        return Region(n, parsed)
    except InputError as e:
        raise ConfigError(str(e), f"{path}.boxes")


def _parse_momentum(data: Any, n: int) -> tuple[int, tuple]:
    data = _table(data, "momentum")
    _no_unknown(data, {"samples", "boxes"}, "momentum")
    samples = _int(data.get("samples", 1000), "momentum.samples", 1)
    boxes = []
    for i, box in enumerate(data.get("boxes", [])):
        box_path = f"momentum.boxes[{i}]"
        box = _table(box, box_path)
        _no_unknown(box, {"lo", "hi"}, box_path)
        lo = _float_list(box.get("lo"), f"{box_path}.lo", length=n)
        hi = _float_list(box.get("hi"), f"{box_path}.hi", length=n)
        boxes.append((tuple(lo), tuple(hi)))
    return samples, tuple(boxes)


def _parse_system(data: Any, ensemble: Ensemble) -> Optional[SparseSystem]:
    if data is None:
        return None
    data = _table(data, "system")
    _no_unknown(data, {"real", "imag"}, "system")
    real = data.get("real")
    if not isinstance(real, list) or len(real) != ensemble.n:
        raise ConfigError(f"Expected {ensemble.n} coefficient lists", "system.real")
    imag = data.get("imag")
    coeffs = []
    for i, size in enumerate(ensemble.sizes):
        re = np.array(_float_list(real[i], f"system.real[{i}]", length=size))
        if imag is None:
            coeffs.append(re)
            continue
        if not isinstance(imag, list) or len(imag) != ensemble.n:
            raise ConfigError(f"Expected {ensemble.n} coefficient lists", "system.imag")
        im = np.array(_float_list(imag[i], f"system.imag[{i}]", length=size))
        coeffs.append(re + 1j * im)
    return SparseSystem(coeffs)


def _support(value: Any, path: str) -> Support:
    if not isinstance(value, list) or not value:
        raise ConfigError("Expected a non-empty list of exponents", path)
    if all(isinstance(v, list) for v in value):
        if not all(isinstance(x, int) for row in value for x in row):
            raise ConfigError("Exponents must be integers", path)
    elif not all(isinstance(x, int) and not isinstance(x, bool) for x in value):
        raise ConfigError("Exponents must be integers", path)
    try:
        return Support(value)
    except (InputError, ValueError) as e:
        raise ConfigError(str(e), path)


def _covariance(value: Any, support: Support, path: str) -> DiagonalCovariance:
    if value == "identity":
        return DiagonalCovariance.identity(support.size)
    if isinstance(value, str):
        parts = value.split()
        if len(parts) != 2 or parts[0] != "kostlan" or not parts[1].isdigit():
            message = f'Expected "identity" or "kostlan d", got "{value}"'
            raise ConfigError(message, path)
        try:
            return multinomial_weights(support, int(parts[1]))
        except InputError as e:
            raise ConfigError(str(e), path)
    weights = _float_list(value, path, length=support.size, positive=True)
    return DiagonalCovariance(weights)


def _table(value: Any, path: str) -> dict:
    if not isinstance(value, dict):
        raise ConfigError("Expected a table", path)
    return value


def _no_unknown(table: dict, allowed: set[str], path: str):
    unknown = sorted(set(table) - allowed)
    if unknown:
        raise ConfigError(f"Unknown keys {unknown}", f"{path}.{unknown[0]}")


def _int(value: Any, path: str, minimum: Optional[int] = None) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"Expected an integer, got {value!r}", path)
    if minimum is not None and value < minimum:
        raise ConfigError(f"Expected at least {minimum}, got {value}", path)
    return int(value)


def _optional_float(value: Any, path: str) -> Optional[float]:
    if value is None:
        return None
    return _float_list([value], path, positive=True)[0]


def _float_list(
    value: Any,
    path: str,
    length: Optional[int] = None,
    positive: bool = False,
    finite: bool = True,
) -> list[float]:
    if not isinstance(value, list):
        raise ConfigError(f"Expected a list of numbers, got {value!r}", path)
    if length is not None and len(value) != length:
        raise ConfigError(f"Expected {length} numbers, got {len(value)}", path)
    numbers = []
    for i, x in enumerate(value):
        if isinstance(x, bool) or not isinstance(x, (int, float)):
            raise ConfigError(f"Expected a number, got {x!r}", f"{path}[{i}]")
        x = float(x)
        if x != x or (finite and not np.isfinite(x)):
            raise ConfigError(f"Expected a finite number, got {x}", f"{path}[{i}]")
        if positive and not x > 0:
            raise ConfigError(f"Expected a positive number, got {x}", f"{path}[{i}]")
        numbers.append(x)
    return numbers
