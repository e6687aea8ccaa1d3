"""Tolerances, output options and logging switches.

Defaults ship with the package in `toricond/default_settings.toml`. A user
file `settings.toml` in the settings usr dir (see
`toricond.util.file.get_usr_dir`) overrides single entries. Entries missing
from the defaults, or whose type differs from the default, are ignored with a
warning.

Settings are read by their dotted path:
```python
from toricond.util import settings

tol = settings.get("quadrature.rel_tol")
```

Modules read their settings once at import into module constants, so changes
to the user file apply to new processes only.
"""
from typing import Any, Optional
from pathlib import Path
import warnings
from tomlkit.exceptions import TOMLKitError
from toricond.util import PACKAGE_DIR
from toricond.util.file import file_load, toml_loads, get_usr_dir


DEFAULTS_FILE = PACKAGE_DIR / "default_settings.toml"
USR_SETTINGS_FILE = get_usr_dir("settings") / "settings.toml"


def flatten(table: dict, prefix: tuple[str, ...] = ()) -> dict[str, Any]:
    """Nested tables to a flat dictionary keyed by dotted paths."""
    flat = {}
    for key, value in table.items():
        path = (*prefix, str(key))
        if isinstance(value, dict):
            flat |= flatten(value, path)
        else:
            flat[".".join(path)] = value
    return flat


def _compatible(default: Any, value: Any) -> bool:
    if isinstance(default, bool) or isinstance(value, bool):
        return isinstance(default, bool) and isinstance(value, bool)
    if isinstance(default, float):
        return isinstance(value, (int, float))
    return isinstance(value, type(default))


def load_settings(usr_file: Optional[Path] = None) -> dict[str, Any]:
    """The defaults with the entries of *usr_file* applied, by dotted path.

    Args:
        usr_file: The user settings file (default: `USR_SETTINGS_FILE`).
    """
    values = flatten(toml_loads(file_load(DEFAULTS_FILE)))
    usr_file = USR_SETTINGS_FILE if usr_file is None else Path(usr_file)
    if not usr_file.is_file():
        return values
    try:
        usr_values = flatten(toml_loads(file_load(usr_file)))
    except TOMLKitError as e:
        warnings.warn(f"Ignoring malformed settings file {usr_file}: {e}")
        return values
    for path, value in usr_values.items():
        if path not in values:
            warnings.warn(f'Unknown setting "{path}" (not in defaults)')
            continue
        default = values[path]
        if not _compatible(default, value):
            warnings.warn(
                f'Setting "{path}" expects {type(default).__name__}, '
                f"got {value!r}"
            )
            continue
        values[path] = float(value) if isinstance(default, float) else value
    return values


_SETTINGS = load_settings()


def get(setting_name: str) -> Any:
    """The value of the setting at the dotted path *setting_name*."""
    try:
        return _SETTINGS[setting_name]
    except KeyError:
        raise KeyError(f'Unknown setting "{setting_name}"') from None
