"""Reading and writing text, TOML, CSV and JSON files.

Output files must be byte-identical for identical results, so floats are
always rendered by `format_value` with a fixed number of significant digits.
"""
from typing import Any, Iterable, Sequence
import csv
import json
import os
import platform
import subprocess
from pathlib import Path
import tomlkit


def toml_loads(string: str) -> dict:
    """Parse TOML into plain python containers.

    Raises:
        tomlkit.exceptions.TOMLKitError: On malformed input.
    """
    # unwrap() drops tomlkit's format-preserving item types (inf stays a float)
    return tomlkit.loads(string).unwrap()


def file_load(file: os.PathLike) -> str:
    """The text content of *file*."""
    return Path(file).read_text(encoding="utf-8")


def file_dump(file: os.PathLike, text: str):
    """Write *text* to *file*, replacing any previous content."""
    Path(file).write_text(text, encoding="utf-8")


def format_value(value: Any, digits: int = 17) -> str:
    """Render a value for machine-readable output.

    Booleans are "true" or "false" and floats have *digits* significant digits.
    """
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return format(value, f".{digits}g")
    return str(value)


def csv_dump(
    file: os.PathLike,
    columns: Sequence[str],
    rows: Iterable[Sequence[Any]],
    digits: int = 17,
):
    """Write *rows* to *file* as CSV with a fixed header of *columns*."""
    with open(file, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            assert len(row) == len(columns)
            writer.writerow([format_value(v, digits) for v in row])


def json_dump(file: os.PathLike, data: dict):
    """Write *data* to *file* as indented JSON.

    Non-finite floats are written as the strings "inf", "-inf" and "nan".
    """
    file_dump(file, json.dumps(_json_safe(data), indent=2) + "\n")


def _json_safe(data):
    if isinstance(data, dict):
        return {str(k): _json_safe(v) for k, v in data.items()}
    if isinstance(data, (list, tuple)):
        return [_json_safe(v) for v in data]
    if isinstance(data, float) and not (data == data and abs(data) != float("inf")):
        return str(data)
    return data


def popen_path(path: os.PathLike):
    """Open *path* with the default application of the platform."""
    system = platform.system()
    if system == "Windows":
        os.startfile(path)
        return
    opener = "open" if system == "Darwin" else "xdg-open"
    subprocess.Popen([opener, str(path)])


def get_usr_dir(dir_name: str) -> Path:
    r"""The per-user data directory *dir_name* of toricond (not created).

    - Windows: `~\AppData\Local\toricond\dir_name`
    - Mac OS: `~/Library/toricond/dir_name`
    - Linux: `~/.local/share/toricond/dir_name`
    """
    system = platform.system()
    if system == "Windows":
        base = Path.home() / "AppData" / "Local"
    elif system == "Darwin":
        base = Path.home() / "Library"
    else:
        base = Path.home() / ".local" / "share"
    return base / "toricond" / dir_name
