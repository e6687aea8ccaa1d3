"""Project paths and small shared helpers."""
from pathlib import Path


PACKAGE_DIR: Path = Path(__file__).resolve().parent.parent
"""The `toricond` package directory."""
PROJ_DIR: Path = PACKAGE_DIR.parent
"""The project root (the source checkout when installed from source)."""
INSTALLED_FROM_SOURCE: bool = (PROJ_DIR / "pyproject.toml").is_file() and (
    PROJ_DIR / "tests"
).is_dir()
"""If running from a source checkout, which enables the developer commands."""

assert (PACKAGE_DIR / "default_settings.toml").is_file()
