"""Developer checks: the integration test suite and code formatting.

Requires installing from source with the dev extras (see
`toricond.guides.contributing`).

```noformat
toricond test --help
toricond format --help
```

The suite runs these checks, selectable by name:

- `unit`: the [pytest](https://pytest.org) modules in `tests/` with a
  [hypothesis](https://hypothesis.readthedocs.io/en/latest/) profile from
  `UNITTEST_PROFILES`. Profiles have no deadline since a single example may
  run a quadrature or a root finder.
- `lint`: [flake8](https://flake8.pycqa.org/) with the google docstring
  convention of flake8-docstrings.
- `format`: the [Black](https://github.com/psf/black) formatter in check mode.
  `toricond format` applies it.
- `configs`: every builtin config in `toricond/configs` loads, validates and
  names its own subcommand.
- `docs`: the pdoc3 build finishes without warnings (see
  `toricond.util.docs.test_docs`).
"""
from typing import Callable, NamedTuple, Optional
import argparse
import subprocess
import sys
from hypothesis import Verbosity
from toricond.util import PACKAGE_DIR, PROJ_DIR
from toricond.util.docs import test_docs


TESTS_DIR = PROJ_DIR / "tests"
SOURCE_DIRS = (PACKAGE_DIR, TESTS_DIR)
LINE_LENGTH = 88
MAX_COMPLEXITY = 15
# Black puts whitespace before ':' in slices
FLAKE8_IGNORE = ("E203",)
BLACK_TARGET = "py39"
UNITTEST_PROFILES = {
    "sample": dict(max_examples=1, deadline=None),
    "dev": dict(max_examples=10, deadline=None),
    "debug": dict(max_examples=10, deadline=None, verbosity=Verbosity.verbose),
    "normal": dict(max_examples=50, deadline=None, verbosity=Verbosity.normal),
    "ci": dict(max_examples=200, deadline=None, verbosity=Verbosity.quiet),
}


class Check(NamedTuple):
    """A named check of the suite."""

    description: str
    run: Callable[["SuiteOptions"], bool]


class SuiteOptions(NamedTuple):
    """Options of the unit test check."""

    profile: str = "dev"
    keyword: Optional[str] = None
    module_filter: Optional[str] = None


def entry_point_tests(args) -> int:
    """Script entry point of the test subcommand."""
    parser = argparse.ArgumentParser(
        prog="toricond test",
        description="Run the integration test suite.",
    )
    parser.add_argument(
        "checks",
        nargs="*",
        metavar="CHECK",
        help=f"checks to run, any of: {', '.join(CHECKS)} (default: all)",
    )
    parser.add_argument(
        "-p",
        "--profile",
        default="dev",
        choices=list(UNITTEST_PROFILES),
        help="hypothesis profile of the unit tests (default: dev)",
    )
    parser.add_argument(
        "-k",
        "--keyword",
        default=None,
        help="pytest -k expression selecting unit tests",
    )
    parser.add_argument(
        "-u",
        "--modules",
        default=None,
        help="run only test modules whose path contains this string",
    )
    args = parser.parse_args(args)
    unknown = [c for c in args.checks if c not in CHECKS]
    if unknown:
        parser.error(f"unknown checks {unknown}")
    options = SuiteOptions(args.profile, args.keyword, args.modules)
    return 0 if run_test_suite(args.checks or None, options) else 1


def entry_point_format(args) -> int:
    """Script entry point of the format subcommand."""
    argparse.ArgumentParser(
        prog="toricond format",
        description="Format the package and the tests with Black.",
    ).parse_args(args)
    return _black(check=False)


def run_test_suite(
    names: Optional[list[str]] = None,
    options: Optional[SuiteOptions] = None,
) -> bool:
    """Run the checks in *names* (default: all) and print a summary.

    Returns:
        If every check passed.
    """
    names = list(CHECKS) if names is None else names
    options = SuiteOptions() if options is None else options
    results = {name: CHECKS[name].run(options) for name in names}
    width = max(len(CHECKS[n].description) for n in names) + 8 if names else 0
    print("=" * 16 + " Results " + "=" * 16)
    for name, passed in results.items():
        label = f"{CHECKS[name].description} ({name})"
        print(f"{label:<{width}} {'pass' if passed else 'FAIL'}")
    failed = [n for n, passed in results.items() if not passed]
    if failed:
        print(f"FAIL: {len(failed)} of {len(names)} checks failed")
        return False
    print(f"Pass: all {len(names)} checks passed")
    return True


def test_modules(module_filter: Optional[str] = None) -> list:
    """Test files under `tests/`, skipping private modules and conftest."""
    modules = sorted(
        path
        for path in TESTS_DIR.rglob("*.py")
        if not path.stem.startswith("_") and path.stem != "conftest"
    )
    if module_filter:
        modules = [m for m in modules if module_filter in str(m)]
    return modules


def _unit(options: SuiteOptions) -> bool:
    # Test files carry no test_ prefix, so pytest gets them explicitly
    modules = test_modules(options.module_filter)
    command = [sys.executable, "-m", "pytest", *map(str, modules)]
    command += ["--hypothesis-profile", options.profile]
    if options.keyword:
        command += ["-k", options.keyword]
    settings = UNITTEST_PROFILES[options.profile]
    print(f"=== pytest, profile {options.profile}: {settings}")
    for module in modules:
        print(f"    {module.relative_to(TESTS_DIR)}")
    return subprocess.run(command).returncode == 0


def _lint(options: SuiteOptions) -> bool:
    command = [
        sys.executable,
        "-m",
        "flake8",
        *map(str, SOURCE_DIRS),
        f"--max-line-length={LINE_LENGTH}",
        f"--max-complexity={MAX_COMPLEXITY}",
        "--docstring-convention=google",
        f"--extend-ignore={','.join(FLAKE8_IGNORE)}",
    ]
    print(f"=== {' '.join(command[2:])}")
    return subprocess.run(command).returncode == 0


def _black(check: bool) -> int:
    command = [
        sys.executable,
        "-m",
        "black",
        *map(str, SOURCE_DIRS),
        f"--target-version={BLACK_TARGET}",
        f"--line-length={LINE_LENGTH}",
    ]
    if check:
        command.append("--check")
    print(f"=== {' '.join(command[2:])}")
    return subprocess.run(command).returncode


def _configs(options: SuiteOptions) -> bool:
    from toricond.logic import InputError
    from toricond.run.config import builtin_configs, load_config

    print("=== loading builtin configs")
    problems = []
    for name in builtin_configs():
        try:
            command = load_config(name).command
        except InputError as e:
            problems.append(f"{name}: {e}")
            continue
        if command != name:
            problems.append(f'{name}: names the command "{command}"')
    for problem in problems:
        print(f"    {problem}")
    return not problems


def _docs(options: SuiteOptions) -> bool:
    print("=== building docs")
    return test_docs()


CHECKS: dict[str, Check] = {
    "unit": Check("pytest unit tests", _unit),
    "lint": Check("flake8 linting", _lint),
    "format": Check("black formatting", lambda options: _black(check=True) == 0),
    "configs": Check("builtin configs", _configs),
    "docs": Check("pdoc3 documentation", _docs),
}
"""The checks of the suite by name."""
