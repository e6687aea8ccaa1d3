"""Build the HTML documentation with pdoc3.

Requires installing from source with the dev extras (see
`toricond.guides.install`).

```noformat
toricond docs --help
```

The markdown guides in `docs/guides` are staged as a temporary `toricond.guides`
subpackage of `.. include::` stubs so that pdoc renders them next to the API
reference. The output goes to the docs usr dir unless `--out` is given.
"""
from typing import Iterator, Optional
import argparse
import contextlib
import shutil
import warnings
from pathlib import Path
from pdoc import Context, Module, link_inheritance, tpl_lookup
from toricond.util import INSTALLED_FROM_SOURCE, PACKAGE_DIR, PROJ_DIR
from toricond.util.file import file_dump, get_usr_dir, popen_path


GUIDES_DIR = PROJ_DIR / "docs" / "guides"
TEMPLATE_DIR = PROJ_DIR / "docs" / "templates"
STAGED_GUIDES_DIR = PACKAGE_DIR / "guides"
DEFAULT_OUTPUT_DIR = get_usr_dir("docs")


def entry_point_docs(args) -> int:
    """Script entry point of the docs subcommand."""
    parser = argparse.ArgumentParser(
        prog="toricond docs",
        description="Build and open the toricond documentation.",
    )
    parser.add_argument(
        "-f", "--force", action="store_true", help="rebuild existing docs"
    )
    parser.add_argument("--no-open", action="store_true", help="only build")
    parser.add_argument(
        "--out", default=None, help=f"output directory (default: {DEFAULT_OUTPUT_DIR})"
    )
    args = parser.parse_args(args)
    output_dir = Path(args.out) if args.out else DEFAULT_OUTPUT_DIR
    index = make_docs(output_dir, force=args.force)
    if not args.no_open:
        popen_path(index)
    return 0


def make_docs(output_dir: Optional[Path] = None, force: bool = False) -> Path:
    """Build the docs unless they exist, and return the path of the index page.

    Raises:
        EnvironmentError: When not installed from source.
    """
    output_dir = DEFAULT_OUTPUT_DIR if output_dir is None else Path(output_dir)
    index = output_dir / "toricond" / "index.html"
    if index.is_file() and not force:
        return index
    if not INSTALLED_FROM_SOURCE:
        raise EnvironmentError("Building the docs requires a source checkout")
    if output_dir.is_dir():
        shutil.rmtree(output_dir)
    if TEMPLATE_DIR.is_dir() and str(TEMPLATE_DIR) not in tpl_lookup.directories:
        tpl_lookup.directories.insert(0, str(TEMPLATE_DIR))
    with _staged_guides():
        context = Context()
        root = Module("toricond", context=context)
        link_inheritance(context)
        for module in _walk(root):
            file_dump(_target(output_dir, module), module.html())
    print(f"Docs written to {output_dir}")
    return index


def test_docs() -> bool:
    """Build the docs to a scratch dir and report any warning or error."""
    if not INSTALLED_FROM_SOURCE:
        print("Building the docs requires a source checkout")
        return False
    scratch = get_usr_dir("docs-test")
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        try:
            make_docs(scratch, force=True)
            error = None
        except Exception as e:
            error = e
    issues = [f"  warning: {w.message}" for w in caught]
    if error is not None:
        issues.append(f"  error: {error!r}")
    shutil.rmtree(scratch, ignore_errors=True)
    if issues:
        print(f"{len(issues)} documentation issues:")
        print("\n".join(issues))
        return False
    print("Documentation built without issues.")
    return True


@contextlib.contextmanager
def _staged_guides():
    if STAGED_GUIDES_DIR.exists():
        raise FileExistsError(f"Stale guides package: {STAGED_GUIDES_DIR}")
    try:
        for md in sorted(GUIDES_DIR.rglob("*.md")):
            stub = STAGED_GUIDES_DIR / md.relative_to(GUIDES_DIR).with_suffix(".py")
            stub.parent.mkdir(parents=True, exist_ok=True)
            # Backslashes of windows paths must survive the docstring
            include = str(md).replace("\\", "\\\\")
            file_dump(stub, f'""".. include:: {include}"""\n')
        yield
    finally:
        shutil.rmtree(STAGED_GUIDES_DIR, ignore_errors=True)


def _walk(module: Module) -> Iterator[Module]:
    yield module
    for submodule in module.submodules():
        yield from _walk(submodule)


def _target(output_dir: Path, module: Module) -> Path:
    parts = module.name.split(".")
    if module.is_package:
        path = output_dir.joinpath(*parts, "index.html")
    else:
        path = output_dir.joinpath(*parts[:-1], f"{parts[-1]}.html")
    path.parent.mkdir(parents=True, exist_ok=True)
    return path
