# flake8: noqa
import importlib
import re
import toricond as tc
from toricond import api


LISTING = re.compile(r"^- `(toricond(?:\.\w+)+)`$")


def _listed_attributes(heading="### All available attributes"):
    lines = api.__doc__.strip().splitlines()
    start = lines.index(heading) + 1
    end = lines.index("<br>", start)
    listed = {}
    for line in lines[start:end]:
        match = LISTING.match(line)
        assert match, f"Malformed listing: {line!r}"
        module, _, name = match.group(1).rpartition(".")
        listed[name] = module
    return listed


LISTED = _listed_attributes()


def test_listing_matches_all():
    assert set(LISTED) == set(api.__all__)
    assert tc.__all__ == api.__all__


def test_listed_attributes_resolve():
    for name, module in LISTED.items():
        source = getattr(importlib.import_module(module), name)
        assert getattr(api, name) is source
        assert getattr(tc, name) is source


def test_useful_modules_import():
    lines = api.__doc__.strip().splitlines()
    start = lines.index("### Useful modules") + 1
    for line in lines[start:]:
        match = LISTING.match(line)
        if match:
            importlib.import_module(match.group(1))
