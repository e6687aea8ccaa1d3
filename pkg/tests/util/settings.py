# flake8: noqa
import pytest
from toricond.util import settings


def test_defaults(tmp_path):
    values = settings.load_settings(tmp_path / "absent.toml")
    assert values["quadrature.rel_tol"] == 1e-7
    assert values["rootfind.escape_bound"] == 1e12
    assert values["output.schema_version"] == 1
    assert settings.get("output.env_var") == "TORICOND_OUT"
    with pytest.raises(KeyError):
        settings.get("quadrature")
    with pytest.raises(KeyError):
        settings.get("no.such.setting")


def test_flatten():
    nested = {"a": {"b": 1, "c": {"d": [1, 2]}}, "e": "x"}
    assert settings.flatten(nested) == {"a.b": 1, "a.c.d": [1, 2], "e": "x"}


def test_user_overrides(tmp_path):
    usr = tmp_path / "settings.toml"
    usr.write_text(
        "[quadrature]\n"
        "rel_tol = 1\n"
        "order = 12\n"
        "max_panels = 2.5\n"
        "[output]\n"
        "directory = false\n"
        "[nonsense]\n"
        "key = 3\n"
    )
    with pytest.warns(UserWarning) as caught:
        values = settings.load_settings(usr)
    assert values["quadrature.rel_tol"] == 1.0
    assert isinstance(values["quadrature.rel_tol"], float)
    assert values["quadrature.order"] == 12
    assert values["quadrature.max_panels"] == 40000
    assert values["output.directory"] == "toricond-out"
    messages = " ".join(str(w.message) for w in caught)
    assert "nonsense.key" in messages and "quadrature.max_panels" in messages


def test_malformed_user_file(tmp_path):
    broken = tmp_path / "broken.toml"
    broken.write_text("[quadrature\n")
    with pytest.warns(UserWarning, match="malformed"):
        values = settings.load_settings(broken)
    assert values["quadrature.order"] == 8
