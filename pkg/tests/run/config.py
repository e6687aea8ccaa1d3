# flake8: noqa
import numpy as np
import pytest
from toricond.logic import ConfigError, Field
from toricond.logic.kahler import DiagonalCovariance, TorusPoint
from toricond.logic.randsys import Ensemble, Region
from toricond.run.config import (
    COMMANDS,
    DEFAULT_EPS,
    DEFAULT_TRIALS,
    builtin_configs,
    load_config,
    parse_config,
)


LINEAR = {"linear": 2}
QUADRATIC = {"supports": [[0, 1, 2]], "unmixed": True}
SIMPLEX = [[0, 0], [1, 0], [0, 1]]
SQUARE = [[0, 0], [1, 0], [0, 1], [1, 1]]


def _config(ensemble=LINEAR, **entries):
    return {"command": "nu-lin", "ensemble": ensemble, **entries}


def test_builtin_configs():
    assert builtin_configs() == sorted(COMMANDS)
    for name in builtin_configs():
        assert load_config(name).command == name
        assert load_config(command=name).command == name


def test_check_thm1_config():
    config = load_config(command="check-thm1")
    assert config.seed == 7
    assert config.trials == 10000
    assert config.eps == (0.1, 0.2, 0.3)
    assert config.ensemble.n == 1
    assert config.ensemble.sizes == (3,)
    assert config.region.export() == Region.full(1).export()
    assert config.source.endswith("check-thm1.toml")
    exported = config.export()
    assert exported["command"] == "check-thm1"
    assert exported["eps"] == [0.1, 0.2, 0.3]


def test_overrides():
    config = load_config(
        command="check-thm1", overrides={"seed": 5, "trials": None, "threads": 3}
    )
    assert config.seed == 5
    assert config.trials == 10000
    assert config.threads == 3
    renamed = load_config("check-thm1", command="nu-sparse")
    assert renamed.command == "nu-sparse"


def test_defaults():
    config = parse_config(_config())
    assert config.trials == DEFAULT_TRIALS
    assert config.eps == DEFAULT_EPS
    assert config.threads == 1
    assert config.orthant == "positive"
    assert not config.sweep
    assert config.system is None
    assert config.region.export() == Region.full(2).export()
    assert config.ensemble == Ensemble.linear(2)
    assert isinstance(config.seed, int) and config.seed >= 0


def test_ensembles():
    kostlan = parse_config(_config({"kostlan": {"n": 1, "degree": 4}, "field": "real"}))
    assert kostlan.ensemble == Ensemble.kostlan(1, 4, Field.REAL)
    weighted = parse_config(_config({**QUADRATIC, "covariances": ["kostlan 2"]}))
    assert weighted.ensemble.covariances[0] == DiagonalCovariance([1.0, 2.0, 1.0])
    mixed = parse_config(
        _config(
            {
                "supports": [SIMPLEX, SQUARE],
                "covariances": ["identity", [1.0, 3.0, 1.0, 1.0]],
            }
        )
    )
    assert mixed.ensemble.n == 2
    assert not mixed.ensemble.is_unmixed
    assert mixed.ensemble.covariances[1] == DiagonalCovariance([1.0, 3.0, 1.0, 1.0])


def test_regions_and_systems():
    config = parse_config(
        _config(
            QUADRATIC,
            region={"boxes": [{"p_lo": [-np.inf], "p_hi": [0.0]}]},
            system={"real": [[1.0, 0.0, -1.0]], "imag": [[0.0, 2.0, 0.0]]},
        )
    )
    assert config.region.contains(TorusPoint([-5.0]))
    assert not config.region.contains(TorusPoint([1.0]))
    assert np.allclose(config.system.coeffs[0], [1, 2j, -1])
    assert parse_config(_config(region={"empty": True})).region.is_empty


def test_infinite_bounds_from_toml(tmp_path):
    path = tmp_path / "disk.toml"
    path.write_text(
        'command = "expect-roots"\n'
        "seed = 1\n"
        "[ensemble]\n"
        "kostlan = { n = 1, degree = 4 }\n"
        "[region]\n"
        "boxes = [{ p_lo = [-inf], p_hi = [0.0] }]\n"
    )
    config = load_config(str(path))
    assert config.command == "expect-roots"
    assert config.region.contains(TorusPoint([-40.0]))
    assert config.source == str(path)


@pytest.mark.parametrize(
    "data, path",
    [
        (_config(command="nope"), "command"),
        (_config(bogus=1), "bogus"),
        (_config(trials=1.5), "trials"),
        (_config(threads=0), "threads"),
        (_config(seed=-1), "seed"),
        (_config(eps=[0.1, -1.0]), "eps[1]"),
        (_config(orthant="negative"), "orthant"),
        (_config(sweep="yes"), "sweep"),
        (_config(quadrature={"abs_tol": 0}), "quadrature.abs_tol[0]"),
        (_config(quadrature={"steps": 3}), "quadrature.steps"),
        (_config(ensemble=None), "ensemble"),
        (_config({"linear": 2, "supports": [[0, 1]]}), "ensemble"),
        (_config({"linear": 2, "field": "quaternion"}), "ensemble.field"),
        (_config({"kostlan": {"n": 1}}), "ensemble.kostlan.degree"),
        (_config({"supports": [[0.5, 1]]}), "ensemble.supports[0]"),
        (
            _config({**QUADRATIC, "covariances": [[1.0, 2.0]]}),
            "ensemble.covariances[0]",
        ),
        (
            _config(
                {
                    "supports": [SIMPLEX, SIMPLEX],
                    "covariances": ["identity", "kostlan x"],
                }
            ),
            "ensemble.covariances[1]",
        ),
        (
            _config(
                {
                    "supports": [SIMPLEX, SIMPLEX],
                    "covariances": ["identity"],
                }
            ),
            "ensemble.covariances[1]",
        ),
        (
            _config(region={"boxes": [{"p_lo": [0.0, 0.0]}]}),
            "region.boxes[0].p_hi",
        ),
        (
            _config(region={"boxes": [{"p_lo": [0.0], "p_hi": [1.0, 2.0]}]}),
            "region.boxes[0].p_lo",
        ),
        (
            _config(region={"boxes": [{"p_lo": [1.0, 1.0], "p_hi": [0.0, 0.0]}]}),
            "region.boxes",
        ),
        (_config(system={"real": [[1.0, 2.0]]}), "system.real"),
        (_config(momentum={"samples": 0}), "momentum.samples"),
    ],
)
def test_config_errors(data, path):
    with pytest.raises(ConfigError) as info:
        parse_config(data)
    assert info.value.path == path
    assert str(info.value).startswith(f"{path}: ")


def test_missing_and_malformed_configs(tmp_path):
    with pytest.raises(ConfigError) as info:
        load_config("no-such-config")
    assert info.value.path == "config"
    with pytest.raises(ConfigError):
        load_config()
    broken = tmp_path / "broken.toml"
    broken.write_text("command = \n")
    with pytest.raises(ConfigError) as info:
        load_config(str(broken))
    assert info.value.path == "config"
