# flake8: noqa
import csv
import json
import pytest
from toricond.logic import ConvergenceError
from toricond.run import script_entry_point
from toricond.run import cli
from toricond.run.cli import (
    EXIT_FAILED,
    EXIT_INVALID,
    EXIT_NUMERICS,
    EXIT_OK,
    EXIT_UNKNOWN_COMMAND,
    CommandResult,
    execute,
    resolve_output_dir,
)
from toricond.run.config import parse_config


SIMPLEX = [[0, 0], [1, 0], [0, 1]]


def _read_outputs(out, command):
    with open(out / f"{command}.csv", encoding="utf-8", newline="") as f:
        rows = list(csv.reader(f))
    with open(out / f"{command}.json", encoding="utf-8") as f:
        summary = json.load(f)
    return rows, summary


def test_help_and_unknown_commands(capsys):
    assert script_entry_point([]) == EXIT_OK
    assert script_entry_point(["--help"]) == EXIT_OK
    assert "check-thm1" in capsys.readouterr().out
    assert script_entry_point(["no-such-command"]) == EXIT_UNKNOWN_COMMAND


def test_mixed_volume(tmp_path):
    assert script_entry_point(["mixed-volume", "--out", str(tmp_path)]) == EXIT_OK
    rows, summary = _read_outputs(tmp_path, "mixed-volume")
    columns = ["integral", "error", "oracle", "rel_err", "panels"]
    assert rows[0] == ["schema_version", *columns]
    assert len(rows) == 2 and rows[1][0] == "1"
    assert summary["passed"] is True
    assert summary["summary"]["oracle"] == 1.0
    assert summary["summary"]["integral"] == pytest.approx(1.0, rel=0.01)
    assert summary["config"]["command"] == "mixed-volume"


def test_nu_lin_is_reproducible(tmp_path):
    first, second = tmp_path / "first", tmp_path / "second"
    for out in (first, second):
        args = ["nu-lin", "--trials", "60", "--seed", "3", "--out", str(out)]
        assert script_entry_point(args) == EXIT_OK
    rows, summary = _read_outputs(first, "nu-lin")
    assert rows[0][:3] == ["schema_version", "eps", "estimate"]
    assert [float(r[1]) for r in rows[1:]] == [0.05, 0.1, 0.2]
    assert summary["passed"] is None
    assert summary["config"]["seed"] == 3 and summary["config"]["trials"] == 60
    assert (first / "nu-lin.csv").read_text() == (second / "nu-lin.csv").read_text()


def test_condition(tmp_path):
    assert script_entry_point(["condition", "--out", str(tmp_path)]) == EXIT_OK
    rows, summary = _read_outputs(tmp_path, "condition")
    assert rows[0][1:] == ["root", "p", "q", "in_region", "distance", "lower", "upper"]
    assert summary["summary"]["roots"] == len(rows) - 1
    assert "restricted_condition" in summary["summary"]
    for row in rows[1:]:
        condition = 1 / float(row[5])
        assert float(row[6]) <= condition * (1 + 1e-6)
        assert condition <= float(row[7]) * (1 + 1e-6)


def test_momentum_check(tmp_path):
    assert script_entry_point(["momentum-check", "--out", str(tmp_path)]) == EXIT_OK
    rows, summary = _read_outputs(tmp_path, "momentum-check")
    assert summary["passed"] is True
    assert len(rows) == 2


def test_run_reads_the_command_from_the_config(tmp_path):
    args = ["run", "--config", "check-thm1", "--trials", "40", "--out", str(tmp_path)]
    assert script_entry_point(args) in (EXIT_OK, EXIT_FAILED)
    rows, summary = _read_outputs(tmp_path, "check-thm1")
    assert summary["command"] == "check-thm1"
    assert isinstance(summary["passed"], bool)
    assert len(rows) == 4
    with pytest.raises(SystemExit):
        script_entry_point(["run"])


def test_invalid_configs(tmp_path):
    path = tmp_path / "bad.toml"
    path.write_text('command = "nu-lin"\n[ensemble]\nlinear = 0\n')
    assert script_entry_point(["run", "--config", str(path)]) == EXIT_INVALID
    assert script_entry_point(["nu-lin", "--config", "no-such-config"]) == EXIT_INVALID
    mixed = parse_config(
        {
            "command": "check-thm1",
            "ensemble": {"supports": [SIMPLEX, [[0, 0], [2, 0], [0, 1]]]},
            "trials": 10,
        }
    )
    assert execute(mixed, str(tmp_path)) == EXIT_INVALID
    assert not (tmp_path / "check-thm1.csv").exists()


def test_exit_codes(tmp_path, monkeypatch):
    config = parse_config({"command": "nu-lin", "ensemble": {"linear": 1}, "seed": 1})

    def failing(config):
        return CommandResult(("value",), [(1.5,)], {"value": 1.5}, passed=False)

    def diverging(config):
        raise ConvergenceError("no convergence")

    monkeypatch.setitem(cli.COMMAND_FUNCTIONS, "nu-lin", failing)
    assert execute(config, str(tmp_path)) == EXIT_FAILED
    rows, summary = _read_outputs(tmp_path, "nu-lin")
    assert rows == [["schema_version", "value"], ["1", "1.5"]]
    assert summary["passed"] is False
    monkeypatch.setitem(cli.COMMAND_FUNCTIONS, "nu-lin", diverging)
    assert execute(config, str(tmp_path / "other")) == EXIT_NUMERICS
    assert not (tmp_path / "other").exists()


def test_resolve_output_dir(tmp_path, monkeypatch):
    monkeypatch.delenv(cli.OUTPUT_ENV_VAR, raising=False)
    assert resolve_output_dir() == cli.Path(cli.OUTPUT_DIR)
    monkeypatch.setenv(cli.OUTPUT_ENV_VAR, str(tmp_path))
    assert resolve_output_dir() == tmp_path
    assert resolve_output_dir("elsewhere") == cli.Path("elsewhere")
