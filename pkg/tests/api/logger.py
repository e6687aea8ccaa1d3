# flake8: noqa
from toricond.api import logging as tclogging
from toricond.api.logging import Logger, logger


def test_set_logging_temp(capsys, monkeypatch):
    monkeypatch.setattr(tclogging, "GLOBAL_LOGGING", True)
    with Logger.set_logging_temp(True):
        logger("shown")
        with Logger.set_logging_temp(False) as previous:
            assert previous is True
            logger("hidden")
        logger("shown again")
    assert capsys.readouterr().out == "shown\nshown again\n"


def test_global_switch(capsys, monkeypatch):
    monkeypatch.setattr(tclogging, "GLOBAL_LOGGING", False)
    with Logger.set_logging_temp(True):
        logger("hidden")
    assert capsys.readouterr().out == ""


def test_channels(capsys, monkeypatch):
    monkeypatch.setattr(tclogging, "GLOBAL_LOGGING", True)
    monkeypatch.setattr(
        tclogging.settings, "get", lambda name: name == "logging.experiments"
    )
    with Logger.set_logging_temp(True):
        Logger.channel("experiments")("progress")
        Logger.channel("numerics")("retry")
    assert capsys.readouterr().out == "[experiments] progress\n"
