# flake8: noqa
import pytest
from toricond.util.time import pingpong


def test_pingpong():
    messages, elapsed = [], []
    with pingpong("block", logger=messages.append, return_elapsed=elapsed.append):
        sum(range(1000))
    assert len(messages) == 1 and messages[0].startswith("block elapsed in: ")
    assert messages[0].endswith(" ms")
    assert len(elapsed) == 1 and elapsed[0] >= 0


def test_pingpong_reports_on_errors():
    messages = []
    with pytest.raises(RuntimeError):
        with pingpong("failing", logger=messages.append):
            raise RuntimeError
    assert len(messages) == 1
