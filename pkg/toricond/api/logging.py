"""Logging tools.

The logging module is mostly used for the `Logger.log` function, as
well as `Logger.set_logging_temp`. Noisy parts of the package log through a
channel (`Logger.channel`) that can be switched off in the settings:

```toml
[logging]
experiments = false
```

Currently, logging is done by printing to console.
"""
from typing import Callable
import contextlib
from toricond.util import settings


# Permanently disables logging globally if False
GLOBAL_LOGGING = settings.get("logging.global")


class Logger:
    """Handles logging globally. Use `Logger.log` for logging."""

    enable_logging: bool = True
    """Disables logging globally if False."""

    @classmethod
    def log(cls, text: str):
        """Output text to console if logging is enabled globally."""
        if cls.enable_logging and GLOBAL_LOGGING:
            print(text)

    @classmethod
    def channel(cls, name: str) -> Callable[[str], None]:
        """Return a logging function for the settings flag `logging.<name>`.

        The returned function is a no-op when the flag is off.
        """
        if not settings.get(f"logging.{name}"):
            return _silent
        prefix = f"[{name}] "

        def log_channel(text: str):
            cls.log(f"{prefix}{text}")

        return log_channel

    @classmethod
    @contextlib.contextmanager
    def set_logging_temp(cls, enabled: bool):
        """Enable or silence the logger inside a block, restoring it on exit.

        <u>__Example usage:__</u>
        ```python
        with Logger.set_logging_temp(False):
            rows = check_thm1(Support.segment(2), [0.1], trials=500, seed=1)
        ```
        """
        last_state = cls.enable_logging
        cls.enable_logging = enabled
        try:
            yield last_state
        finally:
            cls.enable_logging = last_state


def _silent(text: str):
    pass


logger = Logger.log
"""Alias for `Logger.log`."""
