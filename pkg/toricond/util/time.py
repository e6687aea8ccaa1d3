"""Timing of code blocks."""
from typing import Callable, Optional
import time
import contextlib


@contextlib.contextmanager
def pingpong(
    description: str = "Pingpong",
    logger: Optional[Callable[[str], None]] = None,
    return_elapsed: Optional[Callable[[float], None]] = None,
):
    """Measure the wall time of a block in milliseconds.

    Args:
        description: Prefix of the logged message.
        logger: Receives "<description> elapsed in: <ms> ms" when the block
            exits, also when it raises.
        return_elapsed: Receives the elapsed milliseconds.

    <u>__Example usage:__</u>
    ```python
    with pingpong("1000 linear systems", logger=print):
        estimate_nu_lin(2, 0.1, trials=1000, seed=7)
    ```
    """
    start = time.perf_counter()
    try:
        yield start
    finally:
        elapsed = (time.perf_counter() - start) * 1000
        if logger is not None:
            logger(f"{description} elapsed in: {elapsed:.3f} ms")
        if return_elapsed is not None:
            return_elapsed(elapsed)
