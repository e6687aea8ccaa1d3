"""Counter-based seed derivation.

Every Monte Carlo trial draws from its own generator, derived from the run
seed and the trial counter alone. Results are then independent of the order
in which worker threads pick up trials.

<u>__Example usage:__</u>
```python
stream = SeedStream(12345)
# The generator of trial 7, identical on every run and thread
rng = stream.rng(7)
# A child stream for an independent sub-experiment
lin_stream = stream.spawn(1)
assert stream.derive(7) == SeedStream(12345).derive(7)
assert lin_stream.derive(7) != stream.derive(7)
```
"""
from typing import Optional
import random
import numpy as np


# Spawn labels live above any trial counter in the key space
SPAWN_OFFSET = 2**40


class SeedStream:
    """A seed and a key path from which per-trial generators are derived.

    Derivation uses numpy's `SeedSequence` with the trial counter appended to
    the spawn key, so `derive(t)` is a pure function of (seed, key, t).
    """

    MAX_SEED_VALUE = 2**64 - 1

    def __init__(self, seed: Optional[int] = None, key: tuple[int, ...] = ()):
        """Initialize the class.

        Args:
            seed: Non-negative integer below 2**64. None picks a random seed.
            key: Spawn key of the stream (set by `SeedStream.spawn`).
        """
        if seed is None:
            seed = self.get_random_seed()
        seed = int(seed)
        if not 0 <= seed <= self.MAX_SEED_VALUE:
            raise ValueError(f"Seed must be in [0, 2**64), got: {seed}")
        self.__seed: int = seed
        self.__key: tuple[int, ...] = tuple(int(k) for k in key)

    @property
    def seed(self) -> int:
        """The root seed."""
        return self.__seed

    @property
    def key(self) -> tuple[int, ...]:
        """The spawn key of this stream."""
        return self.__key

    def sequence(self, counter: int) -> np.random.SeedSequence:
        """The `SeedSequence` of trial *counter*."""
        return np.random.SeedSequence(
            entropy=self.__seed,
            spawn_key=(*self.__key, int(counter)),
        )

    def derive(self, counter: int) -> int:
        """A 64-bit subseed for trial *counter*."""
        state = self.sequence(counter).generate_state(1, dtype=np.uint64)
        return int(state[0])

    def rng(self, counter: int) -> np.random.Generator:
        """The generator of trial *counter*."""
        return np.random.default_rng(self.sequence(counter))

    def spawn(self, label: int) -> "SeedStream":
        """A child stream, independent of this one and of other labels.

        *label* must be a non-negative integer.
        """
        if label < 0:
            raise ValueError(f"Spawn label must be non-negative, got: {label}")
        return SeedStream(self.__seed, key=(*self.__key, SPAWN_OFFSET + int(label)))

    @classmethod
    def get_random_seed(cls) -> int:
        """A random seed that is valid as `SeedStream.seed`."""
        return random.randint(0, cls.MAX_SEED_VALUE)

    def copy(self) -> "SeedStream":
        """A copy of *self* with the same seed and key."""
        return SeedStream(self.__seed, key=self.__key)

    def __eq__(self, other) -> bool:
        """Equality."""
        if isinstance(other, SeedStream):
            return (self.seed, self.key) == (other.seed, other.key)
        return False

    def __hash__(self):
        """Hash."""
        return hash((self.seed, self.key))

    def __repr__(self):
        """Repr."""
        return f"<SeedStream {self.seed} key={self.key}>"


def derive_seed(seed: int, counter: int) -> int:
    """The subseed of trial *counter* for run *seed*."""
    return SeedStream(seed).derive(counter)
