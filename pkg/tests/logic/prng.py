# flake8: noqa
from hypothesis import given, strategies as st
import numpy as np
import pytest
from toricond.logic.prng import SeedStream, derive_seed


st_seed = st.integers(min_value=0, max_value=SeedStream.MAX_SEED_VALUE)
st_counter = st.integers(min_value=0, max_value=10**9)
st_stream = st.builds(SeedStream, st_seed)


@given(st_stream, st_counter)
def test_derive_is_pure(stream, counter):
    """Test that a subseed depends on the seed, key and counter alone."""
    copy = stream.copy()
    assert copy == stream
    assert stream.derive(counter) == copy.derive(counter)
    assert stream.derive(counter) == derive_seed(stream.seed, counter)


@given(st_stream, st_counter)
def test_rng_reproduces(stream, counter):
    """Test that the generator of a trial reproduces the same draws."""
    a = stream.rng(counter).standard_normal(4)
    b = SeedStream(stream.seed).rng(counter).standard_normal(4)
    assert np.array_equal(a, b)


@given(st_stream, st_counter)
def test_order_independence(stream, counter):
    """Test that deriving other trials first does not change a trial."""
    expected = stream.derive(counter)
    for other in range(5):
        stream.derive(other)
    assert stream.derive(counter) == expected


@given(st_stream, st.integers(min_value=0, max_value=1000))
def test_spawn_independence(stream, label):
    """Test that spawned streams differ from their parent and siblings."""
    child = stream.spawn(label)
    sibling = stream.spawn(label + 1)
    assert child.seed == stream.seed
    assert child != stream and child != sibling
    assert child.derive(0) != stream.derive(0)
    assert child.derive(0) != sibling.derive(0)
    assert child == stream.spawn(label)


def test_distinct_counters():
    stream = SeedStream(12345)
    seeds = {stream.derive(t) for t in range(1000)}
    assert len(seeds) == 1000


def test_invalid_seeds():
    with pytest.raises(ValueError):
        SeedStream(-1)
    with pytest.raises(ValueError):
        SeedStream(2**64)
    with pytest.raises(ValueError):
        SeedStream(1).spawn(-1)


def test_random_seed():
    seed = SeedStream.get_random_seed()
    assert 0 <= seed <= SeedStream.MAX_SEED_VALUE
    assert 0 <= SeedStream().seed <= SeedStream.MAX_SEED_VALUE
