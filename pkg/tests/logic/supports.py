# flake8: noqa
from fractions import Fraction
from hypothesis import given, strategies as st
import numpy as np
import pytest
from toricond.logic import InputError
from toricond.logic.supports import (
    Polytope,
    Support,
    convex_hull,
    mixed_volume_oracle,
    normalized_volume,
)


st_scale = st.integers(min_value=1, max_value=4)


def test_support_rows():
    quadratic = Support([0, 1, 2])
    assert quadratic.n == 1
    assert len(quadratic) == quadratic.size == 3
    assert quadratic.rows == ((0,), (1,), (2,))
    assert Support.simplex(2).rows == ((0, 0), (1, 0), (0, 1))
    assert Support.cube(2).rows == ((0, 0), (1, 0), (0, 1), (1, 1))
    assert Support.dense_simplex(2, 2).size == 6
    assert Support.segment(3) == Support([0, 1, 2, 3])
    assert Support.linear(3) == Support.simplex(3)


def test_support_is_read_only():
    support = Support([[0, 0], [1, 0], [0, 1]])
    with pytest.raises(ValueError):
        support.exponents[0, 0] = 5


@pytest.mark.parametrize(
    "exponents",
    [
        [],
        [[0, 0], [0, 0]],
        [0.5, 1],
        [[0, 1], [1]],
    ],
)
def test_invalid_supports(exponents):
    with pytest.raises((InputError, ValueError)):
        Support(exponents)


def test_full_dim():
    assert Support.simplex(2).full_dim
    assert not Support([[0, 0], [1, 1], [2, 2]]).full_dim
    assert not Support([3]).full_dim
    with pytest.raises(InputError):
        Support([[0, 0], [1, 1]]).require_full_dim()


def test_hull_drops_interior_points():
    support = Support([[0, 0], [2, 0], [0, 2], [1, 1], [1, 0]])
    hull = support.hull()
    assert set(hull.vertices) == {(0, 0), (2, 0), (0, 2)}
    assert hull.dimension == 2
    assert hull.is_full_dim


def test_degenerate_hulls():
    segment = convex_hull([(0, 0), (1, 1), (3, 3)])
    assert segment.dimension == 1
    assert set(segment.vertices) == {(0, 0), (3, 3)}
    assert segment.lebesgue_volume() == 0
    point = convex_hull([(2, 2)])
    assert point.dimension == 0


def test_volumes():
    square = Support.cube(2).hull()
    assert square.lebesgue_volume() == 1
    assert normalized_volume(square) == 2
    assert Support.simplex(3).normalized_volume() == 1
    assert Support.cube(3).normalized_volume() == 6
    assert Support.segment(4).normalized_volume() == 4


@given(st_scale)
def test_dilation_scales_volume(scale):
    for support in (Support.simplex(2), Support.cube(2), Support.simplex(3)):
        dilated = support.dilate(scale)
        n = support.n
        assert dilated.normalized_volume() == scale**n * support.normalized_volume()
        assert dilated == Support(support.exponents * scale)


def test_translation_invariance():
    square = Support.cube(2).hull()
    moved = square.translate((3, -2))
    assert moved.lebesgue_volume() == square.lebesgue_volume()
    assert moved == convex_hull([(3, -2), (4, -2), (3, -1), (4, -1)])


def test_minkowski_sum():
    summed = Support.simplex(2).hull() + Support.cube(2).hull()
    # Triangle + square: 1/2 + 1 + mixed area 2
    assert summed.lebesgue_volume() == Fraction(7, 2)


def test_halfspaces_and_interior_distance():
    square = Support.cube(2).hull()
    for normal, offset in square.halfspaces():
        for v in square.vertices:
            assert sum(a * b for a, b in zip(normal, v)) <= offset
    distances = square.interior_distance(np.array([[0.5, 0.5], [0.25, 0.5], [2, 2]]))
    assert np.allclose(distances[:2], [0.5, 0.25])
    assert distances[2] < 0
    with pytest.raises(InputError):
        convex_hull([(0, 0), (1, 1)]).halfspaces()


@pytest.mark.parametrize(
    "supports, expected",
    [
        ([Support.simplex(2), Support.simplex(2)], 1),
        ([Support.cube(2), Support.cube(2)], 2),
        ([Support.simplex(2), Support.cube(2)], 2),
        ([Support([[0, 0], [1, 0]]), Support.simplex(2)], 1),
        ([Support.dense_simplex(2, 2), Support.dense_simplex(2, 2)], 4),
        ([Support.simplex(3)] * 3, 1),
        ([Support.cube(3)] * 3, 6),
        ([Support([0, 1, 2])], 2),
    ],
)
def test_mixed_volume_oracle(supports, expected):
    assert mixed_volume_oracle(*supports) == expected


def test_mixed_volume_degenerate():
    # Two parallel segments have no isolated common roots
    segment = Support([[0, 0], [1, 0]])
    assert mixed_volume_oracle(segment, segment) == 0


@given(st_scale)
def test_mixed_volume_of_unmixed_is_volume(scale):
    support = Support.cube(2).dilate(scale)
    assert mixed_volume_oracle(support, support) == support.normalized_volume()


def test_mixed_volume_errors():
    with pytest.raises(InputError):
        mixed_volume_oracle()
    with pytest.raises(InputError):
        mixed_volume_oracle(Support.simplex(2))
    with pytest.raises(InputError):
        mixed_volume_oracle(*[Support.simplex(4)] * 4)


def test_polytope_equality():
    a = Polytope([(0, 0), (1, 0), (0, 1)])
    b = Polytope([(0, 1), (0, 0), (1, 0), (Fraction(1, 4), Fraction(1, 4))])
    assert a == b
    assert hash(a) == hash(b)
