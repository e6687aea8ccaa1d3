"""Supports, exact convex hulls and the mixed-volume oracle.

A `Support` is the exponent set of one sparse polynomial: an integer matrix
whose rows are monomial exponent vectors. Its Newton polytope is a `Polytope`
computed in exact rational arithmetic, so that normalized volumes and the
inclusion-exclusion mixed volume are exact:

```python
from toricond.logic.supports import Support, mixed_volume_oracle

square = Support.cube(2)
triangle = Support.simplex(2)
assert mixed_volume_oracle(square.hull(), triangle.hull()) == 2
assert square.normalized_volume() == 2
```

Volumes are normalized so that the standard simplex has volume 1, i.e. they
are n! times the Lebesgue volume. Exact hulls are limited to affine dimension
at most 3.
"""
from typing import Iterable, Sequence, Union
from fractions import Fraction
from functools import cached_property
from itertools import combinations, chain, product
import math
import numpy as np
from toricond.logic import InputError


Point = tuple[Fraction, ...]
"""A point with exact rational coordinates."""
MAX_EXACT_DIM = 3
"""Largest affine dimension handled by the exact hull algorithms."""


def _rational(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, np.generic):
        value = value.item()
    return Fraction(value)


def _as_points(points: Iterable[Sequence]) -> list[Point]:
    unique = dict.fromkeys(tuple(_rational(c) for c in p) for p in points)
    pts = list(unique)
    if not pts:
        raise InputError("At least one point is required")
    n = len(pts[0])
    if n < 1 or any(len(p) != n for p in pts):
        raise InputError("Points must share a positive ambient dimension")
    return pts


def _affine_frame(points: list[Point]) -> tuple[int, list[int]]:
    """Affine dimension of *points* and coordinates on which it projects 1:1.

    Row reduction of the difference vectors; the pivot columns of the echelon
    form span the affine hull.
    """
    base = points[0]
    rows = [[c - b for c, b in zip(p, base)] for p in points[1:]]
    pivots = []
    rank = 0
    for col in range(len(base)):
        pivot_row = next(
            (i for i in range(rank, len(rows)) if rows[i][col] != 0),
            None,
        )
        if pivot_row is None:
            continue
        rows[rank], rows[pivot_row] = rows[pivot_row], rows[rank]
        pr = rows[rank]
        for i in range(rank + 1, len(rows)):
            if rows[i][col] != 0:
                factor = rows[i][col] / pr[col]
                rows[i] = [a - factor * b for a, b in zip(rows[i], pr)]
        pivots.append(col)
        rank += 1
    return rank, pivots


def _cross2(o: Point, a: Point, b: Point) -> Fraction:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def _monotone_chain(pts: Sequence[Point]) -> list[int]:
    """Indices of the 2D hull vertices in counter-clockwise order."""
    order = sorted(range(len(pts)), key=lambda i: pts[i])
    lower: list[int] = []
    for i in order:
        while len(lower) >= 2 and _cross2(pts[lower[-2]], pts[lower[-1]], pts[i]) <= 0:
            lower.pop()
        lower.append(i)
    upper: list[int] = []
    for i in reversed(order):
        while len(upper) >= 2 and _cross2(pts[upper[-2]], pts[upper[-1]], pts[i]) <= 0:
            upper.pop()
        upper.append(i)
    return lower[:-1] + upper[:-1]


def _sub(a: Point, b: Point) -> Point:
    return tuple(x - y for x, y in zip(a, b))


def _dot(a: Sequence, b: Sequence):
    return sum(x * y for x, y in zip(a, b))


def _cross3(a: Point, b: Point) -> Point:
    return (
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    )


def _plane_key(normal: Point, offset: Fraction) -> tuple[Point, Fraction]:
    scale = abs(next(c for c in normal if c != 0))
    return tuple(c / scale for c in normal), offset / scale


def _facets_3d(pts: Sequence[Point]) -> list[tuple[Point, Fraction, list[int]]]:
    """Outward facets (normal, offset, vertex cycle) of a full 3D point set.

    Every supporting plane through three points is found by brute force; the
    points on it are ordered by a 2D hull in a coordinate projection.
    """
    facets: dict[tuple[Point, Fraction], list[int]] = {}
    count = len(pts)
    for i, j, k in combinations(range(count), 3):
        normal = _cross3(_sub(pts[j], pts[i]), _sub(pts[k], pts[i]))
        if not any(normal):
            continue
        offset = _dot(normal, pts[i])
        key = _plane_key(normal, offset)
        flipped = _plane_key(tuple(-c for c in normal), -offset)
        if key in facets or flipped in facets:
            continue
        above = below = False
        for m in range(count):
            side = _dot(normal, pts[m]) - offset
            if side > 0:
                above = True
            elif side < 0:
                below = True
            if above and below:
                break
        if above and below:
            continue
        if above:
            normal = tuple(-c for c in normal)
            offset = -offset
        on_plane = [m for m in range(count) if _dot(normal, pts[m]) == offset]
        facets[_plane_key(normal, offset)] = on_plane
    result = []
    for (normal, offset), members in facets.items():
        drop = next(c for c in range(3) if normal[c] != 0)
        keep = [c for c in range(3) if c != drop]
        flat = [tuple(pts[m][c] for c in keep) for m in members]
        cycle = [members[i] for i in _monotone_chain(flat)]
        result.append((normal, offset, cycle))
    return result


class Polytope:
    """The convex hull of finitely many rational points.

    The vertex list is irredundant and `Polytope.dimension` is the affine
    dimension of the vertices. Instances are immutable and compare equal when
    their vertex sets are equal.
    """

    def __init__(self, points: Iterable[Sequence]):
        """Initialize the class.

        Args:
            points: Points with rational (int, Fraction or float) coordinates.
                Duplicates and interior points are dropped.
        """
        pts = _as_points(points)
        ambient = len(pts[0])
        dim, pivots = _affine_frame(pts)
        if dim > MAX_EXACT_DIM:
            raise InputError(
                f"Exact hulls are limited to dimension {MAX_EXACT_DIM}, got {dim}"
            )
        proj = [tuple(p[c] for c in pivots) for p in pts]
        facets: list[tuple[Point, Fraction, list[int]]] = []
        if dim == 0:
            idx = [0]
        elif dim == 1:
            idx = [min(range(len(pts)), key=lambda i: proj[i])]
            idx.append(max(range(len(pts)), key=lambda i: proj[i]))
        elif dim == 2:
            idx = _monotone_chain(proj)
        else:
            facets = _facets_3d(proj)
            idx = sorted(set(chain.from_iterable(f[2] for f in facets)))
        self.__vertices: tuple[Point, ...] = tuple(pts[i] for i in idx)
        self.__dimension: int = dim
        self.__ambient: int = ambient
        self.__facets = None
        if dim == ambient == 3:
            self.__facets = tuple(
                (normal, offset, tuple(pts[i] for i in cycle))
                for normal, offset, cycle in facets
            )

    @property
    def vertices(self) -> tuple[Point, ...]:
        """The extreme points. In the plane they are in counter-clockwise order."""
        return self.__vertices

    @property
    def dimension(self) -> int:
        """Affine dimension of the polytope."""
        return self.__dimension

    @property
    def ambient(self) -> int:
        """Dimension of the space the polytope lives in."""
        return self.__ambient

    @property
    def is_full_dim(self) -> bool:
        """If the affine dimension equals the ambient dimension."""
        return self.__dimension == self.__ambient

    def vertex_array(self) -> np.ndarray:
        """Vertices as a float array of shape (vertices, ambient)."""
        return np.array([[float(c) for c in v] for v in self.__vertices])

    def lebesgue_volume(self) -> Fraction:
        """Exact Lebesgue volume in the ambient space (0 if not full dimensional)."""
        if not self.is_full_dim:
            return Fraction(0)
        verts = self.__vertices
        if self.__ambient == 1:
            return abs(verts[1][0] - verts[0][0])
        if self.__ambient == 2:
            twice_area = sum(
                a[0] * b[1] - a[1] * b[0]
                for a, b in zip(verts, verts[1:] + verts[:1])
            )
            return abs(twice_area) / 2
        apex = verts[0]
        total = Fraction(0)
        for _, _, cycle in self.__facets:
            w0 = _sub(cycle[0], apex)
            for a, b in zip(cycle[1:], cycle[2:]):
                total += abs(_dot(w0, _cross3(_sub(a, apex), _sub(b, apex))))
        return total / 6

    def normalized_volume(self) -> Fraction:
        """The volume normalized so the standard simplex has volume 1."""
        return math.factorial(self.__ambient) * self.lebesgue_volume()

    def halfspaces(self) -> list[tuple[Point, Fraction]]:
        """Facet inequalities `normal · x <= offset` with outward normals.

        Raises:
            InputError: If the polytope is not full dimensional.
        """
        if not self.is_full_dim:
            raise InputError("Halfspaces are only defined for full dimensional hulls")
        verts = self.__vertices
        one = Fraction(1)
        if self.__ambient == 1:
            lo, hi = sorted((verts[0][0], verts[1][0]))
            return [((-one,), -lo), ((one,), hi)]
        if self.__ambient == 2:
            result = []
            for a, b in zip(verts, verts[1:] + verts[:1]):
                normal = (b[1] - a[1], a[0] - b[0])
                result.append((normal, _dot(normal, a)))
            return result
        return [(normal, offset) for normal, offset, _ in self.__facets]

    def interior_distance(self, y) -> np.ndarray:
        """Euclidean distance of points *y* to the boundary, negative outside.

        Args:
            y: Float array of shape (..., ambient).

        Returns:
            Array of shape (...) with the signed distance of each point.
        """
        y = np.asarray(y, dtype=np.float64)
        normals = np.array([[float(c) for c in a] for a, _ in self.halfspaces()])
        offsets = np.array([float(b) for _, b in self.halfspaces()])
        lengths = np.linalg.norm(normals, axis=1)
        slack = (offsets - y @ normals.T) / lengths
        return slack.min(axis=-1)

    def translate(self, vector: Sequence) -> "Polytope":
        """The polytope shifted by *vector*."""
        shift = tuple(_rational(c) for c in vector)
        return Polytope(tuple(a + b for a, b in zip(v, shift)) for v in self.vertices)

    def __add__(self, other: "Polytope") -> "Polytope":
        """Minkowski sum, computed on pairwise vertex sums."""
        if not isinstance(other, Polytope):
            return NotImplemented
        if other.ambient != self.ambient:
            raise InputError("Minkowski sum of polytopes in different dimensions")
        return Polytope(
            tuple(a + b for a, b in zip(v, w))
            for v, w in product(self.vertices, other.vertices)
        )

    def __eq__(self, other) -> bool:
        """Equality."""
        if isinstance(other, Polytope):
            return set(self.vertices) == set(other.vertices)
        return False

    def __hash__(self):
        """Hash."""
        return hash(frozenset(self.vertices))

    def __repr__(self):
        """Repr."""
        verts = ", ".join(
            "(" + ", ".join(str(c) for c in v) + ")" for v in self.vertices
        )
        return f"<Polytope dim={self.dimension} [{verts}]>"


def convex_hull(points: Iterable[Sequence]) -> Polytope:
    """The convex hull of *points*, with an irredundant vertex list.

    Degenerate inputs are allowed, the dimension may be less than the
    ambient dimension.
    """
    return Polytope(points)


def normalized_volume(polytope: Polytope) -> Fraction:
    """n! times the Lebesgue volume, 0 for lower dimensional polytopes."""
    return polytope.normalized_volume()


def mixed_volume_oracle(*polytopes: Union[Polytope, "Support"]) -> Fraction:
    """Normalized mixed volume by inclusion-exclusion over Minkowski sums.

    `MV = sum over nonempty S of (-1)^(n-|S|) vol(sum of P_i for i in S)` with
    Lebesgue volumes, so that n standard simplices have mixed volume 1 and
    `MV(P, ..., P)` is the normalized volume of P.

    Args:
        polytopes: n polytopes (or supports) in n-dimensional space, n <= 3.

    Returns:
        The exact mixed volume.
    """
    hulls = [p.hull() if isinstance(p, Support) else p for p in polytopes]
    n = len(hulls)
    if n == 0:
        raise InputError("Mixed volume needs at least one polytope")
    if n > MAX_EXACT_DIM:
        raise InputError(f"Mixed volume oracle is limited to n <= {MAX_EXACT_DIM}")
    if any(p.ambient != n for p in hulls):
        raise InputError(f"All {n} polytopes must live in dimension {n}")
    total = Fraction(0)
    for size in range(1, n + 1):
        sign = -1 if (n - size) % 2 else 1
        for subset in combinations(hulls, size):
            summed = subset[0]
            for p in subset[1:]:
                summed = summed + p
            total += sign * summed.lebesgue_volume()
    return total


class Support:
    """The exponent set of a sparse polynomial.

    Rows of `Support.exponents` are pairwise distinct integer exponent
    vectors. Row order is significant: coefficient and covariance vectors are
    indexed by it.

    <u>__Example usage:__</u>
    ```python
    # Univariate supports may be given as a flat list
    quadratic = Support([0, 1, 2])
    assert quadratic.n == 1 and len(quadratic) == 3
    # The standard battery
    Support.simplex(2)   # rows (0, 0), (1, 0), (0, 1)
    Support.cube(2)      # rows (0, 0), (1, 0), (0, 1), (1, 1)
    ```
    """

    def __init__(self, exponents):
        """Initialize the class.

        Args:
            exponents: Integer array of shape (M, n), or a flat list of M
                integers for a univariate support.

        Raises:
            InputError: On empty, non-integer or repeated rows.
        """
        arr = np.asarray(exponents)
        if arr.ndim == 1:
            arr = arr.reshape(-1, 1)
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise InputError(f"Support must be a non-empty 2D array, got {arr.shape}")
        if not np.issubdtype(arr.dtype, np.integer):
            if not np.issubdtype(arr.dtype, np.number) or not np.all(
                np.isfinite(arr) & (np.round(arr) == arr)
            ):
                raise InputError("Support exponents must be integers")
        arr = arr.astype(np.int64)
        rows = [tuple(r) for r in arr.tolist()]
        if len(set(rows)) != len(rows):
            raise InputError("Support rows must be pairwise distinct")
        arr.setflags(write=False)
        self.__exponents: np.ndarray = arr
        self.__rows: tuple[tuple[int, ...], ...] = tuple(rows)

    @property
    def exponents(self) -> np.ndarray:
        """Read-only integer array of shape (M, n)."""
        return self.__exponents

    @property
    def rows(self) -> tuple[tuple[int, ...], ...]:
        """The exponent vectors as tuples."""
        return self.__rows

    @property
    def n(self) -> int:
        """Number of variables."""
        return self.__exponents.shape[1]

    @property
    def size(self) -> int:
        """Number of monomials M."""
        return self.__exponents.shape[0]

    @cached_property
    def full_dim(self) -> bool:
        """If the convex hull of the rows has affine dimension n."""
        rank, _ = _affine_frame([tuple(Fraction(c) for c in r) for r in self.__rows])
        return rank == self.n

    def require_full_dim(self):
        """Raise `toricond.logic.InputError` unless `Support.full_dim`."""
        if not self.full_dim:
            raise InputError(f"Support is not full dimensional: {self.__rows}")

    def hull(self) -> Polytope:
        """The Newton polytope."""
        return self._hull

    @cached_property
    def _hull(self) -> Polytope:
        return Polytope(self.__rows)

    def normalized_volume(self) -> Fraction:
        """Normalized volume of the Newton polytope."""
        return self.hull().normalized_volume()

    def dilate(self, factor: int) -> "Support":
        """The support with every exponent multiplied by *factor*."""
        if factor < 1:
            raise InputError(f"Dilation factor must be positive, got {factor}")
        return Support(self.__exponents * int(factor))

    def export(self) -> list[list[int]]:
        """Export the rows as nested lists."""
        return [list(r) for r in self.__rows]

    @classmethod
    def simplex(cls, n: int, scale: int = 1) -> "Support":
        """Vertices of the standard simplex scaled by *scale*."""
        rows = np.vstack([np.zeros(n, dtype=np.int64), np.eye(n, dtype=np.int64)])
        return cls(scale * rows)

    @classmethod
    def linear(cls, n: int) -> "Support":
        """The support of affine linear polynomials in n variables."""
        return cls.simplex(n)

    @classmethod
    def cube(cls, n: int, scale: int = 1) -> "Support":
        """Vertices of the unit cube scaled by *scale*."""
        corners = sorted(product((0, 1), repeat=n), key=lambda c: (sum(c), c[::-1]))
        return cls(scale * np.array(corners, dtype=np.int64))

    @classmethod
    def dense_simplex(cls, n: int, degree: int) -> "Support":
        """All exponents with non-negative entries summing to at most *degree*.

        Rows are ordered by total degree.
        """
        rows = [c for c in product(range(degree + 1), repeat=n) if sum(c) <= degree]
        rows.sort(key=lambda c: (sum(c), c[::-1]))
        return cls(np.array(rows, dtype=np.int64).reshape(-1, n))

    @classmethod
    def segment(cls, degree: int) -> "Support":
        """All exponents 0..degree of a dense univariate polynomial."""
        return cls(np.arange(degree + 1, dtype=np.int64))

    def __len__(self) -> int:
        """Number of monomials."""
        return self.size

    def __eq__(self, other) -> bool:
        """Equality (row order included)."""
        if isinstance(other, Support):
            return self.__rows == other.rows
        return False

    def __hash__(self):
        """Hash."""
        return hash(self.__rows)

    def __repr__(self):
        """Repr."""
        return f"<Support n={self.n} {self.export()}>"
