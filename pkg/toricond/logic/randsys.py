"""Gaussian ensembles of sparse systems, regions of the torus, and d_P.

An `Ensemble` pairs n supports with their covariances and fixes the field of
the coefficients. A `SparseSystem` holds one whitened coefficient vector per
equation, so sampled coefficients are i.i.d. standard normal and the norm of
a coefficient vector is plain Euclidean.

<u>__Example usage:__</u>
```python
ens = Ensemble.unmixed(Support.simplex(2))
f = sample(ens, seed=42)
g = sample(ens, seed=43)
dp_distance(f, g)                         # in [0, sqrt(2)]
evaluate(f, ens, TorusPoint([0, 0], [0, 0]))
```

A `Region` is a finite union of boxes U_p × U_q in logarithmic coordinates,
kept pairwise disjoint. Boxes are half-open; zero-width intervals denote a
single coordinate value and carry zero volume.
"""
from typing import Iterable, NamedTuple, Optional, Sequence, Union
import math
import numpy as np
from toricond.logic import Field, InputError
from toricond.logic.supports import Support
from toricond.logic.kahler import (
    DiagonalCovariance,
    TorusPoint,
    KahlerFrame,
    veronese,
    veronese_hat,
    hessian,
)


TWO_PI = 2 * np.pi
SeedLike = Union[int, np.random.Generator]


class Ensemble:
    """A square Gaussian ensemble: n pairs of (support, covariance) and a field."""

    def __init__(
        self,
        items: Sequence[tuple[Support, DiagonalCovariance]],
        field: Union[Field, str] = Field.COMPLEX,
    ):
        """Initialize the class.

        Args:
            items: One (support, covariance) pair per equation. All supports
                must have n variables, with n the number of pairs.
            field: `toricond.logic.Field` or its name.
        """
        items = tuple((s, c) for s, c in items)
        n = len(items)
        if n < 1:
            raise InputError("Ensemble needs at least one equation")
        for i, (support, covariance) in enumerate(items):
            if support.n != n:
                raise InputError(
                    f"Equation {i} has {support.n} variables in a system of {n}"
                )
            covariance.check(support)
        self.__items = items
        self.__field = Field.parse(field)

    @property
    def items(self) -> tuple[tuple[Support, DiagonalCovariance], ...]:
        """The (support, covariance) pairs."""
        return self.__items

    @property
    def supports(self) -> tuple[Support, ...]:
        """The supports."""
        return tuple(s for s, _ in self.__items)

    @property
    def covariances(self) -> tuple[DiagonalCovariance, ...]:
        """The covariances."""
        return tuple(c for _, c in self.__items)

    @property
    def n(self) -> int:
        """Number of variables and equations."""
        return len(self.__items)

    @property
    def field(self) -> Field:
        """The coefficient field."""
        return self.__field

    @property
    def sizes(self) -> tuple[int, ...]:
        """Number of monomials of each equation."""
        return tuple(s.size for s in self.supports)

    @property
    def is_unmixed(self) -> bool:
        """If all supports and all covariances coincide."""
        s0, c0 = self.__items[0]
        return all(s == s0 and c == c0 for s, c in self.__items[1:])

    @property
    def full_dim(self) -> bool:
        """If every support is full dimensional."""
        return all(s.full_dim for s in self.supports)

    def require_full_dim(self):
        """Raise `toricond.logic.InputError` unless every support is full dim."""
        for s in self.supports:
            s.require_full_dim()

    def frames(self, point: TorusPoint) -> list[KahlerFrame]:
        """The Kähler frames of all equations at *point*."""
        return [KahlerFrame(s, c, point) for s, c in self.__items]

    def hessians(self, p, require_full_dim: bool = True) -> np.ndarray:
        """Hessians of all potentials at points *p*, shape (n, ..., n, n)."""
        return np.stack(
            [hessian(s, c, p, require_full_dim) for s, c in self.__items]
        )

    def with_field(self, field: Union[Field, str]) -> "Ensemble":
        """The same ensemble over another field."""
        return Ensemble(self.__items, field)

    def export(self) -> dict:
        """Export to a serializable dictionary."""
        return {
            "field": self.__field.name.lower(),
            "equations": [
                {"support": s.export(), "covariance": c.export()}
                for s, c in self.__items
            ],
        }

    @classmethod
    def from_exported(cls, data: dict) -> "Ensemble":
        """Get an ensemble from an `Ensemble.export` dictionary."""
        items = [
            (Support(eq["support"]), DiagonalCovariance(eq["covariance"]))
            for eq in data["equations"]
        ]
        return cls(items, data.get("field", "complex"))

    @classmethod
    def unmixed(
        cls,
        support: Support,
        covariance: Optional[DiagonalCovariance] = None,
        field: Union[Field, str] = Field.COMPLEX,
    ) -> "Ensemble":
        """n copies of one (support, covariance), identity covariance by default."""
        if covariance is None:
            covariance = DiagonalCovariance.identity(support.size)
        return cls([(support, covariance)] * support.n, field)

    @classmethod
    def linear(cls, n: int, field: Union[Field, str] = Field.COMPLEX) -> "Ensemble":
        """The linear ensemble: unit simplices with identity covariance."""
        return cls.unmixed(Support.linear(n), field=field)

    @classmethod
    def kostlan(
        cls,
        n: int,
        degree: int,
        field: Union[Field, str] = Field.COMPLEX,
    ) -> "Ensemble":
        """The unitarily invariant ensemble of dense degree *degree* polynomials."""
        covariance, support = kostlan_covariance(degree, n)
        return cls.unmixed(support, covariance, field)

    def __eq__(self, other) -> bool:
        """Equality."""
        if isinstance(other, Ensemble):
            return self.items == other.items and self.field == other.field
        return False

    def __hash__(self):
        """Hash."""
        return hash((self.__items, self.__field))

    def __repr__(self):
        """Repr."""
        return f"<Ensemble n={self.n} {self.field.name.lower()} sizes={self.sizes}>"


class SparseSystem:
    """Whitened coefficient vectors f = (f¹, ..., fⁿ) of a sparse system."""

    def __init__(self, coeffs: Sequence):
        """Initialize the class.

        Args:
            coeffs: One coefficient vector per equation. Real vectors stay real.
        """
        arrays = []
        for c in coeffs:
            arr = np.array(c).ravel()
            if not (np.issubdtype(arr.dtype, np.number) and arr.size >= 1):
                raise InputError("Coefficient vectors must be non-empty and numeric")
            dtype = np.complex128 if np.iscomplexobj(arr) else np.float64
            arr = arr.astype(dtype)
            if not np.all(np.isfinite(arr)):
                raise InputError("Coefficients must be finite")
            arr.setflags(write=False)
            arrays.append(arr)
        if not arrays:
            raise InputError("A system needs at least one equation")
        self.__coeffs: tuple[np.ndarray, ...] = tuple(arrays)

    @property
    def coeffs(self) -> tuple[np.ndarray, ...]:
        """The coefficient vectors."""
        return self.__coeffs

    @property
    def n(self) -> int:
        """Number of equations."""
        return len(self.__coeffs)

    @property
    def is_real(self) -> bool:
        """If all coefficients are stored as reals."""
        return not any(np.iscomplexobj(c) for c in self.__coeffs)

    def norms(self) -> np.ndarray:
        """Euclidean norms of the coefficient vectors."""
        return np.array([np.linalg.norm(c) for c in self.__coeffs])

    def norm(self) -> float:
        """Euclidean norm of the whole coefficient vector."""
        return float(np.linalg.norm(self.norms()))

    def normalized(self) -> "SparseSystem":
        """Every coefficient vector scaled to unit norm."""
        norms = self.norms()
        if np.any(norms == 0):
            raise InputError("Cannot normalize a zero coefficient vector")
        return SparseSystem([c / nrm for c, nrm in zip(self.__coeffs, norms)])

    def scale(self, factors: Sequence) -> "SparseSystem":
        """Multiply equation i by factors[i]."""
        if len(factors) != self.n:
            raise InputError(f"Expected {self.n} factors, got {len(factors)}")
        return SparseSystem([c * x for c, x in zip(self.__coeffs, factors)])

    def check(self, ensemble: Ensemble):
        """Raise `toricond.logic.InputError` if shapes differ from *ensemble*."""
        sizes = tuple(c.size for c in self.__coeffs)
        if sizes != ensemble.sizes:
            raise InputError(f"System sizes {sizes} do not match {ensemble.sizes}")

    def raw(self, ensemble: Ensemble) -> list[np.ndarray]:
        """Coefficients in the plain monomial basis, f_α · sqrt(C_αα)."""
        self.check(ensemble)
        return [c * cov.sqrt for c, cov in zip(self.__coeffs, ensemble.covariances)]

    @classmethod
    def from_raw(cls, ensemble: Ensemble, raw: Sequence) -> "SparseSystem":
        """Whiten plain monomial coefficients for *ensemble*."""
        return cls(
            [np.asarray(r) / cov.sqrt for r, cov in zip(raw, ensemble.covariances)]
        )

    def export(self) -> dict:
        """Export to a serializable dictionary of real and imaginary parts."""
        return {
            "real": [c.real.tolist() for c in self.__coeffs],
            "imag": [np.imag(c).tolist() for c in self.__coeffs],
        }

    def __add__(self, other: "SparseSystem") -> "SparseSystem":
        """Coefficient-wise sum."""
        if not isinstance(other, SparseSystem):
            return NotImplemented
        if other.n != self.n:
            raise InputError("Cannot add systems of different sizes")
        return SparseSystem([a + b for a, b in zip(self.__coeffs, other.coeffs)])

    def __len__(self) -> int:
        """Number of equations."""
        return self.n

    def __iter__(self):
        """Iterate the coefficient vectors."""
        return iter(self.__coeffs)

    def __getitem__(self, index: int) -> np.ndarray:
        """Coefficient vector of equation *index*."""
        return self.__coeffs[index]

    def __repr__(self):
        """Repr."""
        return f"<SparseSystem sizes={tuple(c.size for c in self.__coeffs)}>"


def _generator(seed: SeedLike) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(int(seed))


def sample(ensemble: Ensemble, seed: SeedLike) -> SparseSystem:
    """Draw a system from *ensemble*.

    Whitened coefficients are i.i.d. standard normal. Complex coefficients have
    independent standard normal real and imaginary parts.

    Args:
        ensemble: The ensemble.
        seed: An integer seed or a numpy `Generator`.
    """
    rng = _generator(seed)
    coeffs = []
    for size in ensemble.sizes:
        c = rng.standard_normal(size)
        if ensemble.field is Field.COMPLEX:
            c = c + 1j * rng.standard_normal(size)
        coeffs.append(c)
    return SparseSystem(coeffs)


def evaluate(
    f: SparseSystem,
    ensemble: Ensemble,
    point: TorusPoint,
    normalized: bool = False,
) -> np.ndarray:
    """Evaluate the system at *point*: component i is fⁱ · v̂_{Aᵢ}(p + iq).

    Args:
        f: The system.
        ensemble: The ensemble of the system.
        point: The point.
        normalized: Evaluate against the unit vectors v_{Aᵢ} instead, giving
            values bounded by the coefficient norms.
    """
    f.check(ensemble)
    vec = veronese if normalized else veronese_hat
    return np.array(
        [c @ vec(s, cov, point) for c, (s, cov) in zip(f, ensemble.items)]
    )


def relative_residual(f: SparseSystem, ensemble: Ensemble, point: TorusPoint) -> float:
    """‖(fⁱ · v_{Aᵢ})ᵢ‖ / ‖f‖, the residual used to accept roots."""
    return float(np.linalg.norm(evaluate(f, ensemble, point, True)) / f.norm())


def fiber_projection(
    f: SparseSystem,
    ensemble: Ensemble,
    point: TorusPoint,
) -> SparseSystem:
    """Project every fⁱ onto the systems g with g · v̂_{Aᵢ} = 0 at *point*.

    Real systems at real points (q in {0, π}) stay real.
    """
    f.check(ensemble)
    projected = []
    for c, (s, cov) in zip(f, ensemble.items):
        v = veronese(s, cov, point)
        if not np.iscomplexobj(c) and np.max(np.abs(v.imag)) <= 1e-12:
            v = v.real
        projected.append(c - (c @ v) * np.conj(v))
    return SparseSystem(projected)


def _check_pair(f: SparseSystem, g: SparseSystem):
    if f.n != g.n or any(a.size != b.size for a, b in zip(f, g)):
        raise InputError("Systems must have the same shape")


def dp_distance(f: SparseSystem, g: SparseSystem) -> float:
    """The multiprojective distance sqrt(Σᵢ sin²∠(fⁱ, gⁱ)).

    `sin²∠(a, b) = 1 − |⟨a, b⟩|² / (‖a‖²‖b‖²)`, invariant under scaling of any
    component of either argument.

    Raises:
        InputError: If a component of either system is zero.
    """
    _check_pair(f, g)
    total = 0.0
    for a, b in zip(f, g):
        aa = np.vdot(a, a).real
        bb = np.vdot(b, b).real
        if aa == 0 or bb == 0:
            raise InputError("d_P is undefined for zero coefficient vectors")
        total += max(0.0, 1.0 - abs(np.vdot(a, b)) ** 2 / (aa * bb))
    return math.sqrt(total)


def hermitian_distance(f: SparseSystem, g: SparseSystem) -> float:
    """sqrt(Σᵢ ‖fⁱ/‖fⁱ‖ − gⁱ/‖gⁱ‖‖²), an upper bound of `dp_distance`."""
    _check_pair(f, g)
    fn = f.normalized()
    gn = g.normalized()
    return float(math.sqrt(sum(np.linalg.norm(a - b) ** 2 for a, b in zip(fn, gn))))


class RegionBox(NamedTuple):
    """A product of intervals p_lo <= p < p_hi, q_lo <= q < q_hi."""

    p_lo: tuple[float, ...]
    p_hi: tuple[float, ...]
    q_lo: tuple[float, ...]
    q_hi: tuple[float, ...]

    @property
    def lo(self) -> np.ndarray:
        """Lower corner in (p, q) coordinates."""
        return np.array(self.p_lo + self.q_lo)

    @property
    def hi(self) -> np.ndarray:
        """Upper corner in (p, q) coordinates."""
        return np.array(self.p_hi + self.q_hi)

    @property
    def is_degenerate(self) -> bool:
        """If some interval has zero width."""
        return bool(np.any(self.lo == self.hi))

    def volume(self) -> float:
        """Lebesgue volume of the box."""
        widths = self.hi - self.lo
        if np.any(widths == 0):
            return 0.0
        return float(np.prod(widths))

    def p_volume(self) -> float:
        """Lebesgue volume of the p-factor."""
        widths = np.array(self.p_hi) - np.array(self.p_lo)
        if np.any(widths == 0):
            return 0.0
        return float(np.prod(widths))

    def q_volume(self) -> float:
        """Lebesgue volume of the q-factor."""
        return float(np.prod(np.array(self.q_hi) - np.array(self.q_lo)))

    def contains(self, p: np.ndarray, q: np.ndarray) -> bool:
        """Membership of the point (p, q), q already reduced to [0, 2π)."""
        x = np.concatenate([p, q])
        lo, hi = self.lo, self.hi
        inside = np.where(lo == hi, x == lo, (lo <= x) & (x < hi))
        return bool(np.all(inside))

    def export(self) -> dict:
        """Export to a serializable dictionary."""
        return {
            "p": [[lo, hi] for lo, hi in zip(self.p_lo, self.p_hi)],
            "q": [[lo, hi] for lo, hi in zip(self.q_lo, self.q_hi)],
        }


def _box_overlap(a: RegionBox, b: RegionBox) -> bool:
    return bool(np.all(np.maximum(a.lo, b.lo) < np.minimum(a.hi, b.hi)))


def _box_from(lo: np.ndarray, hi: np.ndarray, n: int) -> RegionBox:
    lo = tuple(float(x) for x in lo)
    hi = tuple(float(x) for x in hi)
    return RegionBox(lo[:n], hi[:n], lo[n:], hi[n:])


def _box_subtract(box: RegionBox, other: RegionBox) -> list[RegionBox]:
    """Half-open set difference box \\ other as disjoint boxes."""
    if box.is_degenerate or other.is_degenerate or not _box_overlap(box, other):
        return [box]
    n = len(box.p_lo)
    lo, hi = box.lo, box.hi
    olo, ohi = other.lo, other.hi
    pieces = []
    for k in range(2 * n):
        if lo[k] < olo[k]:
            piece_hi = hi.copy()
            piece_hi[k] = olo[k]
            pieces.append(_box_from(lo.copy(), piece_hi, n))
            lo[k] = olo[k]
        if hi[k] > ohi[k]:
            piece_lo = lo.copy()
            piece_lo[k] = ohi[k]
            pieces.append(_box_from(piece_lo, hi.copy(), n))
            hi[k] = ohi[k]
    return pieces


def _split_wrapped(p_lo, p_hi, q_lo, q_hi) -> list[RegionBox]:
    """Split q-intervals with lo > hi into [lo, 2π) and [0, hi)."""
    choices = []
    for lo, hi in zip(q_lo, q_hi):
        if lo > hi:
            choices.append([(lo, TWO_PI), (0.0, hi)])
        else:
            choices.append([(lo, hi)])
    boxes = [()]
    for options in choices:
        boxes = [b + (o,) for b in boxes for o in options]
    return [
        RegionBox(
            tuple(p_lo),
            tuple(p_hi),
            tuple(o[0] for o in b),
            tuple(o[1] for o in b),
        )
        for b in boxes
    ]


class Region:
    """A finite union of pairwise disjoint boxes U_p × U_q of the torus.

    <u>__Example usage:__</u>
    ```python
    # p < 0, any angle
    lower = Region.from_p_box([-np.inf], [0.0])
    # -1 <= p < 1 and π/2 <= q < 3π/2
    window = Region(1, [([-1.0], [1.0], [np.pi / 2], [3 * np.pi / 2])])
    lower.union(window).volume
    ```
    """

    def __init__(self, n: int, boxes: Iterable[Sequence] = ()):
        """Initialize the class.

        Args:
            n: Number of coordinates.
            boxes: Boxes as (p_lo, p_hi, q_lo, q_hi) sequences. Missing or None
                q-bounds mean the full circle. p-bounds may be infinite.
                q-bounds must lie in [0, 2π]; q_lo > q_hi wraps around 2π.
                Later boxes are cut by earlier ones.
        """
        if n < 1:
            raise InputError("Regions need at least one coordinate")
        accepted: list[RegionBox] = []
        for raw in boxes:
            for box in self._parse_box(n, raw):
                pieces = [box]
                for existing in accepted:
                    pieces = [
                        q for piece in pieces for q in _box_subtract(piece, existing)
                    ]
                accepted.extend(pieces)
        self.__n = n
        self.__boxes: tuple[RegionBox, ...] = tuple(accepted)

    @staticmethod
    def _parse_box(n: int, raw) -> list[RegionBox]:
        if isinstance(raw, RegionBox):
            raw = tuple(raw)
        raw = tuple(raw) + (None,) * (4 - len(raw))
        p_lo, p_hi, q_lo, q_hi = raw
        p_lo = np.atleast_1d(np.asarray(p_lo, dtype=np.float64))
        p_hi = np.atleast_1d(np.asarray(p_hi, dtype=np.float64))
        q_lo = np.zeros(n) if q_lo is None else np.atleast_1d(np.asarray(q_lo, float))
        q_hi = np.full(n, TWO_PI) if q_hi is None else np.atleast_1d(
            np.asarray(q_hi, float)
        )
        bounds = {"p_lo": p_lo, "p_hi": p_hi, "q_lo": q_lo, "q_hi": q_hi}
        for name, arr in bounds.items():
            if arr.shape != (n,) or np.any(np.isnan(arr)):
                raise InputError(f"Box bound {name} must be {n} numbers, got {arr}")
        if np.any(p_lo > p_hi):
            raise InputError(f"Box p-bounds are reversed: {p_lo} > {p_hi}")
        if np.any(q_lo < 0) or np.any(q_hi > TWO_PI) or np.any(q_lo > TWO_PI):
            raise InputError(f"Box q-bounds must lie in [0, 2π]: {q_lo}, {q_hi}")
        p_lo = tuple(float(x) for x in p_lo)
        p_hi = tuple(float(x) for x in p_hi)
        return _split_wrapped(p_lo, p_hi, q_lo.tolist(), q_hi.tolist())

    @property
    def n(self) -> int:
        """Number of coordinates."""
        return self.__n

    @property
    def boxes(self) -> tuple[RegionBox, ...]:
        """The disjoint boxes."""
        return self.__boxes

    @property
    def is_empty(self) -> bool:
        """If the region has no boxes."""
        return not self.__boxes

    @property
    def volume(self) -> float:
        """Lebesgue volume λ(U) (may be infinite)."""
        return float(sum(b.volume() for b in self.__boxes))

    @property
    def is_p_bounded(self) -> bool:
        """If all p-bounds are finite."""
        return all(
            np.all(np.isfinite(b.p_lo)) and np.all(np.isfinite(b.p_hi))
            for b in self.__boxes
        )

    def p_projection(self) -> "Region":
        """The region U_p × [0, 2π)ⁿ over the p-projection of this region."""
        return Region(self.__n, [(b.p_lo, b.p_hi) for b in self.__boxes])

    def p_boxes(self) -> list[tuple[np.ndarray, np.ndarray]]:
        """Disjoint boxes of the p-projection as (lo, hi) arrays."""
        return [
            (np.array(b.p_lo), np.array(b.p_hi)) for b in self.p_projection().boxes
        ]

    def p_volume(self) -> float:
        """Lebesgue volume λ(U_p) of the p-projection."""
        return float(sum(b.p_volume() for b in self.p_projection().boxes))

    def contains(self, point: TorusPoint) -> bool:
        """If *point* lies in the region (angles modulo 2π)."""
        if point.n != self.__n:
            raise InputError(f"Point has {point.n} coordinates, region has {self.n}")
        return any(b.contains(point.p, point.q) for b in self.__boxes)

    def union(self, other: "Region") -> "Region":
        """The union; boxes of *self* are kept as they are."""
        if other.n != self.n:
            raise InputError("Cannot unite regions of different dimension")
        return Region(self.n, list(self.__boxes) + list(other.boxes))

    def export(self) -> list[dict]:
        """Export the boxes to serializable dictionaries."""
        return [b.export() for b in self.__boxes]

    @classmethod
    def full(cls, n: int) -> "Region":
        """The whole torus."""
        return cls(n, [(np.full(n, -np.inf), np.full(n, np.inf))])

    @classmethod
    def empty(cls, n: int) -> "Region":
        """The empty region."""
        return cls(n)

    @classmethod
    def from_p_box(cls, p_lo, p_hi) -> "Region":
        """The region p_lo <= p < p_hi with unrestricted angles."""
        p_lo = np.atleast_1d(np.asarray(p_lo, dtype=np.float64))
        return cls(p_lo.size, [(p_lo, p_hi)])

    @classmethod
    def point(cls, point: TorusPoint) -> "Region":
        """The region made of the single point *point*."""
        return cls(point.n, [(point.p, point.p, point.q, point.q)])

    def __repr__(self):
        """Repr."""
        return f"<Region n={self.n} boxes={len(self.boxes)} volume={self.volume}>"


def multinomial_weights(support: Support, degree: int) -> DiagonalCovariance:
    """Multinomial weights d! / (α! (d − |α|)!) of the rows of *support*.

    Raises:
        InputError: If a row of *support* has total degree above *degree*.
    """
    weights = []
    for row in support.rows:
        if min(row) < 0 or sum(row) > degree:
            raise InputError(f"Exponent {row} is outside the degree {degree} simplex")
        denominator = math.prod(math.factorial(a) for a in row)
        denominator *= math.factorial(degree - sum(row))
        weights.append(math.factorial(degree) / denominator)
    return DiagonalCovariance(weights)


def kostlan_covariance(degree: int, n: int) -> tuple[DiagonalCovariance, Support]:
    """The Kostlan covariance and support of dense degree *degree* polynomials.

    The support is every exponent vector of total degree at most *degree*, and
    the weights are `multinomial_weights`, so they sum to (n + 1)^degree.

    <u>__Example usage:__</u>
    ```python
    covariance, support = kostlan_covariance(2, 1)
    support.rows         # ((0,), (1,), (2,))
    covariance.weights   # [1., 2., 1.]
    ```

    Raises:
        InputError: If *degree* or *n* is below 1.
    """
    if degree < 1 or n < 1:
        raise InputError(f"Kostlan ensembles need d, n >= 1, got d={degree}, n={n}")
    support = Support.dense_simplex(n, degree)
    return multinomial_weights(support, degree), support
