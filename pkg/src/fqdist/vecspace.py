"""Points and point sets in F_q^d.

A point x = (x_1, ..., x_d) has index sum(x_i * q**(i-1)).  A PointSet keeps
a packed bitset of length q**d over those indices plus the cached sorted
index list.  Coordinates are 1-based in the public API (PinSpec.j, the j
argument of valid_pins), matching the usual mathematical notation.

Random generators draw from numpy's PCG64 bit generator seeded through
``numpy.random.SeedSequence``; same seed, same set.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .errors import BadDimension, EmptySet, FieldMismatch, NoSqrtMinusOne, SizeTooLarge
from .ffield import FieldElement, FieldSpec

INDEX_CAP = 1 << 28


def make_rng(seed) -> np.random.Generator:
    """PCG64 generator from an int or a SeedSequence."""
    if isinstance(seed, np.random.Generator):
        return seed
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    return np.random.Generator(np.random.PCG64(ss))


def space_size(field: FieldSpec, d: int) -> int:
    if d < 1:
        raise BadDimension(f"d={d} must be >= 1")
    n = field.q ** d
    if n > INDEX_CAP:
        raise SizeTooLarge(f"q^d = {n} exceeds index cap {INDEX_CAP}")
    return n


def encode(field: FieldSpec, coords: np.ndarray) -> np.ndarray:
    coords = np.asarray(coords, dtype=np.int64)
    weights = field.q ** np.arange(coords.shape[-1], dtype=np.int64)
    return coords @ weights


def decode(field: FieldSpec, d: int, idx: np.ndarray) -> np.ndarray:
    idx = np.asarray(idx, dtype=np.int64)
    weights = field.q ** np.arange(d, dtype=np.int64)
    return (idx[..., None] // weights) % field.q


@dataclass(frozen=True)
class Point:
    field: FieldSpec
    coords: tuple[int, ...]

    def __post_init__(self):
        if len(self.coords) < 1:
            raise BadDimension("a point needs at least one coordinate")
        if any(not 0 <= c < self.field.q for c in self.coords):
            raise ValueError(f"coordinate out of range for F_{self.field.q}")

    @property
    def d(self) -> int:
        return len(self.coords)


def norm(x: Point) -> FieldElement:
    """x_1^2 + ... + x_d^2."""
    f = x.field
    return f.element(int(norms(f, np.array([x.coords]))[0]))


def norms(field: FieldSpec, coords: np.ndarray) -> np.ndarray:
    coords = np.asarray(coords, dtype=np.int64)
    acc = np.zeros(coords.shape[:-1], dtype=np.int64)
    for i in range(coords.shape[-1]):
        acc = field.add(acc, field.sq_table[coords[..., i]])
    return acc


def dots(field: FieldSpec, X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    """Pairwise x.y for rows of X against rows of Y."""
    acc = np.zeros((X.shape[0], Y.shape[0]), dtype=np.int64)
    for i in range(X.shape[1]):
        acc = field.add(acc, field.mul(X[:, i][:, None], Y[:, i][None, :]))
    return acc


class PointSet:
    """Immutable subset of F_q^d."""

    def __init__(self, field: FieldSpec, d: int, indices: Iterable[int] | np.ndarray):
        n = space_size(field, d)
        if not isinstance(indices, np.ndarray):
            indices = list(indices)
        idx = np.unique(np.asarray(indices, dtype=np.int64))
        if idx.size and (idx[0] < 0 or idx[-1] >= n):
            raise ValueError("point index out of range")
        indicator = np.zeros(n, dtype=bool)
        indicator[idx] = True
        self.field = field
        self.d = d
        self.bits = np.packbits(indicator, bitorder="little")
        self.size = int(idx.size)
        self.__dict__["indices"] = idx

    @classmethod
    def from_coords(cls, field: FieldSpec, coords) -> "PointSet":
        arr = np.asarray(coords, dtype=np.int64)
        if arr.ndim != 2:
            raise BadDimension("coords must be an (n, d) array")
        if arr.size and (arr.min() < 0 or arr.max() >= field.q):
            raise ValueError(f"coordinate out of range for F_{field.q}")
        return cls(field, arr.shape[1], encode(field, arr))

    @classmethod
    def from_points(cls, field: FieldSpec, d: int, points: Iterable[Sequence[int]]) -> "PointSet":
        pts = [tuple(int(c) for c in pt) for pt in points]
        if not pts:
            return cls(field, d, [])
        if any(len(pt) != d for pt in pts):
            raise BadDimension(f"every point needs {d} coordinates")
        return cls.from_coords(field, pts)

    @cached_property
    def indices(self) -> np.ndarray:  # pragma: no cover - set in __init__
        return np.flatnonzero(self.indicator)

    @cached_property
    def indicator(self) -> np.ndarray:
        n = self.field.q ** self.d
        return np.unpackbits(self.bits, count=n, bitorder="little").astype(bool)

    @cached_property
    def coords(self) -> np.ndarray:
        arr = decode(self.field, self.d, self.indices)
        arr.setflags(write=False)
        return arr

    def points(self) -> list[tuple[int, ...]]:
        return [tuple(int(c) for c in row) for row in self.coords]

    def __len__(self) -> int:
        return self.size

    def __iter__(self):
        return iter(self.points())

    def __contains__(self, pt) -> bool:
        if isinstance(pt, Point):
            pt = pt.coords
        if len(pt) != self.d:
            return False
        i = int(encode(self.field, np.array(pt)))
        return bool(self.bits[i >> 3] >> (i & 7) & 1)

    def __eq__(self, other) -> bool:
        if not isinstance(other, PointSet):
            return NotImplemented
        return self.field == other.field and self.d == other.d and np.array_equal(self.bits, other.bits)

    def __hash__(self):
        return hash((self.field, self.d, self.bits.tobytes()))

    def __repr__(self) -> str:
        return f"PointSet(q={self.field.q}, d={self.d}, size={self.size})"

    def issubset(self, other: "PointSet") -> bool:
        same_space(self, other)
        return bool(np.all((self.bits & ~other.bits) == 0))

    def union(self, other: "PointSet") -> "PointSet":
        same_space(self, other)
        return PointSet(self.field, self.d, np.union1d(self.indices, other.indices))

    def translate(self, v: Sequence[int]) -> "PointSet":
        f = self.field
        shifted = f.add(self.coords, np.asarray(v, dtype=np.int64)[None, :])
        return PointSet.from_coords(f, shifted) if self.size else self

    def permute(self, order: Sequence[int]) -> "PointSet":
        return PointSet.from_coords(self.field, self.coords[:, list(order)]) if self.size else self


def same_space(a: PointSet, b: PointSet) -> None:
    if a.field != b.field or a.d != b.d:
        raise FieldMismatch(f"{a!r} and {b!r} live in different spaces")


@dataclass(frozen=True)
class PinSpec:
    j: int
    z: int

    def check(self, field: FieldSpec, d: int) -> None:
        if not 1 <= self.j <= d:
            raise BadDimension(f"pin coordinate j={self.j} outside [1, {d}]")
        if not 0 <= self.z < field.q:
            raise ValueError(f"pin value z={self.z} outside F_{field.q}")

    def __str__(self) -> str:
        return f"{self.j},{self.z}"

    @classmethod
    def parse(cls, text: str) -> "PinSpec":
        j, z = text.split(",")
        return cls(int(j), int(z))


def projection_size(E: PointSet, j: int) -> int:
    if not 1 <= j <= E.d:
        raise BadDimension(f"j={j} outside [1, {E.d}]")
    c = np.delete(E.coords, j - 1, axis=1)
    if c.shape[1] == 0:
        return 1 if E.size else 0
    return int(np.unique(encode(E.field, c)).size)


def pin_slice(E: PointSet, pin: PinSpec) -> PointSet:
    """pi_j(E) re-embedded with coordinate j set to z.

    This is the whole projection, not E intersected with {x_j = z}; points
    of the result need not lie in E.
    """
    if E.size == 0:
        raise EmptySet("pin_slice of an empty set")
    pin.check(E.field, E.d)
    c = np.array(E.coords)
    c[:, pin.j - 1] = pin.z
    return PointSet.from_coords(E.field, c)


def valid_pins(E: PointSet, j: int) -> frozenset[int]:
    if not 1 <= j <= E.d:
        raise BadDimension(f"j={j} outside [1, {E.d}]")
    return frozenset(int(v) for v in np.unique(E.coords[:, j - 1]))


# -- generators --------------------------------------------------------------

def _product(field: FieldSpec, factors: Sequence[Iterable[int]]) -> PointSet:
    d = len(factors)
    space_size(field, d)
    axes = [np.unique(np.asarray(list(a), dtype=np.int64)) for a in factors]
    for a in axes:
        if a.size and (a[0] < 0 or a[-1] >= field.q):
            raise ValueError(f"factor element out of range for F_{field.q}")
    if any(a.size == 0 for a in axes):
        return PointSet(field, d, [])
    idx = np.zeros(1, dtype=np.int64)
    for i, a in enumerate(axes):
        idx = (idx[:, None] + a[None, :] * field.q ** i).ravel()
    return PointSet(field, d, idx)


def random_set(field: FieldSpec, d: int, n: int, seed) -> PointSet:
    total = space_size(field, d)
    if not 0 <= n <= total:
        raise SizeTooLarge(f"cannot draw {n} distinct points from {total}")
    rng = make_rng(seed)
    return PointSet(field, d, rng.choice(total, size=n, replace=False))


def random_factors(field: FieldSpec, sizes: Sequence[int], seed) -> list[list[int]]:
    rng = make_rng(seed)
    out = []
    for m in sizes:
        if not 0 <= m <= field.q:
            raise SizeTooLarge(f"factor size {m} exceeds q={field.q}")
        out.append(sorted(int(v) for v in rng.choice(field.q, size=m, replace=False)))
    return out


def isotropic_line(field: FieldSpec, d: int = 2) -> PointSet:
    """{(t, i t)} where i is the canonical square root of -1."""
    if d != 2:
        raise BadDimension("the isotropic line lives in dimension 2")
    i = field.sqrt_minus_one()
    if i is None:
        raise NoSqrtMinusOne(f"-1 is not a square in F_{field.q}")
    t = field.elements()
    return PointSet.from_coords(field, np.stack([t, field.mul(t, i)], axis=1))


def sphere(field: FieldSpec, d: int, t: int) -> PointSet:
    n = space_size(field, d)
    idx = np.arange(n, dtype=np.int64)
    return PointSet(field, d, idx[norms(field, decode(field, d, idx)) == t])


def full_space(field: FieldSpec, d: int) -> PointSet:
    return PointSet(field, d, np.arange(space_size(field, d), dtype=np.int64))


def interval_grid(field: FieldSpec, d: int, m: int) -> PointSet:
    if not 0 <= m <= field.q:
        raise SizeTooLarge(f"grid side {m} exceeds q={field.q}")
    return _product(field, [range(m)] * d)


KIND_ALIASES = {
    "line": "isotropic_line",
    "full": "full_space",
    "grid": "interval_grid",
}


def generate(kind: str, field: FieldSpec, d: int = 2, seed=0, **params) -> PointSet:
    """Build a point set by family name.

    kinds: random(n), product(factors), random_product(sizes),
    isotropic_line, sphere(t), full_space, interval_grid(m).
    """
    kind = KIND_ALIASES.get(kind, kind)
    if kind == "random":
        return random_set(field, d, int(params["n"]), seed)
    if kind == "product":
        return _product(field, params["factors"])
    if kind == "random_product":
        return _product(field, random_factors(field, params["sizes"], seed))
    if kind == "isotropic_line":
        return isotropic_line(field, d)
    if kind == "sphere":
        return sphere(field, d, int(params["t"]))
    if kind == "full_space":
        return full_space(field, d)
    if kind == "interval_grid":
        return interval_grid(field, d, int(params["m"]))
    raise ValueError(f"unknown generator kind {kind!r}")


product_set = _product
