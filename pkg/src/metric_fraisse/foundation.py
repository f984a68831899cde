"""Shared substrate: exact rationals, subset bitmasks, enumerated tuples, d_infty.

Every structure value in this package is a :class:`fractions.Fraction`.  Bulk
comparisons are done on integer arrays scaled to a common denominator, so the
numpy fast paths never round.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import gcd, lcm
from typing import Iterable, Sequence

import numpy as np

MAX_POINTS = 16

# int64 headroom used before falling back to object (Python int) arrays
_INT64_SAFE = 1 << 61


class StructureError(ValueError):
    """Raised when a structure or an operation's precondition is invalid."""


class SizeLimitError(StructureError):
    pass


def rational(x) -> Fraction:
    """Coerce ``x`` to a Fraction.  Accepts ints, Fractions and "p/q" strings.

    Floats are rejected: nothing in the kernel is allowed to round.
    """
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        s = x.strip()
        if not s or any(c in s for c in ".eE"):
            raise StructureError(f"not an exact rational: {x!r}")
        try:
            return Fraction(s)
        except (ValueError, ZeroDivisionError) as exc:
            raise StructureError(f"not an exact rational: {x!r}") from exc
    raise TypeError(f"cannot use {type(x).__name__} as an exact rational")


def format_rational(q: Fraction) -> str:
    q = rational(q)
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def check_size(n: int, limit: int = MAX_POINTS) -> None:
    if n > limit:
        raise SizeLimitError(f"{n} points exceeds the limit of {limit}")


# -- bitmask lattice -----------------------------------------------------------

def mask_of(indices: Iterable[int]) -> int:
    m = 0
    for i in indices:
        m |= 1 << i
    return m


def bits(mask: int) -> list[int]:
    """Indices set in ``mask``, ascending."""
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return out


def popcount(mask: int) -> int:
    return bin(mask).count("1")


def submasks(mask: int) -> Iterable[int]:
    """All submasks of ``mask`` in ascending order (including 0 and mask)."""
    if mask == 0:
        yield 0
        return
    idx = bits(mask)
    for k in range(1 << len(idx)):
        yield mask_of(idx[j] for j in range(len(idx)) if k >> j & 1)


def supersets(mask: int, full: int) -> Iterable[int]:
    rest = full & ~mask
    for s in submasks(rest):
        yield mask | s


@lru_cache(maxsize=None)
def popcounts(n: int) -> np.ndarray:
    pc = np.zeros(1 << n, dtype=np.int64)
    for i in range(n):
        pc[1 << i:1 << (i + 1)] = pc[:1 << i] + 1
    return pc


@lru_cache(maxsize=8)
def disjoint_pairs(n: int) -> tuple[np.ndarray, np.ndarray]:
    """All 3**n ordered pairs (A, C) of disjoint subsets of an n-set."""
    a = np.zeros(1, dtype=np.int64)
    c = np.zeros(1, dtype=np.int64)
    for i in range(n):
        b = 1 << i
        a = np.concatenate([a, a | b, a])
        c = np.concatenate([c, c, c | b])
    return a, c


def iter_disjoint_pairs(n: int, block: int = 12):
    """Yield (A, C) disjoint-pair arrays in chunks of at most 3**block pairs."""
    if n <= block:
        yield disjoint_pairs(n)
        return
    lo_a, lo_c = disjoint_pairs(block)
    hi_a, hi_c = disjoint_pairs(n - block)
    for ha, hc in zip(hi_a.tolist(), hi_c.tolist()):
        yield lo_a | (ha << block), lo_c | (hc << block)


def expand_table(positions: Sequence[int]) -> np.ndarray:
    """Map each compressed mask over ``positions`` to the mask it denotes."""
    out = np.zeros(1, dtype=np.int64)
    for p in positions:
        out = np.concatenate([out, out | (1 << p)])
    return out


# -- exact integer arrays ------------------------------------------------------

def int_array(values: Sequence[int]) -> np.ndarray:
    """int64 array when every entry is comfortably in range, else object array."""
    vals = list(values)
    big = max((abs(v) for v in vals), default=0)
    if big < _INT64_SAFE >> 4:
        return np.array(vals, dtype=np.int64)
    return np.array(vals, dtype=object)


def scale_to_integers(values: Iterable[Fraction]) -> tuple[list[int], int]:
    """Return (numerators, L) with value_i == numerators_i / L."""
    vals = [rational(v) for v in values]
    den = 1
    for v in vals:
        den = lcm(den, v.denominator)
    return [v.numerator * (den // v.denominator) for v in vals], den


def normalize(num: np.ndarray, den: int) -> tuple[np.ndarray, int]:
    """Reduce ``num / den`` so that gcd(all numerators, den) == 1."""
    g = den
    for v in np.unique(np.abs(num)).tolist():
        g = gcd(g, int(v))
        if g == 1:
            return num, den
    if g > 1:
        num = num // g
        den //= g
    return num, den


def rescale(arr: np.ndarray, factor: int) -> np.ndarray:
    if factor == 1:
        return arr
    if arr.dtype != object:
        big = int(np.abs(arr).max(initial=0))
        if big * factor < _INT64_SAFE:
            return arr * factor
        arr = arr.astype(object)
    return arr * factor


def max_abs_difference(x: np.ndarray, dx: int, y: np.ndarray, dy: int) -> Fraction:
    """max |x/dx - y/dy| over matching entries, exactly."""
    if x.size == 0:
        return Fraction(0)
    den = lcm(dx, dy)
    diff = rescale(x, den // dx) - rescale(y, den // dy)
    return Fraction(int(np.abs(diff).max()), den)


# -- enumerated tuples and d_infty ---------------------------------------------

@dataclass(frozen=True)
class EnumeratedTuple:
    """An ordered list of point indices (repeats allowed) into one structure."""

    structure: object
    entries: tuple[int, ...]

    def __post_init__(self):
        entries = tuple(int(e) for e in self.entries)
        object.__setattr__(self, "entries", entries)
        n = self.structure.size
        for e in entries:
            if not 0 <= e < n:
                raise StructureError(f"tuple entry {e} is not a point of the structure")

    def __len__(self) -> int:
        return len(self.entries)

    @classmethod
    def of(cls, structure, labels: Sequence) -> "EnumeratedTuple":
        """Build a tuple from point labels rather than indices."""
        return cls(structure, tuple(structure.index_of(x) for x in labels))

    def labels(self) -> tuple:
        return tuple(self.structure.points[e] for e in self.entries)


def _check_comparable(a: EnumeratedTuple, b: EnumeratedTuple) -> None:
    if len(a) != len(b):
        raise StructureError(f"tuple lengths differ: {len(a)} != {len(b)}")
    ka, kb = a.structure.kind, b.structure.kind
    if ka != kb:
        raise StructureError(f"cannot compare a {ka} tuple with a {kb} tuple")
    a.structure.check_same_signature(b.structure)


def d_infty(a: EnumeratedTuple, b: EnumeratedTuple) -> Fraction:
    """Largest predicate discrepancy over corresponding position subsets.

    Diversities compare delta on every position subset (the deduplicated
    point set).  Processes compare the joint law of every position subset,
    i.e. every predicate ``P(X(t_X) = s)``.
    """
    _check_comparable(a, b)
    if len(a) == 0:
        return Fraction(0)
    pa, da = a.structure.tuple_profile(a.entries)
    pb, db = b.structure.tuple_profile(b.entries)
    return a.structure.profile_distance(pa, da, pb, db, len(a))


def dK_lower_bound(a: EnumeratedTuple, b: EnumeratedTuple) -> Fraction:
    """Certified lower bound d_infty / n on the embedding distance d_K."""
    d = d_infty(a, b)
    return d / len(a) if len(a) else Fraction(0)


# -- finite metrics ------------------------------------------------------------

class FiniteMetric:
    """Symmetric rational distance matrix on labelled points."""

    def __init__(self, points: Sequence, d: Sequence[Sequence]):
        self.points = tuple(points)
        n = len(self.points)
        if len(set(self.points)) != n:
            raise StructureError("duplicate point labels")
        rows = [tuple(rational(x) for x in row) for row in d]
        if len(rows) != n or any(len(r) != n for r in rows):
            raise StructureError(f"distance matrix must be {n}x{n}")
        for i in range(n):
            if rows[i][i] != 0:
                raise StructureError(f"nonzero diagonal at {self.points[i]!r}")
            for j in range(i + 1, n):
                if rows[i][j] != rows[j][i]:
                    raise StructureError(
                        f"asymmetric entry ({self.points[i]!r}, {self.points[j]!r})")
                if rows[i][j] < 0:
                    raise StructureError(
                        f"negative distance ({self.points[i]!r}, {self.points[j]!r})")
        self.d = tuple(rows)

    @property
    def size(self) -> int:
        return len(self.points)

    def index_of(self, label) -> int:
        try:
            return self.points.index(label)
        except ValueError:
            raise StructureError(f"unknown point {label!r}") from None

    def __call__(self, x, y) -> Fraction:
        return self.d[self.index_of(x)][self.index_of(y)]

    def __eq__(self, other):
        if not isinstance(other, FiniteMetric):
            return NotImplemented
        return self.points == other.points and self.d == other.d

    __hash__ = None

    def __repr__(self):
        return f"FiniteMetric(points={self.points!r})"

    @property
    def is_semimetric_only(self) -> bool:
        n = self.size
        return any(self.d[i][j] == 0 for i in range(n) for j in range(i + 1, n))

    def triangle_violation(self):
        """First (x, y, z) with d(x, z) > d(x, y) + d(y, z), or None."""
        n = self.size
        d = self.d
        for i in range(n):
            for k in range(n):
                for j in range(n):
                    if d[i][k] > d[i][j] + d[j][k]:
                        return self.points[i], self.points[j], self.points[k]
        return None

    def restrict(self, labels: Sequence) -> "FiniteMetric":
        idx = [self.index_of(x) for x in labels]
        return FiniteMetric([self.points[i] for i in idx],
                            [[self.d[i][j] for j in idx] for i in idx])
