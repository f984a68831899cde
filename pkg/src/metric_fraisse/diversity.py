"""Finite diversities as relational metric structures.

A diversity on ``n`` points is stored as one exact value per subset, indexed by
bitmask over the point order.  Values live as an integer numerator array over a
single common denominator; :meth:`FiniteDiversity.delta` hands back Fractions.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import lcm
from typing import Iterable, Mapping, Sequence

import numpy as np

from .foundation import (
    EnumeratedTuple,
    FiniteMetric,
    StructureError,
    _check_comparable,
    bits,
    check_size,
    d_infty,
    disjoint_pairs,
    expand_table,
    int_array,
    iter_disjoint_pairs,
    mask_of,
    max_abs_difference,
    normalize,
    popcounts,
    rational,
    rescale,
    scale_to_integers,
)


@dataclass(frozen=True)
class Violation:
    """Why a candidate table is not a (semi)diversity, with a concrete witness."""

    rule: str
    message: str
    witness: dict = field(default_factory=dict)


class DiversityError(StructureError):
    def __init__(self, violation: Violation):
        super().__init__(violation.message)
        self.violation = violation


class FiniteDiversity:
    """Exact finite (semi)diversity.

    ``values`` is indexed by subset mask (bit ``i`` set means ``points[i]`` is in
    the set) and must vanish on the empty set and on singletons.  The
    constructor checks shape only; use :func:`validate` for the axioms.
    """

    kind = "diversity"
    __slots__ = ("points", "_num", "_den", "semidiversity", "_index")

    def __init__(self, points: Sequence, values, semidiversity: bool | None = None):
        self.points = tuple(points)
        n = len(self.points)
        check_size(n)
        if len(set(self.points)) != n:
            raise StructureError("duplicate point labels")
        if isinstance(values, tuple) and len(values) == 2 and isinstance(values[0], np.ndarray):
            num, den = values
        else:
            vals = list(values)
            if len(vals) != 1 << n:
                raise StructureError(f"expected {1 << n} subset values, got {len(vals)}")
            ints, den = scale_to_integers(vals)
            num = int_array(ints)
        if num.shape != (1 << n,):
            raise StructureError("value array has the wrong shape")
        small = popcounts(n) <= 1
        if np.any(num[small] != 0):
            raise StructureError("delta must vanish on sets of size <= 1")
        self._num, self._den = normalize(num, den)
        self._index = {p: i for i, p in enumerate(self.points)}
        if semidiversity is None:
            semidiversity = self.has_zero_pair()
        self.semidiversity = bool(semidiversity)

    # -- basic access --------------------------------------------------------

    @property
    def size(self) -> int:
        return len(self.points)

    @property
    def full_mask(self) -> int:
        return (1 << self.size) - 1

    def index_of(self, label) -> int:
        try:
            return self._index[label]
        except KeyError:
            raise StructureError(f"unknown point {label!r}") from None

    def mask(self, labels: Iterable) -> int:
        return mask_of(self.index_of(x) for x in labels)

    def value(self, mask: int) -> Fraction:
        return Fraction(int(self._num[mask]), self._den)

    def delta(self, labels: Iterable) -> Fraction:
        return self.value(self.mask(labels))

    def values(self) -> list[Fraction]:
        return [Fraction(int(v), self._den) for v in self._num.tolist()]

    def table(self) -> dict[frozenset, Fraction]:
        """Values on every subset of size >= 2, keyed by frozenset of labels."""
        pc = popcounts(self.size)
        return {frozenset(self.points[i] for i in bits(m)): self.value(m)
                for m in range(1 << self.size) if pc[m] >= 2}

    def scaled(self) -> tuple[np.ndarray, int]:
        return self._num, self._den

    def distance(self, i: int, j: int) -> Fraction:
        return self.value((1 << i) | (1 << j))

    def has_zero_pair(self) -> bool:
        n = self.size
        return any(self._num[(1 << i) | (1 << j)] == 0
                   for i in range(n) for j in range(i + 1, n))

    def max_value(self) -> Fraction:
        return Fraction(int(self._num.max()), self._den)

    def __eq__(self, other):
        if not isinstance(other, FiniteDiversity):
            return NotImplemented
        return (self.points == other.points and self._den == other._den
                and np.array_equal(self._num, other._num))

    __hash__ = None

    def __repr__(self):
        tag = ", semi" if self.semidiversity else ""
        return f"FiniteDiversity(points={self.points!r}{tag})"

    # -- structure protocol used by d_infty ----------------------------------

    def check_same_signature(self, other) -> None:
        return None

    def tuple_profile(self, entries: Sequence[int]) -> tuple[np.ndarray, int]:
        """delta of the deduplicated point set for every position subset."""
        pos_to_points = np.zeros(1, dtype=np.int64)
        for e in entries:
            pos_to_points = np.concatenate([pos_to_points, pos_to_points | (1 << e)])
        return self._num[pos_to_points], self._den

    @staticmethod
    def profile_distance(pa, da, pb, db, n) -> Fraction:
        return max_abs_difference(pa, da, pb, db)

    # -- derived structures --------------------------------------------------

    def permuted(self, order: Sequence) -> "FiniteDiversity":
        """Same diversity with points listed in ``order`` (a permutation)."""
        order = tuple(order)
        if len(order) != self.size or set(order) != set(self.points):
            raise StructureError("order must be a permutation of the points")
        table = expand_table([self.index_of(x) for x in order])
        return FiniteDiversity(order, (self._num[table], self._den), self.semidiversity)

    def relabel(self, mapping: Mapping) -> "FiniteDiversity":
        new = [mapping.get(p, p) for p in self.points]
        return FiniteDiversity(new, (self._num, self._den))

    def restrict(self, subset) -> "FiniteDiversity":
        return restrict(self, subset)

    def induced_metric(self) -> FiniteMetric:
        return induced_metric(self)


def _scaled_pair(x: FiniteDiversity, y: FiniteDiversity):
    den = lcm(x._den, y._den)
    return rescale(x._num, den // x._den), rescale(y._num, den // y._den), den


def _as_mask(D: FiniteDiversity, subset) -> int:
    if isinstance(subset, (int, np.integer)):
        m = int(subset)
        if m < 0 or m > D.full_mask:
            raise StructureError(f"mask {m} is out of range")
        return m
    return D.mask(subset)


# -- validation --------------------------------------------------------------

def find_violation(D: FiniteDiversity, allow_semi: bool | None = None) -> Violation | None:
    """Check the diversity axioms through a reduced certificate.

    Nonnegativity, the zero pattern, one-element monotonicity and
    ``delta(A+b+C) <= delta(A+b) + delta(b+C)`` (A, C disjoint, b outside both)
    together are equivalent to the two diversity axioms.
    """
    if allow_semi is None:
        allow_semi = D.semidiversity
    n = D.size
    num = D._num
    labels = lambda m: sorted(D.points[i] for i in bits(m))  # noqa: E731

    neg = np.nonzero(num < 0)[0]
    if neg.size:
        m = int(neg[0])
        return Violation("nonnegativity", f"negative value on {labels(m)}",
                         {"set": labels(m), "value": D.value(m)})

    if not allow_semi:
        pc = popcounts(n)
        zero = np.nonzero((num == 0) & (pc >= 2))[0]
        if zero.size:
            m = int(zero[0])
            return Violation("D1", f"zero value on {labels(m)} with more than one point",
                             {"set": labels(m)})

    idx = np.arange(1 << n, dtype=np.int64)
    for x in range(n):
        without = idx[(idx >> x) & 1 == 0]
        bad = np.nonzero(num[without] > num[without | (1 << x)])[0]
        if bad.size:
            m = int(without[bad[0]])
            return Violation(
                "monotonicity",
                f"delta({labels(m)}) > delta({labels(m | 1 << x)})",
                {"A": labels(m), "x": D.points[x],
                 "delta_A": D.value(m), "delta_Ax": D.value(m | 1 << x)})

    best = None
    for b in range(n):
        bb = 1 << b
        low = bb - 1
        for a_small, c_small in iter_disjoint_pairs(n - 1):
            a = (a_small & low) | ((a_small >> b) << (b + 1))
            c = (c_small & low) | ((c_small >> b) << (b + 1))
            lhs = num[a | c | bb]
            bad = np.nonzero(lhs > num[a | bb] + num[c | bb])[0]
            if bad.size:
                # smallest offending union, then smallest A
                key = (a | c)[bad] * (1 << n) + a[bad]
                k = bad[int(np.argmin(key))]
                cand = (int(a[k] | c[k]), b, int(a[k]), int(c[k]))
                if best is None or cand < best:
                    best = cand
        if best is not None:
            break
    if best is not None:
        union, b, a, c = best
        lhs = D.value(union | 1 << b)
        r1, r2 = D.value(a | 1 << b), D.value(c | 1 << b)
        return Violation(
            "triangle",
            f"delta(A+b+C) = {lhs} > {r1} + {r2} for A={labels(a)}, "
            f"b={D.points[b]!r}, C={labels(c)}",
            {"A": labels(a), "b": D.points[b], "C": labels(c),
             "lhs": lhs, "rhs": r1 + r2})
    return None


def is_valid(D: FiniteDiversity, allow_semi: bool | None = None) -> bool:
    return find_violation(D, allow_semi) is None


def from_table(points: Sequence, table: Mapping, semidiversity: bool = False,
               check: bool = True) -> FiniteDiversity:
    """Build a diversity from ``{set of labels: value}`` for every subset of size >= 2."""
    points = tuple(points)
    n = len(points)
    check_size(n)
    index = {p: i for i, p in enumerate(points)}
    if len(index) != n:
        raise StructureError("duplicate point labels")
    vals: list = [Fraction(0)] * (1 << n)
    seen = set()
    for key, v in table.items():
        members = frozenset(key)
        unknown = [x for x in members if x not in index]
        if unknown:
            raise StructureError(f"unknown labels {sorted(map(str, unknown))}")
        if len(members) < 2:
            raise StructureError(f"set {sorted(map(str, members))} has fewer than two points")
        m = mask_of(index[x] for x in members)
        if m in seen:
            raise StructureError(f"duplicate entry for {sorted(map(str, members))}")
        seen.add(m)
        vals[m] = rational(v)
    pc = popcounts(n)
    missing = [m for m in range(1 << n) if pc[m] >= 2 and m not in seen]
    if missing:
        m = missing[0]
        raise DiversityError(Violation(
            "missing", f"no value for subset {sorted(points[i] for i in bits(m))}",
            {"set": sorted(points[i] for i in bits(m))}))
    D = FiniteDiversity(points, vals, semidiversity=semidiversity)
    if check:
        validate(D, allow_semi=semidiversity)
    return D


def validate(candidate, allow_semi: bool = False) -> FiniteDiversity:
    """Return the diversity if it satisfies the axioms, else raise DiversityError.

    ``candidate`` may be a FiniteDiversity or a ``(points, table)`` pair.
    """
    if not isinstance(candidate, FiniteDiversity):
        points, table = candidate
        return from_table(points, table, semidiversity=allow_semi)
    v = find_violation(candidate, allow_semi)
    if v is not None:
        raise DiversityError(v)
    return candidate


# -- basic operations --------------------------------------------------------

def induced_metric(D: FiniteDiversity) -> FiniteMetric:
    n = D.size
    rows = [[D.distance(i, j) if i != j else Fraction(0) for j in range(n)] for i in range(n)]
    return FiniteMetric(D.points, rows)


def restrict(D: FiniteDiversity, subset) -> FiniteDiversity:
    """Sub-diversity on ``subset`` (labels or a mask), keeping the point order."""
    m = _as_mask(D, subset)
    if m == 0:
        raise StructureError("cannot restrict to the empty set")
    idx = bits(m)
    table = expand_table(idx)
    return FiniteDiversity([D.points[i] for i in idx], (D._num[table], D._den))


def _split_common(D1: FiniteDiversity, D2: FiniteDiversity):
    common = [p for p in D1.points if p in D2._index]
    extra1 = [p for p in D1.points if p not in D2._index]
    extra2 = [p for p in D2.points if p not in D1._index]
    if len(extra1) != 1 or len(extra2) != 1:
        raise StructureError(
            "one-point amalgamation needs exactly one new point on each side, got "
            f"{extra1} and {extra2}")
    return common, extra1[0], extra2[0]


def _agreement_witness(D1, D2, common) -> list | None:
    t1 = expand_table([D1.index_of(x) for x in common])
    t2 = expand_table([D2.index_of(x) for x in common])
    x1, x2, _ = _scaled_pair(D1, D2)
    bad = np.nonzero(x1[t1] != x2[t2])[0]
    if bad.size:
        return [common[i] for i in bits(int(bad[0]))]
    return None


def amalgamate_one_point(D1: FiniteDiversity, D2: FiniteDiversity) -> FiniteDiversity:
    """Minimal amalgam of X+{z1} and X+{z2} over their common points X.

    For every A in X the new value is the largest of
    ``delta(A+B+z1) - delta(B+z2)`` and ``delta(A+C+z2) - delta(C+z1)`` over
    B, C in X, which is the least value any amalgam can take.  The result is
    listed as D1's points followed by z2.  Isomorphic extensions give
    ``delta({z1, z2}) == 0`` and come back flagged as a semidiversity.
    """
    common, z1, z2 = _split_common(D1, D2)
    witness = _agreement_witness(D1, D2, common)
    if witness is not None:
        raise StructureError(f"inputs disagree on the common subset {witness}")
    m = len(common)
    check_size(m + 2)
    i1 = [D1.index_of(x) for x in common]
    i2 = [D2.index_of(x) for x in common]
    x1, x2, den = _scaled_pair(D1, D2)
    t1, t2 = expand_table(i1), expand_table(i2)
    base = x1[t1]
    f1 = x1[t1 | (1 << D1.index_of(z1))]  # delta(S + z1) for S in X
    f2 = x2[t2 | (1 << D2.index_of(z2))]  # delta(S + z2)

    both = np.maximum(f1, f2).copy()
    for a, d in iter_disjoint_pairs(m):
        cand = np.maximum(f1[a | d] - f2[d], f2[a | d] - f1[d])
        np.maximum.at(both, a, cand)

    n = D1.size + 1
    out = np.zeros(1 << n, dtype=both.dtype if both.dtype == object else np.int64)
    tx = expand_table(i1)  # X keeps D1's positions; z2 goes last
    zb1, zb2 = 1 << D1.index_of(z1), 1 << (n - 1)
    out[tx] = base
    out[tx | zb1] = f1
    out[tx | zb2] = f2
    out[tx | zb1 | zb2] = both
    return FiniteDiversity(D1.points + (z2,), (out, den))


def extend_over_base(Y: FiniteDiversity, patch: FiniteDiversity, base: Sequence | None = None
                     ) -> FiniteDiversity:
    """Add the new point of ``patch`` (a diversity on base+{z}) to all of Y.

    The points of Y outside ``base`` are absorbed one at a time, each through a
    one-point minimal amalgam over the points absorbed so far.  The result is
    listed as Y's points followed by z and restricts to both Y and ``patch``.
    """
    if base is None:
        base = [p for p in patch.points if p in Y._index]
    base = list(base)
    for x in base:
        Y.index_of(x)
        patch.index_of(x)
    extra = [p for p in patch.points if p not in base]
    if len(extra) != 1:
        raise StructureError(f"patch must add exactly one point to the base, adds {extra}")
    z = extra[0]
    if z in Y._index:
        raise StructureError(f"new point {z!r} already belongs to the base structure")
    witness = _agreement_witness(Y, patch, base)
    if witness is not None:
        raise StructureError(f"patch disagrees with the structure on {witness}")
    check_size(Y.size + 1)
    cur = restrict(patch, base + [z]) if base else restrict(patch, [z])
    absorbed = list(base)
    for y in Y.points:
        if y in base:
            continue
        if not absorbed:
            # no common part: glue at the join value, the only free choice
            cur = join(cur, restrict(Y, [y]))
        else:
            cur = amalgamate_one_point(cur, restrict(Y, absorbed + [y]))
        absorbed.append(y)
    return cur.permuted(Y.points + (z,))


def join(D1: FiniteDiversity, D2: FiniteDiversity) -> FiniteDiversity:
    """Disjoint union; every set meeting both sides gets the largest input value."""
    clash = set(D1.points) & set(D2.points)
    if clash:
        raise StructureError(f"join needs disjoint labels, shared: {sorted(map(str, clash))}")
    n1, n2 = D1.size, D2.size
    check_size(n1 + n2)
    x1, x2, den = _scaled_pair(D1, D2)
    k = max(x1.max(), x2.max())
    out = np.full((1 << n2, 1 << n1), k, dtype=object if x1.dtype == object or x2.dtype == object
                  else np.int64)
    out[0, :] = x1
    out[:, 0] = x2
    out = out.reshape(-1)
    return FiniteDiversity(D1.points + D2.points, (out, den))


def quotient_classes(D: FiniteDiversity) -> list[list]:
    """Points grouped by induced distance zero, in first-appearance order."""
    classes: list[list[int]] = []
    for i in range(D.size):
        for cls in classes:
            if D._num[(1 << cls[0]) | (1 << i)] == 0:
                cls.append(i)
                break
        else:
            classes.append([i])
    return [[D.points[i] for i in cls] for cls in classes]


def quotient(D: FiniteDiversity) -> FiniteDiversity:
    """Identify points at distance zero; the first label of each class survives."""
    reps = [cls[0] for cls in quotient_classes(D)]
    Q = restrict(D, reps)
    return FiniteDiversity(Q.points, Q.scaled(), semidiversity=False)


# -- joint embeddings ----------------------------------------------------------

@dataclass(frozen=True)
class JointEmbedding:
    """A structure holding images of two tuples, and max_i d(a_i, b_i) inside it."""

    joint: object
    left: tuple
    right: tuple
    bound: Fraction
    method: str = "chain"

    def __iter__(self):
        # allows ``joint, bound = result``
        return iter((self.joint, self.bound))


def positional(t: EnumeratedTuple, labels: Sequence) -> FiniteDiversity:
    """The enumerated structure of ``t`` as a semidiversity on its positions."""
    prof, den = t.structure.tuple_profile(t.entries)
    return FiniteDiversity(labels, (prof.copy(), den))


# the closure fallback touches 3^(2n) subset pairs per sweep
CLOSURE_LIMIT = 6


def dK_upper_embedding(a: EnumeratedTuple, b: EnumeratedTuple) -> JointEmbedding:
    """Glue ``a`` and ``b`` into one semidiversity by repeated minimal amalgams.

    a_1 and b_1 become one point; then for k = 2, 3, ... a_k and b_k are each
    extended over everything built so far and amalgamated against each other.
    Every position gets its own point (repeated entries sit at distance 0), so
    the joint structure may be a semidiversity; :func:`quotient` recovers a
    strict one.  ``bound`` certifies ``d_K(a, b) <= bound``.

    Greedy minimal amalgams can park a point far from its partner, so the bound
    may exceed d_infty(a, b).  When that happens (and n <= CLOSURE_LIMIT) the
    result of :func:`closure_embedding` is returned instead, with
    ``method == "closure"``.
    """
    emb = chain_embedding(a, b)
    n = len(a)
    if n <= CLOSURE_LIMIT:
        eps = d_infty(a, b)
        if emb.bound > eps:
            alt = closure_embedding(a, b, eps)
            if alt is not None and alt.bound < emb.bound:
                return alt
    return emb


def chain_embedding(a: EnumeratedTuple, b: EnumeratedTuple) -> JointEmbedding:
    _check_comparable(a, b)
    if a.structure.kind != "diversity":
        raise StructureError("dK_upper_embedding here expects diversity tuples")
    n = len(a)
    if n == 0:
        return JointEmbedding(FiniteDiversity([], [0]), (), (), Fraction(0))
    la = [f"a{i + 1}" for i in range(n)]
    lb = [la[0]] + [f"b{i + 1}" for i in range(1, n)]
    PA = positional(a, la)
    PB = positional(b, lb)
    J = restrict(PA, [la[0]])
    for k in range(1, n):
        side_a = extend_over_base(J, restrict(PA, la[:k + 1]), la[:k])
        side_b = extend_over_base(J, restrict(PB, lb[:k + 1]), lb[:k])
        J = amalgamate_one_point(side_a, side_b)
    bound = max((J.delta([x, y]) for x, y in zip(la, lb) if x != y), default=Fraction(0))
    return JointEmbedding(J, tuple(la), tuple(lb), bound)


def _largest_below(g: np.ndarray, N: int) -> np.ndarray:
    """Greatest semidiversity table (with g[0] = 0) lying pointwise below ``g``.

    Alternates the monotonicity and triangle relaxations until nothing moves.
    Any semidiversity below ``g`` stays below every iterate, so the limit is
    the largest one.
    """
    g = g.copy()
    A, C = disjoint_pairs(N)
    m = np.arange(1 << N)
    while True:
        old = g.copy()
        for i in range(N):
            bit = 1 << i
            low = m[(m & bit) == 0]
            g[low] = np.minimum(g[low], g[low | bit])
        for i in range(N):
            bit = 1 << i
            sel = ((A | C) & bit) == 0
            x, y = A[sel], C[sel]
            # bit may also sit inside the union, hence the | bit on the target
            np.minimum.at(g, x | y | bit, g[x | bit] + g[y | bit])
        if np.array_equal(g, old):
            return g


def closure_embedding(a: EnumeratedTuple, b: EnumeratedTuple, eps=None) -> JointEmbedding | None:
    """Largest joint semidiversity with d(a_k, b_k) <= eps for every k.

    Cross sets S_a + T_b start from the cap min_k delta(S + a_k) + eps + delta(b_k + T),
    which any admissible joint structure must respect; the table is then
    relaxed to the largest semidiversity below the caps.  Returns None when the
    relaxation eats into either tuple's own values, i.e. no joint structure
    with that eps exists.
    """
    _check_comparable(a, b)
    n = len(a)
    check_size(2 * n)
    if eps is None:
        eps = d_infty(a, b)
    eps = rational(eps)
    la = [f"a{i + 1}" for i in range(n)]
    lb = [f"b{i + 1}" for i in range(n)]
    pa = positional(a, la).values()
    pb = positional(b, lb).values()
    lo = (1 << n) - 1
    caps = []
    for mask in range(1 << (2 * n)):
        S, T = mask & lo, mask >> n
        if not T:
            caps.append(pa[S])
        elif not S:
            caps.append(pb[T])
        else:
            caps.append(min(pa[S | 1 << k] + eps + pb[T | 1 << k] for k in range(n)))
    ints, den = scale_to_integers(caps)
    g = _largest_below(int_array(ints), 2 * n)
    J = FiniteDiversity(la + lb, (g, den))
    vals = J.values()
    if vals[: 1 << n] != pa or any(vals[T << n] != pb[T] for T in range(1 << n)):
        return None
    bound = max(J.delta([x, y]) for x, y in zip(la, lb))
    return JointEmbedding(J, tuple(la), tuple(lb), bound, "closure")
