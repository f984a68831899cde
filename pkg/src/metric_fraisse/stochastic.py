"""Finite S-valued processes viewed as metric structures on their index set.

A :class:`FiniteProcess` carries the full joint law of ``X(t)`` over its index
points as a sparse table ``{state-index tuple: probability}``; every finite
dimensional distribution is a marginal of it, so marginal consistency and the
permutation property hold by construction.
"""
from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Mapping, Sequence

import numpy as np

from .diversity import JointEmbedding
from .foundation import (
    EnumeratedTuple,
    FiniteMetric,
    StructureError,
    _check_comparable,
    bits,
    check_size,
    int_array,
    mask_of,
    rational,
    rescale,
    scale_to_integers,
)

# dense law arrays larger than this are refused
MAX_DENSE = 1 << 22


class FiniteProcess:
    """Joint law of a process on finitely many index points with finite states."""

    kind = "process"
    __slots__ = ("index", "states", "pmf", "semi", "_pos")

    def __init__(self, index: Sequence, states: Sequence, pmf: Mapping, semi: bool | None = None):
        self.index = tuple(index)
        self.states = tuple(states)
        k = len(self.index)
        check_size(k)
        if len(set(self.index)) != k:
            raise StructureError("duplicate index labels")
        if not self.states or len(set(self.states)) != len(self.states):
            raise StructureError("states must be a nonempty list of distinct labels")
        ns = len(self.states)
        table: dict[tuple, Fraction] = {}
        for outcome, p in pmf.items():
            outcome = tuple(int(s) for s in outcome)
            if len(outcome) != k or any(not 0 <= s < ns for s in outcome):
                raise StructureError(f"bad outcome {outcome!r}")
            p = rational(p)
            if p < 0:
                raise StructureError(f"negative probability at {outcome!r}")
            if p:
                table[outcome] = table.get(outcome, Fraction(0)) + p
        total = sum(table.values(), Fraction(0))
        if total != 1:
            raise StructureError(f"probabilities sum to {total}, not 1")
        self.pmf = dict(sorted(table.items()))
        self._pos = {t: i for i, t in enumerate(self.index)}
        degenerate = self.degenerate_pair()
        if semi is None:
            semi = degenerate is not None
        elif not semi and degenerate is not None:
            raise StructureError(
                f"index points {degenerate[0]!r} and {degenerate[1]!r} are almost surely equal")
        self.semi = bool(semi)

    @classmethod
    def from_labels(cls, index, states, pmf: Mapping, semi=None) -> "FiniteProcess":
        """Build from ``{tuple of state labels: probability}``."""
        spos = {s: i for i, s in enumerate(states)}
        table = {}
        for outcome, p in pmf.items():
            try:
                key = tuple(spos[s] for s in outcome)
            except KeyError as exc:
                raise StructureError(f"unknown state {exc.args[0]!r}") from None
            if key in table:
                raise StructureError(f"duplicate outcome {tuple(outcome)!r}")
            table[key] = p
        return cls(index, states, table, semi)

    # -- access ----------------------------------------------------------------

    @property
    def points(self) -> tuple:
        return self.index

    @property
    def size(self) -> int:
        return len(self.index)

    def index_of(self, label) -> int:
        try:
            return self._pos[label]
        except KeyError:
            raise StructureError(f"unknown index point {label!r}") from None

    def prob(self, outcome: Sequence) -> Fraction:
        """Probability of a full outcome given as state labels."""
        key = tuple(self.states.index(s) for s in outcome)
        return self.pmf.get(key, Fraction(0))

    def law(self, entries: Sequence[int]) -> dict[tuple, Fraction]:
        """Law of ``(X(t_e) for e in entries)``; repeated entries are allowed."""
        out: dict[tuple, Fraction] = defaultdict(Fraction)
        for outcome, p in self.pmf.items():
            out[tuple(outcome[e] for e in entries)] += p
        return dict(out)

    def distance(self, i: int, j: int) -> Fraction:
        """P(X(t_i) != X(t_j))."""
        return sum((p for o, p in self.pmf.items() if o[i] != o[j]), Fraction(0))

    def degenerate_pair(self):
        for i, j in combinations(range(self.size), 2):
            if all(o[i] == o[j] for o in self.pmf):
                return self.index[i], self.index[j]
        return None

    def __eq__(self, other):
        if not isinstance(other, FiniteProcess):
            return NotImplemented
        return (self.index == other.index and self.states == other.states
                and self.pmf == other.pmf)

    __hash__ = None

    def __repr__(self):
        tag = ", semi" if self.semi else ""
        return f"FiniteProcess(index={self.index!r}, states={self.states!r}{tag})"

    # -- structure protocol used by d_infty ------------------------------------

    def check_same_signature(self, other) -> None:
        if self.states != other.states:
            raise StructureError(f"state sets differ: {self.states} vs {other.states}")

    def tuple_profile(self, entries: Sequence[int]) -> tuple[np.ndarray, int]:
        """Dense scaled law of the tuple, shape (|S|,) * len(entries)."""
        n = len(entries)
        ns = len(self.states)
        if ns ** n > MAX_DENSE:
            raise StructureError(f"law over {ns}**{n} outcomes is too large")
        law = self.law(entries)
        keys = list(law)
        ints, den = scale_to_integers(law[k] for k in keys)
        vals = int_array(ints)
        arr = np.zeros((ns,) * n, dtype=vals.dtype)
        for k, v in zip(keys, vals):
            arr[k] = v
        return arr, den

    @staticmethod
    def profile_distance(pa, da, pb, db, n) -> Fraction:
        from math import lcm

        den = lcm(da, db)
        diff = rescale(pa, den // da) - rescale(pb, den // db)
        best = 0
        for m in range(1, 1 << n):
            drop = tuple(i for i in range(n) if not m >> i & 1)
            marg = diff.sum(axis=drop) if drop else diff
            best = max(best, int(np.abs(marg).max()))
        return Fraction(best, den)

    # -- derived structures ----------------------------------------------------

    def marginal(self, subset) -> "FiniteProcess":
        return marginal(self, subset)

    def restrict(self, subset) -> "FiniteProcess":
        return marginal(self, subset)

    def induced_metric(self) -> FiniteMetric:
        return induced_metric(self)

    def permuted(self, order: Sequence) -> "FiniteProcess":
        order = tuple(order)
        if len(order) != self.size or set(order) != set(self.index):
            raise StructureError("order must be a permutation of the index points")
        pos = [self.index_of(t) for t in order]
        return FiniteProcess(order, self.states, self.law(pos), self.semi)

    def relabel(self, mapping: Mapping) -> "FiniteProcess":
        return FiniteProcess([mapping.get(t, t) for t in self.index], self.states, self.pmf,
                             self.semi)


def _positions(P: FiniteProcess, subset) -> list[int]:
    if isinstance(subset, (int, np.integer)):
        m = int(subset)
        if m >> P.size:
            raise StructureError(f"mask {m} is out of range")
        return bits(m)
    return sorted(P.index_of(t) for t in subset)


def marginal(P: FiniteProcess, subset) -> FiniteProcess:
    """Law of the sub-process on ``subset`` (labels or mask), in index order."""
    pos = _positions(P, subset)
    if not pos:
        raise StructureError("cannot take the marginal on the empty set")
    return FiniteProcess([P.index[i] for i in pos], P.states, P.law(pos))


def induced_metric(P: FiniteProcess) -> FiniteMetric:
    n = P.size
    rows = [[Fraction(0)] * n for _ in range(n)]
    for i, j in combinations(range(n), 2):
        rows[i][j] = rows[j][i] = P.distance(i, j)
    return FiniteMetric(P.index, rows)


def check_consistency(P: FiniteProcess) -> bool:
    """Re-derive marginal consistency and the permutation property by summation.

    Raises StructureError on failure; returns True otherwise.
    """
    n = P.size
    for m in range(1, 1 << n):
        pos = bits(m)
        law = P.law(pos)
        if sum(law.values(), Fraction(0)) != 1:
            raise StructureError(f"marginal on {pos} does not sum to 1")
        for extra in range(n):
            if m >> extra & 1:
                continue
            wider = P.law(pos + [extra])
            summed: dict[tuple, Fraction] = defaultdict(Fraction)
            for o, p in wider.items():
                summed[o[:-1]] += p
            if {k: v for k, v in summed.items() if v} != law:
                raise StructureError(f"marginal inconsistency adding {extra} to {pos}")
        rev = P.law(pos[::-1])
        if {o[::-1]: p for o, p in rev.items()} != law:
            raise StructureError(f"permutation inconsistency on {pos}")
    return True


# -- total variation and couplings ---------------------------------------------

def _as_distribution(p) -> dict:
    if isinstance(p, Mapping):
        return {k: rational(v) for k, v in p.items()}
    return {i: rational(v) for i, v in enumerate(p)}


def _check_space(p, q, dp: dict, dq: dict) -> None:
    if not isinstance(p, Mapping) and not isinstance(q, Mapping):
        if len(dp) != len(dq):
            raise StructureError(f"outcome spaces differ: {len(dp)} vs {len(dq)} outcomes")
    lengths = {len(k) for k in list(dp) + list(dq) if isinstance(k, tuple)}
    if len(lengths) > 1:
        raise StructureError("outcome tuples have different lengths")
    for name, d in (("first", dp), ("second", dq)):
        if any(v < 0 for v in d.values()):
            raise StructureError(f"{name} distribution has a negative entry")
        if sum(d.values(), Fraction(0)) != 1:
            raise StructureError(f"{name} distribution does not sum to 1")


def total_variation(p, q) -> Fraction:
    """Half the L1 distance between two distributions on the same outcomes."""
    dp, dq = _as_distribution(p), _as_distribution(q)
    _check_space(p, q, dp, dq)
    keys = set(dp) | set(dq)
    return sum((abs(dp.get(k, 0) - dq.get(k, 0)) for k in keys), Fraction(0)) / 2


@dataclass(frozen=True)
class Coupling:
    """Joint law on pairs of outcomes whose marginals are ``left`` and ``right``."""

    joint: dict
    left: dict
    right: dict

    @property
    def mismatch(self) -> Fraction:
        return sum((p for (u, v), p in self.joint.items() if u != v), Fraction(0))

    def marginals(self) -> tuple[dict, dict]:
        lm: dict = defaultdict(Fraction)
        rm: dict = defaultdict(Fraction)
        for (u, v), p in self.joint.items():
            lm[u] += p
            rm[v] += p
        return dict(lm), dict(rm)


def _sort_key(k):
    return (0, k) if isinstance(k, tuple) else (1, repr(k))


def optimal_coupling(p, q) -> Coupling:
    """Coupling with P(U != V) equal to the total variation distance.

    Overlap mass min(p(u), q(u)) sits on the diagonal; the leftover mass of p
    and of q (disjoint supports) is coupled as a normalized product.
    """
    dp, dq = _as_distribution(p), _as_distribution(q)
    _check_space(p, q, dp, dq)
    keys = sorted(set(dp) | set(dq), key=_sort_key)
    joint: dict = {}
    rp, rq = {}, {}
    for k in keys:
        a, b = dp.get(k, Fraction(0)), dq.get(k, Fraction(0))
        m = min(a, b)
        if m:
            joint[(k, k)] = m
        if a > m:
            rp[k] = a - m
        if b > m:
            rq[k] = b - m
    tv = sum(rp.values(), Fraction(0))
    for u, a in rp.items():
        for v, b in rq.items():
            joint[(u, v)] = joint.get((u, v), Fraction(0)) + a * b / tv
    left = {k: v for k, v in dp.items() if v}
    right = {k: v for k, v in dq.items() if v}
    return Coupling(joint, left, right)


# -- amalgamation --------------------------------------------------------------

def _split_common(P1: FiniteProcess, P2: FiniteProcess):
    P1.check_same_signature(P2)
    common = [t for t in P1.index if t in P2._pos]
    e1 = [t for t in P1.index if t not in P2._pos]
    e2 = [t for t in P2.index if t not in P1._pos]
    if len(e1) != 1 or len(e2) != 1:
        raise StructureError(
            f"one-point amalgamation needs exactly one new point on each side, got {e1} and {e2}")
    return common, e1[0], e2[0]


def _conditionals(P: FiniteProcess, base: list[int], extra: int):
    """{base outcome: (P(base = s), {state: P(extra = state | base = s)})}."""
    joint: dict = defaultdict(lambda: defaultdict(Fraction))
    for o, p in P.pmf.items():
        joint[tuple(o[i] for i in base)][o[extra]] += p
    out = {}
    for s, row in joint.items():
        tot = sum(row.values(), Fraction(0))
        out[s] = (tot, {k: v / tot for k, v in row.items()})
    return out


def amalgamate(P1: FiniteProcess, P2: FiniteProcess) -> FiniteProcess:
    """Glue a+{w} and a+{z} over a by optimally coupling the conditionals.

    For every base outcome s with positive mass the conditional laws of X_w and
    X_z given s are coupled as in :func:`optimal_coupling`, so that
    ``d(w, z) = sum_s P(s) * d_TV(cond_w(s), cond_z(s))``.  Output index order
    is P1's followed by z.
    """
    common, w, z = _split_common(P1, P2)
    b1 = [P1.index_of(t) for t in common]
    b2 = [P2.index_of(t) for t in common]
    c1 = _conditionals(P1, b1, P1.index_of(w))
    c2 = _conditionals(P2, b2, P2.index_of(z))
    for s in sorted(set(c1) | set(c2)):
        m1 = c1[s][0] if s in c1 else Fraction(0)
        m2 = c2[s][0] if s in c2 else Fraction(0)
        if m1 != m2:
            raise StructureError(
                f"marginals on the common points differ at "
                f"{tuple(P1.states[i] for i in s)}: {m1} vs {m2}")
    iw = P1.index_of(w)
    pos = {t: i for i, t in enumerate(common)}
    out = {}
    for s, (mass, cond_w) in c1.items():
        cpl = optimal_coupling(cond_w, c2[s][1])
        for (sw, sz), q in cpl.joint.items():
            full = [0] * (P1.size + 1)
            for t, i in zip(P1.index, range(P1.size)):
                full[i] = sw if i == iw else s[pos[t]]
            full[-1] = sz
            out[tuple(full)] = mass * q
    return FiniteProcess(P1.index + (z,), P1.states, out)


def amalgam_distance_terms(P1: FiniteProcess, P2: FiniteProcess) -> dict[tuple, Fraction]:
    """P(base = s) * d_TV(conditionals at s) for each base outcome s."""
    common, w, z = _split_common(P1, P2)
    c1 = _conditionals(P1, [P1.index_of(t) for t in common], P1.index_of(w))
    c2 = _conditionals(P2, [P2.index_of(t) for t in common], P2.index_of(z))
    return {s: mass * total_variation(cw, c2[s][1]) for s, (mass, cw) in c1.items()}


def extend_over_base(Y: FiniteProcess, patch: FiniteProcess, base: Sequence | None = None
                     ) -> FiniteProcess:
    """Add the new point of ``patch`` to Y, conditionally independent given the base.

    The result lists Y's points followed by the new one; its marginals on Y and
    on the patch's points equal the inputs.
    """
    Y.check_same_signature(patch)
    if base is None:
        base = [t for t in patch.index if t in Y._pos]
    base = list(base)
    extra = [t for t in patch.index if t not in base]
    if len(extra) != 1:
        raise StructureError(f"patch must add exactly one point to the base, adds {extra}")
    z = extra[0]
    if z in Y._pos:
        raise StructureError(f"new point {z!r} already belongs to the base structure")
    check_size(Y.size + 1)
    yb = [Y.index_of(t) for t in base]
    cz = _conditionals(patch, [patch.index_of(t) for t in base], patch.index_of(z))
    ymass: dict = defaultdict(Fraction)
    for o, p in Y.pmf.items():
        ymass[tuple(o[i] for i in yb)] += p
    for s in sorted(set(ymass) | set(cz)):
        if ymass.get(s, 0) != (cz[s][0] if s in cz else 0):
            raise StructureError(
                f"patch disagrees with the structure at base outcome "
                f"{tuple(Y.states[i] for i in s)}")
    out = {}
    for o, p in Y.pmf.items():
        for sz, q in cz[tuple(o[i] for i in yb)][1].items():
            out[o + (sz,)] = p * q
    return FiniteProcess(Y.index + (z,), Y.states, out)


def join_independent(P1: FiniteProcess, P2: FiniteProcess) -> FiniteProcess:
    """Independent product on the disjoint union of the index sets."""
    P1.check_same_signature(P2)
    clash = set(P1.index) & set(P2.index)
    if clash:
        raise StructureError(f"join needs disjoint index labels, shared: {sorted(map(str, clash))}")
    check_size(P1.size + P2.size)
    out = {o1 + o2: p1 * p2 for o1, p1 in P1.pmf.items() for o2, p2 in P2.pmf.items()}
    return FiniteProcess(P1.index + P2.index, P1.states, out)


def quotient(P: FiniteProcess) -> FiniteProcess:
    """Merge index points that are almost surely equal; first label survives."""
    keep: list[int] = []
    for i in range(P.size):
        if not any(all(o[i] == o[j] for o in P.pmf) for j in keep):
            keep.append(i)
    return FiniteProcess([P.index[i] for i in keep], P.states, P.law(keep), semi=False)


def dK_upper_embedding(a: EnumeratedTuple, b: EnumeratedTuple) -> JointEmbedding:
    """Couple the whole vectors X(a) and X(b) optimally on 2n index points.

    ``bound = max_i P(X(a_i) != X(b_i))`` is at most the mismatch probability
    of the coupling, which equals the total variation of the two laws.
    """
    _check_comparable(a, b)
    if a.structure.kind != "process":
        raise StructureError("dK_upper_embedding here expects process tuples")
    n = len(a)
    cpl = optimal_coupling(a.structure.law(a.entries), b.structure.law(b.entries))
    joint = {u + v: p for (u, v), p in cpl.joint.items()}
    left = tuple(f"a{i + 1}" for i in range(n))
    right = tuple(f"b{i + 1}" for i in range(n))
    J = FiniteProcess(left + right, a.structure.states, joint)
    bound = max((J.distance(i, n + i) for i in range(n)), default=Fraction(0))
    return JointEmbedding(J, left, right, bound, "coupling")


def tuple_law_distance(a: EnumeratedTuple, b: EnumeratedTuple) -> Fraction:
    """d_TV between the laws of the two whole tuples."""
    return total_variation(a.structure.law(a.entries), b.structure.law(b.entries))
