"""Cut semidiversities, L1 decompositions and the K(2,3) obstruction.

A split of a ground set X is named by its side that avoids a fixed anchor
point.  A nonnegative combination of cut semidiversities is stored as a
:class:`CutWeights`; :func:`cut_diversity` evaluates it on every subset and
:func:`decompose` inverts that map.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Mapping, Sequence

import numpy as np

from .diversity import FiniteDiversity
from .foundation import (
    FiniteMetric,
    SizeLimitError,
    StructureError,
    bits,
    check_size,
    expand_table,
    int_array,
    mask_of,
    popcounts,
    rational,
    scale_to_integers,
)
from .simplex import check_certificate, find_nonnegative_solution

# exact elimination for the NotL1 witness is only attempted up to this size
WITNESS_LIMIT = 8
L1_METRIC_LIMIT = 6


@dataclass(frozen=True)
class CutWeights:
    """Weight per split, keyed by the side that does not contain ``anchor``."""

    points: tuple
    anchor: object
    weights: Mapping = field(default_factory=dict)

    def __post_init__(self):
        points = tuple(self.points)
        object.__setattr__(self, "points", points)
        if len(set(points)) != len(points):
            raise StructureError("duplicate point labels")
        if self.anchor not in points:
            raise StructureError(f"anchor {self.anchor!r} is not a point")
        clean = {}
        for side, w in self.weights.items():
            side = frozenset(side)
            if not side or self.anchor in side or not side <= set(points):
                raise StructureError(f"bad split side {sorted(map(str, side))}")
            w = rational(w)
            if w < 0:
                raise StructureError(f"negative weight {w} on side {sorted(map(str, side))}")
            if side in clean:
                raise StructureError(f"duplicate side {sorted(map(str, side))}")
            if w:
                clean[side] = w
        object.__setattr__(self, "weights", clean)

    def __eq__(self, other):
        if not isinstance(other, CutWeights):
            return NotImplemented
        return (self.points == other.points and self.anchor == other.anchor
                and self.weights == other.weights)

    __hash__ = None

    def side_mask(self, side) -> int:
        return mask_of(self.points.index(x) for x in side)

    def total(self) -> Fraction:
        return sum(self.weights.values(), Fraction(0))


@dataclass(frozen=True)
class NotL1:
    """Why a diversity has no nonnegative cut decomposition.

    ``reason`` is "inconsistent" (no signed decomposition either: the value
    on ``set`` is forced to ``implied`` by the equations before it) or
    "negative-weight" (the unique signed decomposition has negative entries,
    listed in ``negative``).
    """

    reason: str
    set: tuple = ()
    implied: Fraction | None = None
    actual: Fraction | None = None
    negative: dict = field(default_factory=dict)

    def describe(self) -> str:
        if self.reason == "inconsistent":
            return (f"cut equations force delta{{{', '.join(map(str, self.set))}}} = "
                    f"{self.implied}, but it is {self.actual}")
        sides = ", ".join(f"{sorted(map(str, s))}: {w}" for s, w in self.negative.items())
        return f"unique cut decomposition has negative weights ({sides})"


class L1Error(StructureError):
    def __init__(self, message: str, witness: NotL1 | None = None):
        super().__init__(message)
        self.witness = witness


def _axes_view(arr: np.ndarray, n: int) -> np.ndarray:
    # axis n-1-i of the view is bit i of the mask
    return arr.reshape((2,) * n) if n else arr


def _superset_sums(f: np.ndarray, n: int) -> np.ndarray:
    F = f.copy()
    v = _axes_view(F, n)
    for ax in range(n):
        lo = [slice(None)] * n
        hi = [slice(None)] * n
        lo[ax], hi[ax] = 0, 1
        v[tuple(lo)] += v[tuple(hi)]
    return F


def _subset_mobius(f: np.ndarray, n: int) -> np.ndarray:
    F = f.copy()
    v = _axes_view(F, n)
    for ax in range(n):
        lo = [slice(None)] * n
        hi = [slice(None)] * n
        lo[ax], hi[ax] = 0, 1
        v[tuple(hi)] -= v[tuple(lo)]
    return F


def evaluate_cuts(w: CutWeights, subset) -> Fraction:
    """Sum of the weights of the splits that separate ``subset``."""
    A = frozenset(subset)
    unknown = A - set(w.points)
    if unknown:
        raise StructureError(f"unknown labels {sorted(map(str, unknown))}")
    return sum((v for side, v in w.weights.items() if A & side and A - side), Fraction(0))


def _cut_values(n: int, weighted: dict[int, Fraction]) -> tuple[np.ndarray, int]:
    """Scaled values on every subset of sum_s weighted[s] * cut(s); signs allowed.

    A nonempty set is left uncut by a split exactly when one side contains it,
    so delta(A) = W - sum over sides S containing A of w(S).
    """
    sides = list(weighted)
    ints, den = scale_to_integers(weighted[s] for s in sides)
    vals = int_array(ints)
    f = np.zeros(1 << n, dtype=vals.dtype)
    full = (1 << n) - 1
    for m, v in zip(sides, vals):
        f[m] += v
        f[full ^ m] += v
    total = vals.sum() if len(vals) else 0
    num = total - _superset_sums(f, n)
    num[0] = 0
    return num, den


def cut_diversity(w: CutWeights) -> FiniteDiversity:
    """The semidiversity sum_U w_U * delta_{U|complement} on every subset."""
    n = len(w.points)
    check_size(n)
    num, den = _cut_values(n, {w.side_mask(s): v for s, v in w.weights.items()})
    return FiniteDiversity(w.points, (num, den))


def _resolve_anchor(points: tuple, anchor) -> int:
    if anchor is None:
        return 0
    if anchor not in points:
        raise StructureError(f"anchor {anchor!r} is not a point")
    return points.index(anchor)


def signed_weights(D: FiniteDiversity, anchor=None) -> dict[int, Fraction]:
    """The only signed cut combination matching D on sets that contain the anchor.

    With X' the points other than the anchor a and g(C) = delta(X) - delta(a + X' - C),
    g(C) is the total weight of sides inside C, so the weights are the subset
    Moebius inverse of g.  Keys are side masks over D's points.
    """
    n = D.size
    ai = _resolve_anchor(D.points, anchor)
    rest = [i for i in range(n) if i != ai]
    t = expand_table(rest)
    num, den = D.scaled()
    rest_full = mask_of(rest)
    g = num[D.full_mask] - num[(1 << ai) | (rest_full ^ t)]
    lam = _subset_mobius(g, len(rest))
    return {int(t[c]): Fraction(int(lam[c]), den) for c in range(1, len(t)) if lam[c]}


def _elimination_witness(D: FiniteDiversity, anchor_index: int) -> NotL1 | None:
    """First subset, in (size, mask) order, whose cut equation contradicts the earlier ones."""
    n = D.size
    rest = [i for i in range(n) if i != anchor_index]
    sides = [int(m) for m in expand_table(rest)[1:]]
    full = (1 << n) - 1
    pc = popcounts(n)
    order = sorted((m for m in range(1 << n) if pc[m] >= 2), key=lambda m: (pc[m], m))
    pivots: dict[int, tuple[list[Fraction], Fraction]] = {}
    for m in order:
        row = [Fraction(int(bool(m & s) and bool(m & (full ^ s)))) for s in sides]
        actual = D.value(m)
        rhs = actual
        for col, (prow, prhs) in pivots.items():
            f = row[col]
            if f:
                row = [a - f * b for a, b in zip(row, prow)]
                rhs -= f * prhs
        lead = next((j for j, v in enumerate(row) if v), None)
        if lead is None:
            if rhs:
                return NotL1("inconsistent", tuple(D.points[i] for i in bits(m)),
                             actual - rhs, actual)
            continue
        p = row[lead]
        row = [v / p for v in row]
        rhs /= p
        for col, (prow, prhs) in list(pivots.items()):
            f = prow[lead]
            if f:
                pivots[col] = ([a - f * b for a, b in zip(prow, row)], prhs - f * rhs)
        pivots[lead] = (row, rhs)
    return None


def decompose(D: FiniteDiversity, anchor=None) -> CutWeights | NotL1:
    """Nonnegative cut decomposition of D, or a certificate that none exists.

    The decomposition, when it exists, is unique.
    """
    ai = _resolve_anchor(D.points, anchor)
    lam = signed_weights(D, D.points[ai])
    num, den = _cut_values(D.size, lam)
    rebuilt = FiniteDiversity(D.points, (num, den), semidiversity=True)
    if rebuilt == D:
        negative = {frozenset(D.points[i] for i in bits(m)): v for m, v in lam.items() if v < 0}
        if negative:
            return NotL1("negative-weight", negative=negative)
        return CutWeights(D.points, D.points[ai],
                          {frozenset(D.points[i] for i in bits(m)): v for m, v in lam.items()})
    if D.size <= WITNESS_LIMIT:
        w = _elimination_witness(D, ai)
        if w is not None:
            return w
    # the signed weights already satisfy every equation on sets holding the anchor
    pc = popcounts(D.size)
    for m in sorted(range(1 << D.size), key=lambda m: (pc[m], m)):
        if rebuilt.value(m) != D.value(m):
            return NotL1("inconsistent", tuple(D.points[i] for i in bits(m)),
                         rebuilt.value(m), D.value(m))
    raise AssertionError("unreachable: rebuilt differs from D")


def inclusion_exclusion_weights(D: FiniteDiversity, z) -> dict[frozenset, Fraction]:
    """Weights of the splits separating ``z`` from part of the rest, from D alone.

    For an L1 diversity on A+{z}, the split U | (A - U) + {z} has weight
    sum over U <= V <= A of (-1)^{|V|-|U|} (delta(V+z) - delta(V)).  Keys are
    the side U (nonempty, never containing z).
    """
    zi = D.index_of(z)
    rest = [i for i in range(D.size) if i != zi]
    t = expand_table(rest)
    num, den = D.scaled()
    h = num[t | (1 << zi)] - num[t]
    k = len(rest)
    # superset Moebius inversion, done as a subset inversion on complements
    comp = (len(t) - 1) ^ np.arange(len(t))
    mu = _subset_mobius(h[comp], k)[comp]
    out = {}
    for c in range(1, len(t)):
        if mu[c]:
            out[frozenset(D.points[i] for i in bits(int(t[c])))] = Fraction(int(mu[c]), den)
    return out


# -- L1 amalgamation -------------------------------------------------------------

@dataclass(frozen=True)
class L1Amalgam:
    diversity: FiniteDiversity
    weights: CutWeights
    z_distance: Fraction
    bound: Fraction
    left: CutWeights
    right: CutWeights


def _l1_weights(D: FiniteDiversity, anchor) -> CutWeights:
    res = decompose(D, anchor)
    if isinstance(res, NotL1):
        raise L1Error(f"input on {list(D.points)} is not L1: {res.describe()}", res)
    return res


def amalgamate_l1(D1: FiniteDiversity, D2: FiniteDiversity, anchor=None) -> L1Amalgam:
    """L1 amalgam of A+{z1} and A+{z2} over A by per-split transportation.

    Each split U of A carries weight beta for D1 and gamma for D2, divided by
    where the new point goes.  The 2x2 transportation matrix with the given
    margins puts min(beta_U, gamma_U) on "both new points on the anchor side"
    and min(beta_{U+z1}, gamma_{U+z2}) on "both with U"; the rest is forced.
    Output points are D1's followed by z2.
    """
    common = [p for p in D1.points if p in D2._index]
    e1 = [p for p in D1.points if p not in D2._index]
    e2 = [p for p in D2.points if p not in D1._index]
    if len(e1) != 1 or len(e2) != 1 or not common:
        raise StructureError("L1 amalgamation needs a nonempty common part and one new point per side")
    z1, z2 = e1[0], e2[0]
    if anchor is None:
        anchor = common[0]
    if anchor not in common:
        raise StructureError(f"anchor {anchor!r} must be a common point")
    for k in range(2, len(common) + 1):
        for S in combinations(common, k):
            if D1.delta(S) != D2.delta(S):
                raise StructureError(f"inputs disagree on {list(S)}")
    beta = _l1_weights(D1, anchor)
    gamma = _l1_weights(D2, anchor)
    b, g = beta.weights, gamma.weights
    zero = Fraction(0)

    # inclusion-exclusion fast path must agree with the general decomposition
    for D, w, z in ((D1, beta, z1), (D2, gamma, z2)):
        fast = inclusion_exclusion_weights(D, z)
        for U, v in fast.items():
            side = U if anchor not in U else frozenset(D.points) - U
            if w.weights.get(side, zero) != v:
                raise AssertionError(f"inclusion-exclusion weight mismatch on {sorted(map(str, U))}")

    out: dict[frozenset, Fraction] = {}

    def put(side, v):
        if v:
            out[frozenset(side)] = out.get(frozenset(side), zero) + v

    others = [p for p in common if p != anchor]
    zdist = zero
    for k in range(1, len(others) + 1):
        for U in combinations(others, k):
            U = frozenset(U)
            b0, b1 = b.get(U, zero), b.get(U | {z1}, zero)
            g0, g1 = g.get(U, zero), g.get(U | {z2}, zero)
            m00 = min(b0, g0)
            m11 = min(b1, g1)
            put(U, m00)
            put(U | {z1, z2}, m11)
            put(U | {z1}, g0 - m00)
            put(U | {z2}, b0 - m00)
            zdist += abs(b0 - g0)
    bz, gz = b.get(frozenset([z1]), zero), g.get(frozenset([z2]), zero)
    m = min(bz, gz)
    put({z1, z2}, m)
    put({z1}, bz - m)
    put({z2}, gz - m)
    zdist += abs(bz - gz)

    W = CutWeights(D1.points + (z2,), anchor, out)
    D = cut_diversity(W)
    spread = zero
    for k in range(0, len(common) + 1):
        for V in combinations(common, k):
            spread = max(spread, abs(D1.delta(V + (z1,)) - D2.delta(V + (z2,))))
    return L1Amalgam(D, W, zdist, 4 ** len(common) * spread, beta, gamma)


# -- L1 metrics ------------------------------------------------------------------

@dataclass(frozen=True)
class PentagonalWitness:
    s3: tuple
    t2: tuple
    value: Fraction


def pentagonal_value(m: FiniteMetric, s3: Sequence, t2: Sequence) -> Fraction:
    """Within-pair sums of S3 and T2 minus the cross sums (unordered pairs)."""
    s3, t2 = tuple(s3), tuple(t2)
    if len(set(s3)) != 3 or len(set(t2)) != 2:
        raise StructureError("need three distinct points and two distinct points")
    if set(s3) & set(t2):
        raise StructureError("the two point sets must be disjoint")
    inside = sum((m(x, y) for x, y in combinations(s3, 2)), Fraction(0)) + m(*t2)
    cross = sum((m(x, y) for x in s3 for y in t2), Fraction(0))
    return inside - cross


def pentagonal_check(m: FiniteMetric, s3: Sequence, t2: Sequence) -> PentagonalWitness | None:
    v = pentagonal_value(m, s3, t2)
    return PentagonalWitness(tuple(s3), tuple(t2), v) if v > 0 else None


def pentagonal_violations(m: FiniteMetric) -> list[PentagonalWitness]:
    """Every (S3, T2) selection violating the pentagonal inequality."""
    out = []
    for five in combinations(m.points, 5):
        for s3 in combinations(five, 3):
            t2 = tuple(x for x in five if x not in s3)
            w = pentagonal_check(m, s3, t2)
            if w is not None:
                out.append(w)
    return out


@dataclass(frozen=True)
class Infeasible:
    """Farkas certificate: multipliers y per pair with sum_pairs y*d > 0 and y*cut <= 0."""

    points: tuple
    certificate: dict

    def describe(self) -> str:
        return "no nonnegative cut combination matches the metric"


def _cut_system(points: tuple, anchor_index: int):
    n = len(points)
    rest = [i for i in range(n) if i != anchor_index]
    sides = [int(s) for s in expand_table(rest)[1:]]
    pairs = list(combinations(range(n), 2))
    A = [[int(bool(s >> i & 1) != bool(s >> j & 1)) for s in sides] for i, j in pairs]
    return sides, pairs, A


def is_l1_metric(m: FiniteMetric, anchor=None) -> CutWeights | Infeasible:
    """Exact cut-cone membership for metrics on at most six points."""
    n = m.size
    if n > L1_METRIC_LIMIT:
        raise SizeLimitError(f"L1 metric check supports at most {L1_METRIC_LIMIT} points, got {n}")
    ai = _resolve_anchor(m.points, anchor)
    if n < 2:
        return CutWeights(m.points, m.points[ai], {})
    sides, pairs, A = _cut_system(m.points, ai)
    b = [m.d[i][j] for i, j in pairs]
    res = find_nonnegative_solution(A, b)
    if res.feasible:
        w = {frozenset(m.points[i] for i in bits(s)): x for s, x in zip(sides, res.x) if x}
        return CutWeights(m.points, m.points[ai], w)
    y = res.certificate
    if not check_certificate(A, b, y):
        raise AssertionError("simplex returned an invalid infeasibility certificate")
    cert = {(m.points[i], m.points[j]): v for (i, j), v in zip(pairs, y) if v}
    return Infeasible(m.points, cert)


def cut_metric(w: CutWeights) -> FiniteMetric:
    D = cut_diversity(w)
    n = D.size
    return FiniteMetric(D.points, [[D.distance(i, j) if i != j else 0 for j in range(n)]
                                   for i in range(n)])


# -- the K(2,3) obstruction ------------------------------------------------------

def _metric(points, pairs: Mapping) -> FiniteMetric:
    n = len(points)
    rows = [[Fraction(0)] * n for _ in range(n)]
    for (x, y), v in pairs.items():
        i, j = points.index(x), points.index(y)
        rows[i][j] = rows[j][i] = rational(v)
    return FiniteMetric(points, rows)


def k23_metric() -> FiniteMetric:
    """Shortest-path metric of the complete bipartite graph with parts {a,b,c}, {z1,z2}."""
    pts = ("a", "b", "c", "z1", "z2")
    pairs = {(x, y): 2 for x, y in combinations("abc", 2)}
    pairs.update({(x, z): 1 for x in "abc" for z in ("z1", "z2")})
    pairs[("z1", "z2")] = 2
    return _metric(pts, pairs)


def nap_inputs() -> tuple[FiniteMetric, FiniteMetric]:
    """Two 5-point L1 metrics over {a,b,c,e} with no L1 amalgam."""
    base = {("a", "b"): 2, ("a", "c"): 2, ("a", "e"): 2, ("b", "c"): 2, ("b", "e"): 2,
            ("c", "e"): 1}
    first = dict(base)
    first.update({("a", "z1"): 1, ("b", "z1"): 1, ("c", "z1"): 1, ("e", "z1"): 1})
    second = dict(base)
    second.update({("a", "z2"): 1, ("b", "z2"): 1, ("c", "z2"): 1, ("e", "z2"): 2})
    return (_metric(("a", "b", "c", "e", "z1"), first),
            _metric(("a", "b", "c", "e", "z2"), second))


def gamma_family(gamma) -> FiniteMetric:
    """Candidate amalgam of the two inputs with d(z1, z2) = gamma."""
    m1, m2 = nap_inputs()
    pts = ("a", "b", "c", "e", "z1", "z2")
    pairs = {(x, y): m1(x, y) for x, y in combinations(m1.points, 2)}
    pairs.update({(x, "z2"): m2(x, "z2") for x in "abce"})
    pairs[("z1", "z2")] = rational(gamma)
    return _metric(pts, pairs)


@dataclass(frozen=True)
class CounterexampleReport:
    inputs_l1: tuple
    input_weights: tuple
    gamma_low: Fraction
    gamma_high: Fraction
    form_constant: Fraction
    form_slope: Fraction
    value_low: Fraction
    value_high: Fraction
    k23_value: Fraction
    k23_certificate: Infeasible | None

    @property
    def ok(self) -> bool:
        return (all(self.inputs_l1) and self.gamma_low <= self.gamma_high
                and self.value_low > 0 and self.value_high > 0 and self.k23_value > 0
                and self.k23_certificate is not None)


def nap_counterexample() -> CounterexampleReport:
    """Certify that the two inputs are L1 but no L1 metric amalgamates them.

    Any amalgam is the gamma-family metric for gamma = d(z1, z2).  The triangle
    inequality through each base point x forces
    |d(x,z1) - d(x,z2)| <= gamma <= d(x,z1) + d(x,z2); the pentagonal form on
    S3 = {a,b,c}, T2 = {z1,z2} is affine in gamma, so positivity at both ends
    of the forced interval shows it is violated on the whole interval.
    """
    m1, m2 = nap_inputs()
    results = [is_l1_metric(m1), is_l1_metric(m2)]
    feasible = tuple(isinstance(r, CutWeights) for r in results)
    low = max(abs(m1(x, "z1") - m2(x, "z2")) for x in "abce")
    high = min(m1(x, "z1") + m2(x, "z2") for x in "abce")
    s3, t2 = ("a", "b", "c"), ("z1", "z2")
    const = pentagonal_value(gamma_family(0), s3, t2)
    slope = pentagonal_value(gamma_family(1), s3, t2) - const
    # the other triangles do not involve gamma and already hold in the inputs
    for g in (low, high):
        if gamma_family(g).triangle_violation() is not None:
            raise AssertionError(f"gamma = {g} should give a metric")
    k23 = k23_metric()
    k23_res = is_l1_metric(k23)
    return CounterexampleReport(
        inputs_l1=feasible,
        input_weights=tuple(r if isinstance(r, CutWeights) else None for r in results),
        gamma_low=low,
        gamma_high=high,
        form_constant=const,
        form_slope=slope,
        value_low=const + slope * low,
        value_high=const + slope * high,
        k23_value=pentagonal_value(k23, s3, t2),
        k23_certificate=k23_res if isinstance(k23_res, Infeasible) else None,
    )
