"""Exact extension chains and a seeded builder of rich finite structures.

:func:`extension_chain` replays the argument that the approximate extension
property plus bounded amalgamation gives exact extensions: it asks an oracle
for ever better approximate realizations w_0, w_1, ... of a one-point
extension (a, z), and glues z next to each new w with the bounded amalgam so
that the w_p form a certified Cauchy sequence.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

from . import diversity as div
from . import stochastic as sto
from .foundation import MAX_POINTS, EnumeratedTuple, StructureError, d_infty, rational


class ChainError(StructureError):
    def __init__(self, message: str, steps=None):
        super().__init__(message)
        self.steps = steps or []


# -- per-kind operations ---------------------------------------------------------

def _restrict(S, labels):
    if S.kind == "diversity":
        return div.restrict(S, list(labels))
    return sto.marginal(S, list(labels))


def _amalgamate(S1, S2):
    if S1.kind == "diversity":
        return div.amalgamate_one_point(S1, S2)
    return sto.amalgamate(S1, S2)


def _extend(Y, patch, base):
    if Y.kind == "diversity":
        return div.extend_over_base(Y, patch, base)
    return sto.extend_over_base(Y, patch, base)


def _distance(S, x, y) -> Fraction:
    return S.distance(S.index_of(x), S.index_of(y))


def _check_valid(S) -> None:
    if S.kind == "diversity":
        div.validate(S, allow_semi=True)
    else:
        sto.check_consistency(S)


def tuple_distance(S1, labels1: Sequence, S2, labels2: Sequence) -> Fraction:
    return d_infty(EnumeratedTuple.of(S1, labels1), EnumeratedTuple.of(S2, labels2))


def diversity_constant(n: int = 0, states: int = 0) -> Fraction:
    return Fraction(1)


def process_constant(n: int, states: int) -> Fraction:
    """Half of |S|^(n+1): the bound on d(w, z) per unit of d_infty over n base points."""
    return Fraction(states ** (n + 1), 2)


def l1_constant(n: int, states: int = 0) -> Fraction:
    return Fraction(4 ** n)


PRESETS = {"diversity": diversity_constant, "process": process_constant, "l1": l1_constant}


def preset_constant(kind: str, n: int, states: int = 0) -> Fraction:
    try:
        return PRESETS[kind](n, states)
    except KeyError:
        raise StructureError(f"no bAP preset for {kind!r}") from None


# -- targets, oracles and steps ----------------------------------------------------

@dataclass(frozen=True)
class ExtensionTarget:
    """A one-point extension ``patch`` of the tuple ``base`` of ``ambient``.

    ``patch`` lives on the base labels plus ``z``.
    """

    ambient: object
    base: tuple
    patch: object
    z: object

    def __post_init__(self):
        object.__setattr__(self, "base", tuple(self.base))
        if self.z in self.base or self.z not in self.patch.points:
            raise StructureError("z must be the patch's one new point")
        if set(self.patch.points) != set(self.base) | {self.z}:
            raise StructureError("patch must live on the base plus z")
        if self.ambient.kind != self.patch.kind:
            raise StructureError("patch and ambient are different kinds of structure")
        if tuple_distance(self.ambient, self.base, self.patch, self.base) != 0:
            raise StructureError("patch does not agree with the ambient on the base")


# An oracle receives (ambient, base labels, patch, z, epsilon, new label) and returns
# (new ambient, w) where w realizes the patch over the base within epsilon.
Oracle = Callable[..., tuple]


def _exact_match(ambient, base, patch, z):
    for w in ambient.points:
        if tuple_distance(patch, list(base) + [z], ambient, list(base) + [w]) == 0:
            return w
    return None


def _perturb_diversity(rng: random.Random, patch, base, z, eps: Fraction, new):
    """A valid patch on base+{new} at d_infty exactly eps from ``patch``.

    Convex mix of "new copies x" extensions of the patch, moved at most eps/2,
    then lifted by a pendant length so the largest change is exactly eps.
    """
    P = patch.permuted(tuple(base) + (z,))
    n = len(base)
    vals = P.values()
    zb = 1 << n
    dist = [P.distance(i, n) for i in range(n)]
    raw = [rng.randint(0, 3) for _ in range(n)]
    spread = sum((r * d for r, d in zip(raw, dist)), Fraction(0))
    budget = eps / 2
    scale = Fraction(1, sum(raw) or 1)
    if spread:
        scale = min(scale, budget / spread)
    scale *= Fraction(rng.randint(1, 4), 4)
    t = [r * scale for r in raw]
    rest = 1 - sum(t)
    mixed = []
    for mask in range(1, zb):
        v = rest * vals[mask | zb]
        v += sum((ti * vals[mask | (1 << i)] for i, ti in enumerate(t) if ti), Fraction(0))
        mixed.append(v)
    dev = [m - vals[mask | zb] for mask, m in zip(range(1, zb), mixed)]
    lift = eps - max(dev)
    ext = [Fraction(0)] + [m + lift for m in mixed]
    out = div.FiniteDiversity(tuple(base) + (new,), vals[:zb] + ext)
    div.validate(out, allow_semi=True)
    return out


def _perturb_process(rng: random.Random, patch, base, z, eps: Fraction, new):
    """Shift mass eps from z = s to z = s' (base outcomes untouched).

    Every cell (b, s) gives up part of its mass to (b, s'), so the base law is
    unchanged and P(z = s) drops by exactly eps, the largest change of any
    predicate.  Falls short only if no state of z carries eps of mass.
    """
    P = patch.permuted(tuple(base) + (z,))
    ns = len(P.states)
    law = dict(P.pmf)
    if ns > 1 and eps > 0:
        mass = [Fraction(0)] * ns
        for o, p in law.items():
            mass[o[-1]] += p
        heavy = [s for s in range(ns) if mass[s] >= eps]
        src = rng.choice(heavy) if heavy else max(range(ns), key=mass.__getitem__)
        dst = (src + rng.randint(1, ns - 1)) % ns
        left = min(eps, mass[src])
        cells = sorted(o for o in law if o[-1] == src)
        rng.shuffle(cells)
        for o in cells:
            if not left:
                break
            eta = min(left, law[o])
            law[o] -= eta
            t = o[:-1] + (dst,)
            law[t] = law.get(t, Fraction(0)) + eta
            left -= eta
        law = {o: p for o, p in law.items() if p}
    return sto.FiniteProcess(tuple(base) + (new,), P.states, law, semi=True)


@dataclass
class NoisyOracle:
    """Realizes a patch at d_infty exactly the requested tolerance (seeded).

    With ``exact=True`` it returns an existing point (possibly one of the
    base points) when one already realizes the patch, and otherwise adds an
    exact copy of z.
    """

    seed: int
    exact: bool = False
    rng: random.Random = field(init=False)

    def __post_init__(self):
        self.rng = random.Random(self.seed)

    def __call__(self, ambient, base, patch, z, eps, new):
        eps = rational(eps)
        if self.exact:
            w = _exact_match(ambient, base, patch, z)
            if w is not None:
                return ambient, w
            eps = Fraction(0)
        if patch.kind == "diversity":
            if eps == 0:
                moved = patch.relabel({z: new}).permuted(tuple(base) + (new,))
            else:
                moved = _perturb_diversity(self.rng, patch, base, z, eps, new)
        else:
            moved = _perturb_process(self.rng, patch, base, z, eps, new)
        return _extend(ambient, moved, list(base)), new


@dataclass(frozen=True)
class ChainStep:
    p: int
    w: object
    tolerance: Fraction
    achieved: Fraction       # what the oracle delivered against (a, w_0..w_{p-1}, z)
    d_inf: Fraction          # d_infty((a, z), (a, w_p))
    d_z: Fraction            # d(w_p, z) in the amalgam M_p
    d_succ: Fraction | None  # d(w_{p-1}, w_p) in the ambient
    ok: bool


@dataclass
class Chain:
    steps: list
    ambient: object
    amalgam: object
    z: object

    @property
    def ok(self) -> bool:
        return all(s.ok for s in self.steps)

    def points(self) -> list:
        return [s.w for s in self.steps]


def extension_chain(target: ExtensionTarget, oracle: Oracle, c, steps: int,
                    strict: bool = True) -> Chain:
    """Build w_0 .. w_{steps-1} and check the three bounds at every step.

    Step p asks the oracle for w_p realizing (a, w_0..w_{p-1}, z) from M_{p-1}
    within min(1/c, 1) * 2^-p, where M_{-1} is the patch, then amalgamates
    (a, w_0..w_p) from the ambient with M_{p-1} over (a, w_0..w_{p-1}) to get
    M_p.  Checked: d_infty((a,z),(a,w_p)) <= 2^-p, d(w_p, z) <= 2^-p in M_p,
    and d(w_{p-1}, w_p) <= 3 * 2^-p.  With ``strict`` a failed bound raises
    :class:`ChainError` carrying the steps so far.
    """
    c = rational(c)
    if c <= 0:
        raise StructureError("bAP constant must be positive")
    factor = min(1 / c, Fraction(1))
    ambient = target.ambient
    z = target.z
    a = list(target.base)
    M = target.patch
    ws: list = []
    out: list[ChainStep] = []
    for p in range(steps):
        base = a + ws
        if ambient.size >= MAX_POINTS:
            raise ChainError(f"ambient structure reached {MAX_POINTS} points at step {p}", out)
        tol = factor * Fraction(1, 2 ** p)
        new = f"w{p}"
        while new in ambient.points or new == z:
            new = "_" + new
        ambient, w = oracle(ambient, tuple(base), _restrict(M, base + [z]), z, tol, new)
        got = tuple_distance(M, base + [z], ambient, base + [w])
        if got > tol:
            raise ChainError(f"oracle missed tolerance at step {p}: {got} > {tol}", out)
        if w not in base:
            M = _amalgamate(_restrict(ambient, base + [w]), M)
        # otherwise w is already glued into M at distance 0 from z
        d_inf = tuple_distance(target.patch, a + [z], ambient, a + [w])
        d_z = _distance(M, w, z)
        d_succ = _distance(ambient, ws[-1], w) if ws else None
        bound = Fraction(1, 2 ** p)
        ok = d_inf <= bound and d_z <= bound and (d_succ is None or d_succ <= 3 * bound)
        step = ChainStep(p, w, tol, got, d_inf, d_z, d_succ, ok)
        out.append(step)
        if w not in ws:
            ws.append(w)
        if strict and not ok:
            raise ChainError(f"bound violated at step {p}: {step}", out)
    return Chain(out, ambient, M, z)


def cauchy_violations(chain: Chain) -> list[tuple]:
    """Pairs p < q whose distance exceeds 3 * 2^-p in the final ambient."""
    bad = []
    ws = chain.points()
    for p in range(len(ws)):
        for q in range(p + 1, len(ws)):
            d = _distance(chain.ambient, ws[p], ws[q])
            if d > 3 * Fraction(1, 2 ** p):
                bad.append((p, q, d))
    return bad


# -- rich structures -------------------------------------------------------------

@dataclass(frozen=True)
class RealizationEntry:
    template: int
    base: tuple
    best: Fraction
    satisfied: bool


@dataclass
class RichBuild:
    structure: object
    report: list
    cap_reached: bool
    applied: int


def _template_parts(template):
    pts = template.points
    return list(pts[:-1]), pts[-1]


def best_realization(structure, template, base_labels: Sequence) -> Fraction | None:
    """Smallest d_infty from the template's (base, z) to some (base, w) in ``structure``."""
    tb, tz = _template_parts(template)
    best = None
    for w in structure.points:
        if w in base_labels:
            continue
        d = tuple_distance(template, tb + [tz], structure, list(base_labels) + [w])
        if best is None or d < best:
            best = d
    return best


def build_rich_structure(kind: str, catalog: Sequence, rounds: int, epsilon, seed: int,
                         start=None) -> RichBuild:
    """Grow ``start`` by gluing catalog extensions over random base tuples.

    A template is a structure whose last point is the new one; it applies at a
    base tuple when its remaining points match that tuple exactly.  Templates
    are visited in a fresh shuffled order each pass, so every template gets a
    turn before any repeats.  Growth stops, without error, at the size cap.
    """
    epsilon = rational(epsilon)
    rng = random.Random(seed)
    S = start
    if S is None:
        if kind == "diversity":
            S = div.FiniteDiversity(["p0"], [0, 0])
        else:
            raise StructureError("a start structure is required for processes")
    if S.kind != kind:
        raise StructureError(f"start structure is a {S.kind}, not a {kind}")
    for t in catalog:
        if t.kind != kind:
            raise StructureError(f"catalog entry {t!r} is not a {kind}")
        if kind == "process" and t.states != S.states:
            raise StructureError("catalog states differ from the start structure")
    sampled: list[tuple[int, tuple]] = []
    cap = False
    applied = 0
    order: list[int] = []
    fresh = 0
    for _ in range(rounds if catalog else 0):
        if S.size >= MAX_POINTS:
            cap = True
            break
        if not order:
            order = list(range(len(catalog)))
            rng.shuffle(order)
        ti = order.pop()
        T = catalog[ti]
        tb, tz = _template_parts(T)
        if len(tb) > S.size:
            continue
        base = tuple(rng.sample(S.points, len(tb)))
        sampled.append((ti, base))
        if tuple_distance(T, tb, S, base) != 0:
            continue
        while f"p{S.size + fresh}" in S.points:
            fresh += 1
        new = f"p{S.size + fresh}"
        patch = T.relabel(dict(zip(tb, base)) | {tz: new})
        S = _extend(S, patch, list(base))
        applied += 1
    report = []
    seen = set()
    for ti, base in sampled:
        if (ti, base) in seen:
            continue
        seen.add((ti, base))
        best = best_realization(S, catalog[ti], base)
        report.append(RealizationEntry(ti, base, best, best is not None and best <= epsilon))
    _check_valid(S)
    return RichBuild(S, report, cap, applied)
