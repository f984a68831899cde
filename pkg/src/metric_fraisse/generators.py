"""Seeded random instances: diversities, extensions, processes, cut weights, metrics.

Every function takes a :class:`random.Random` so callers control determinism.
All values are small exact rationals.
"""
from __future__ import annotations

import random
from fractions import Fraction
from itertools import combinations, product
from typing import Sequence

from .diversity import FiniteDiversity, restrict
from .foundation import FiniteMetric, bits, popcount
from .l1cut import CutWeights, cut_diversity
from .stochastic import FiniteProcess, marginal


def rand_rational(rng: random.Random, hi: int = 4, den: int = 4, positive: bool = True) -> Fraction:
    lo = 1 if positive else 0
    return Fraction(rng.randint(lo, hi * den), den)


def random_metric(rng: random.Random, labels: Sequence, hi: int = 4, den: int = 3) -> FiniteMetric:
    """Shortest-path closure of random positive edge lengths."""
    n = len(labels)
    d = [[Fraction(0)] * n for _ in range(n)]
    for i, j in combinations(range(n), 2):
        d[i][j] = d[j][i] = rand_rational(rng, hi, den)
    for k in range(n):
        for i in range(n):
            for j in range(n):
                if d[i][k] + d[k][j] < d[i][j]:
                    d[i][j] = d[i][k] + d[k][j]
    return FiniteMetric(labels, d)


def random_cut_weights(rng: random.Random, labels: Sequence, density: float = 0.6,
                       den: int = 4) -> CutWeights:
    labels = tuple(labels)
    anchor = labels[0]
    rest = labels[1:]
    w = {}
    for k in range(1, len(rest) + 1):
        for side in combinations(rest, k):
            if rng.random() < density:
                w[frozenset(side)] = rand_rational(rng, 2, den)
    return CutWeights(labels, anchor, w)


def _diameter_values(m: FiniteMetric) -> list[Fraction]:
    n = m.size
    out = []
    for mask in range(1 << n):
        idx = bits(mask)
        out.append(max((m.d[i][j] for i, j in combinations(idx, 2)), default=Fraction(0)))
    return out


def random_diversity(rng: random.Random, labels: Sequence) -> FiniteDiversity:
    """A strict diversity: a random positive mix of diameter, cut and size terms."""
    labels = tuple(labels)
    n = len(labels)
    if n == 1:
        return FiniteDiversity(labels, [0, 0])
    parts = []
    a = rand_rational(rng, 2, 2, positive=False)
    if a:
        parts.append([a * v for v in _diameter_values(random_metric(rng, labels))])
    if rng.random() < 0.7:
        parts.append(cut_diversity(random_cut_weights(rng, labels)).values())
    # the size term keeps every set of two or more points strictly positive
    c = rand_rational(rng, 1, 2)
    parts.append([c * max(popcount(m) - 1, 0) for m in range(1 << n)])
    vals = [sum(col, Fraction(0)) for col in zip(*parts)]
    return FiniteDiversity(labels, vals, semidiversity=False)


def random_extension(rng: random.Random, D: FiniteDiversity, z, lift=None) -> FiniteDiversity:
    """A strict diversity on D.points + (z,) restricting to D.

    Mixes the "z is a copy of x" extensions with random convex weights, then
    lifts z away from everything by a pendant length.
    """
    n = D.size
    raw = [rng.randint(0, 3) for _ in range(n)]
    if not any(raw):
        raw[rng.randrange(n)] = 1
    total = sum(raw)
    t = [Fraction(r, total) for r in raw]
    if lift is None:
        lift = rand_rational(rng, 2, 4)
    vals = D.values()
    # copy extension of x puts delta(A + x) on A + z
    ext = [Fraction(0)]
    for mask in range(1, 1 << n):
        mix = sum((ti * vals[mask | (1 << i)] for i, ti in enumerate(t) if ti), Fraction(0))
        ext.append(mix + lift)
    return FiniteDiversity(D.points + (z,), vals + ext, semidiversity=False)


def agreeing_diversity_pair(rng: random.Random, base_size: int, z1="z1", z2="z2"):
    """Two strict diversities on base+{z1} and base+{z2} that agree on the base."""
    base = tuple(f"x{i}" for i in range(base_size))
    if rng.random() < 0.5:
        D1 = random_diversity(rng, base + (z1,))
        B = restrict(D1, base)
    else:
        B = random_diversity(rng, base)
        D1 = random_extension(rng, B, z1)
    if rng.random() < 0.2:
        D2 = D1.relabel({z1: z2})
    else:
        D2 = random_extension(rng, B, z2)
    return D1, D2


def agreeing_cut_pair(rng: random.Random, base_size: int, z1="z1", z2="z2", den: int = 4):
    """Cut weights on base+{z1} and base+{z2} whose diversities agree on the base."""
    base = tuple(f"x{i}" for i in range(base_size))
    anchor, rest = base[0], base[1:]
    w1, w2 = {}, {}
    for k in range(1, len(rest) + 1):
        for U in combinations(rest, k):
            if rng.random() < 0.3:
                continue
            omega = rand_rational(rng, 2, den)
            for w, z in ((w1, z1), (w2, z2)):
                split = Fraction(rng.randint(0, 4), 4)
                if split:
                    w[frozenset(U) | {z}] = omega * split
                if split != 1:
                    w[frozenset(U)] = omega * (1 - split)
    for w, z in ((w1, z1), (w2, z2)):
        if rng.random() < 0.8:
            w[frozenset([z])] = rand_rational(rng, 2, den)
    return CutWeights(base + (z1,), anchor, w1), CutWeights(base + (z2,), anchor, w2)


# -- distributions and processes -----------------------------------------------

def random_distribution(rng: random.Random, k: int, zero_rate: float = 0.3,
                        hi: int = 9) -> list[Fraction]:
    raw = [0 if rng.random() < zero_rate else rng.randint(1, hi) for _ in range(k)]
    if not any(raw):
        raw[rng.randrange(k)] = 1
    total = sum(raw)
    return [Fraction(r, total) for r in raw]


def random_process(rng: random.Random, index: Sequence, states: Sequence,
                   zero_rate: float = 0.3) -> FiniteProcess:
    ns = len(states)
    outcomes = list(product(range(ns), repeat=len(index)))
    probs = random_distribution(rng, len(outcomes), zero_rate)
    return FiniteProcess(index, states, {o: p for o, p in zip(outcomes, probs) if p})


def random_conditional_extension(rng: random.Random, P: FiniteProcess, z,
                                 zero_rate: float = 0.3) -> FiniteProcess:
    """Extend P by a point whose conditional law given P's outcome is random."""
    ns = len(P.states)
    out = {}
    for o, p in P.pmf.items():
        for s, q in enumerate(random_distribution(rng, ns, zero_rate)):
            if q:
                out[o + (s,)] = p * q
    return FiniteProcess(P.index + (z,), P.states, out)


def agreeing_process_pair(rng: random.Random, base_size: int, n_states: int, w="w", z="z"):
    states = tuple(range(n_states))
    base = tuple(f"t{i}" for i in range(base_size))
    if rng.random() < 0.5:
        P1 = random_process(rng, base + (w,), states)
        B = marginal(P1, base)
    else:
        B = random_process(rng, base, states)
        P1 = random_conditional_extension(rng, B, w)
    if rng.random() < 0.15:
        P2 = P1.relabel({w: z})
    else:
        P2 = random_conditional_extension(rng, B, z)
    return P1, P2


def random_target(rng: random.Random, kind: str, base_size: int = 1, n_states: int = 2,
                  extra: int = 1):
    """An ambient structure on base+extra points and a random patch over the base."""
    from .fraisse import ExtensionTarget

    base = tuple(f"a{i}" for i in range(base_size))
    others = tuple(f"y{i}" for i in range(extra))
    if kind == "diversity":
        M = random_diversity(rng, base + others)
        patch = random_extension(rng, restrict(M, base), "z")
    else:
        states = tuple(range(n_states))
        M = random_process(rng, base + others, states, zero_rate=0.1)
        patch = random_conditional_extension(rng, marginal(M, base), "z", zero_rate=0.1)
    return ExtensionTarget(M, base, patch, "z")
