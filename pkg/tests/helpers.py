"""Shared seeded suites and independent checkers used by several test files.

The checkers deliberately recompute things from raw tables instead of calling
the library's own helpers, so a bug in one place cannot vouch for itself.
"""
import random
from fractions import Fraction
from functools import lru_cache
from itertools import combinations, product

from metric_fraisse import diversity as div
from metric_fraisse import stochastic as sto
from metric_fraisse.foundation import EnumeratedTuple, d_infty
from metric_fraisse.generators import agreeing_diversity_pair, agreeing_process_pair


def table(D, order):
    """Values of D over subsets of ``order``, indexed by bitmask over ``order``."""
    return D.permuted(tuple(order)).values()


def lipschitz_violation_diversity(D):
    """First (A, x, x') with |delta(A+x) - delta(A+x')| > d(x, x'), else None."""
    vals = D.values()
    n = D.size
    for i, j in combinations(range(n), 2):
        bi, bj = 1 << i, 1 << j
        d = vals[bi | bj]
        for m in range(1 << n):
            if m & (bi | bj):
                continue
            # A without x, x' and A already holding x'
            if abs(vals[m | bi] - vals[m | bj]) > d:
                return (m, i, j)
            if abs(vals[m | bi | bj] - vals[m | bj]) > d or abs(vals[m | bi | bj] - vals[m | bi]) > d:
                return (m, i, j)
    return None


def lipschitz_violation_process(P):
    """First (t, t*, rest, states) where a joint probability moves by more than d(t, t*)."""
    n = P.size
    for i, j in combinations(range(n), 2):
        d = P.distance(i, j)
        others = [k for k in range(n) if k not in (i, j)]
        for r in range(len(others) + 1):
            for rest in combinations(others, r):
                li = P.law([i, *rest])
                lj = P.law([j, *rest])
                for key in set(li) | set(lj):
                    if abs(li.get(key, 0) - lj.get(key, 0)) > d:
                        return (i, j, rest, key)
    return None


def minimality_violation(J, D1, D2, base, z1, z2):
    """Check delta(A+z1+z2) >= delta(A+B+z1) - delta(B+z2) and the mirror image."""
    n = len(base)
    t1 = table(D1, list(base) + [z1])
    t2 = table(D2, list(base) + [z2])
    tj = table(J, list(base) + [z1, z2])
    zb = 1 << n
    both = zb | (zb << 1)
    for A in range(zb):
        for B in range(zb):
            lhs = tj[A | both]
            if lhs < t1[A | B | zb] - t2[B | zb] or lhs < t2[A | B | zb] - t1[B | zb]:
                return (A, B)
    return None


def process_distance_identity(P1, P2, base, w, z):
    """sum over base outcomes of P(base = s) * d_TV(conditional of w, conditional of z)."""
    n = len(base)
    l1 = sto.marginal(P1, list(base) + [w])
    l2 = sto.marginal(P2, list(base) + [z])
    if l1.index != tuple(base) + (w,):
        raise AssertionError("marginal should follow the requested order")
    cond1, cond2, weight = {}, {}, {}
    for o, p in l1.pmf.items():
        cond1.setdefault(o[:n], {})[o[n]] = p
        weight[o[:n]] = weight.get(o[:n], 0) + p
    for o, p in l2.pmf.items():
        cond2.setdefault(o[:n], {})[o[n]] = p
    total = Fraction(0)
    for s, ws in weight.items():
        c1, c2 = cond1[s], cond2.get(s, {})
        tv = sum(abs(c1.get(k, 0) - c2.get(k, 0)) for k in set(c1) | set(c2)) / 2
        total += tv  # the conditionals are unnormalized, so this is P(s) * d_TV already
    return total


@lru_cache(maxsize=None)
def diversity_amalgam_suite(count=1000, seed=20240):
    rng = random.Random(seed)
    out = []
    for _ in range(count):
        base_size = rng.randint(1, 4)
        D1, D2 = agreeing_diversity_pair(rng, base_size)
        out.append((D1, D2, div.amalgamate_one_point(D1, D2)))
    return tuple(out)


@lru_cache(maxsize=None)
def process_amalgam_suite(count=500, seed=4242):
    rng = random.Random(seed)
    out = []
    for _ in range(count):
        base_size = rng.randint(1, 3)
        n_states = rng.randint(2, 3)
        P1, P2 = agreeing_process_pair(rng, base_size, n_states)
        out.append((P1, P2, sto.amalgamate(P1, P2)))
    return tuple(out)


def base_of(S1, S2):
    return [p for p in S1.points if p in S2.points]


def extension_distance(S1, S2, z1, z2):
    base = base_of(S1, S2)
    a = EnumeratedTuple.of(S1, base + [z1])
    b = EnumeratedTuple.of(S2, base + [z2])
    return d_infty(a, b)


def brute_pair_distributions(rng, max_outcomes=27):
    k = rng.randint(1, max_outcomes)
    from metric_fraisse.generators import random_distribution
    return random_distribution(rng, k), random_distribution(rng, k)


def all_state_tuples(states, k):
    return list(product(states, repeat=k))
