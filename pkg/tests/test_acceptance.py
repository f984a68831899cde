"""Acceptance criteria.  Each test carries a criterion marker; conftest prints
one PASS/FAIL line per criterion at the end of the run."""
import io
import json
import random
import time
from contextlib import redirect_stdout
from fractions import Fraction
from itertools import combinations

import pytest

from helpers import (
    base_of,
    diversity_amalgam_suite,
    extension_distance,
    lipschitz_violation_diversity,
    lipschitz_violation_process,
    minimality_violation,
    process_amalgam_suite,
    process_distance_identity,
)
from metric_fraisse import diversity as div
from metric_fraisse import l1cut
from metric_fraisse import stochastic as sto
from metric_fraisse.cli import run
from metric_fraisse.foundation import EnumeratedTuple, d_infty, dK_lower_bound
from metric_fraisse.fraisse import (
    NoisyOracle,
    cauchy_violations,
    extension_chain,
    preset_constant,
)
from metric_fraisse.generators import (
    agreeing_cut_pair,
    random_cut_weights,
    random_distribution,
    random_diversity,
    random_metric,
    random_process,
    random_target,
)


class Budget:
    def __init__(self, seconds):
        self.seconds = seconds

    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.start
        if exc[0] is None:
            assert self.elapsed < self.seconds, f"took {self.elapsed:.2f}s, budget {self.seconds}s"


def q(s):
    return Fraction(s)


@pytest.mark.criterion(1, "K(2,3) counterexample reproduced by the CLI")
def test_k23_counterexample():
    buf = io.StringIO()
    with Budget(1.0), redirect_stdout(buf):
        code = run(["counterexample-k23"])
    assert code == 0
    report = json.loads(buf.getvalue())
    assert report["inputs_l1"] == [True, True]
    assert [q(x) for x in report["gamma_range"]] == [1, 2]
    # unordered form: constant 0, slope 1, so the value is gamma itself
    assert q(report["pentagonal_form"]["constant"]) == 0
    assert q(report["pentagonal_form"]["slope"]) == 1
    assert [q(x) for x in report["pentagonal_at_ends"]] == [1, 2]
    assert report["positive_on_range"] is True
    assert q(report["k23_pentagonal"]) == 2
    assert report["k23_l1"] is False
    assert report["certified"] is True
    for cuts in report["input_cuts"]:
        assert all(q(c["weight"]) > 0 for c in cuts["cuts"])


@pytest.mark.criterion(2, "every 4-point rational metric is L1")
def test_four_point_metrics_are_l1():
    rng = random.Random(4)
    with Budget(10.0):
        for _ in range(500):
            m = random_metric(rng, ["p", "q", "r", "s"], hi=rng.randint(1, 6), den=rng.randint(1, 6))
            w = l1cut.is_l1_metric(m)
            assert isinstance(w, l1cut.CutWeights), m
            assert l1cut.cut_metric(w) == m


@pytest.mark.criterion(3, "diversity amalgams: valid, extending, minimal, c = 1")
def test_diversity_amalgam_suite():
    with Budget(30.0):
        suite = diversity_amalgam_suite()
        assert len(suite) >= 1000
        for D1, D2, J in suite:
            assert J.size <= 6 and D1.size <= 5
            assert div.find_violation(J, allow_semi=True) is None
            assert div.restrict(J, D1.points) == D1
            assert div.restrict(J, D2.points) == D2
            base = base_of(D1, D2)
            assert minimality_violation(J, D1, D2, base, "z1", "z2") is None
            assert J.delta(["z1", "z2"]) <= extension_distance(D1, D2, "z1", "z2")


@pytest.mark.criterion(4, "process amalgams: marginals, distance identity, bound")
def test_process_amalgam_suite():
    with Budget(30.0):
        suite = process_amalgam_suite()
        assert len(suite) >= 500
        for P1, P2, J in suite:
            base = base_of(P1, P2)
            w = P1.index[-1]
            z = P2.index[-1]
            assert sto.marginal(J, list(base) + [w]) == P1
            assert sto.marginal(J, list(base) + [z]) == P2
            dwz = J.distance(J.index_of(w), J.index_of(z))
            assert dwz == process_distance_identity(P1, P2, base, w, z)
            s = len(P1.states)
            bound = Fraction(1, 2) * s ** (len(base) + 1) * extension_distance(P1, P2, w, z)
            assert dwz <= bound


@pytest.mark.criterion(5, "optimal coupling mismatch equals total variation")
def test_coupling_optimality():
    rng = random.Random(5)
    with Budget(10.0):
        for _ in range(1000):
            k = rng.randint(1, 27)
            p = random_distribution(rng, k)
            qd = random_distribution(rng, k)
            c = sto.optimal_coupling(p, qd)
            tv = sum(abs(x - y) for x, y in zip(p, qd)) / 2
            assert c.mismatch == tv == sto.total_variation(p, qd)
            left, right = c.marginals()
            assert [left.get(i, 0) for i in range(k)] == p
            assert [right.get(i, 0) for i in range(k)] == qd
            assert all(v >= 0 for v in c.joint.values())


@pytest.mark.criterion(6, "cut decomposition round-trips; the all-2 triangle is not L1")
def test_cut_round_trip():
    rng = random.Random(6)
    with Budget(20.0):
        for _ in range(500):
            n = rng.randint(2, 6)
            labels = [f"v{i}" for i in range(n)]
            w = random_cut_weights(rng, labels, density=rng.choice([0.2, 0.5, 0.9]))
            got = l1cut.decompose(l1cut.cut_diversity(w))
            assert got == w
        D = div.from_table([1, 2, 3], {frozenset({1, 2}): 2, frozenset({1, 3}): 2,
                                       frozenset({2, 3}): 2, frozenset({1, 2, 3}): 2})
        bad = l1cut.decompose(D)
        assert isinstance(bad, l1cut.NotL1)
        assert bad.reason == "inconsistent"
        assert set(bad.set) == {1, 2, 3}
        assert (bad.implied, bad.actual) == (3, 2)


@pytest.mark.criterion(7, "L1 amalgam: distance identity and the 4^n bound")
def test_l1_amalgam_bound():
    rng = random.Random(7)
    with Budget(20.0):
        for _ in range(200):
            n = rng.randint(1, 4)
            w1, w2 = agreeing_cut_pair(rng, n)
            D1, D2 = l1cut.cut_diversity(w1), l1cut.cut_diversity(w2)
            res = l1cut.amalgamate_l1(D1, D2)
            J = res.diversity
            assert div.restrict(J, D1.points) == D1
            assert div.restrict(J, D2.points) == D2
            assert isinstance(l1cut.decompose(J), l1cut.CutWeights)
            # beta_U, gamma_U: weight on the split whose non-anchor side is U + z
            base = base_of(D1, D2)
            rest = [x for x in base if x != w1.anchor]
            total = Fraction(0)
            for r in range(len(rest) + 1):
                for U in map(frozenset, combinations(rest, r)):
                    b = w1.weights.get(U | {"z1"}, 0)
                    g = w2.weights.get(U | {"z2"}, 0)
                    total += abs(b - g)
            assert J.delta(["z1", "z2"]) == res.z_distance == total
            dinf = extension_distance(D1, D2, "z1", "z2")
            assert res.z_distance <= res.bound <= 4 ** len(base) * dinf


@pytest.mark.criterion(8, "d_K sandwiches for diversities and processes")
def test_dk_sandwiches():
    rng = random.Random(8)
    with Budget(30.0):
        for _ in range(300):
            n = rng.randint(1, 4)
            A = random_diversity(rng, [f"p{k}" for k in range(rng.randint(1, 5))])
            B = A if rng.random() < 0.2 else random_diversity(rng, [f"q{k}" for k in range(rng.randint(1, 5))])
            a = EnumeratedTuple(A, [rng.randrange(A.size) for _ in range(n)])
            b = EnumeratedTuple(B, [rng.randrange(B.size) for _ in range(n)])
            emb = div.dK_upper_embedding(a, b)
            eps = d_infty(a, b)
            assert dK_lower_bound(a, b) <= emb.bound <= eps
            assert div.find_violation(emb.joint, allow_semi=True) is None
            for t, labels in ((a, emb.left), (b, emb.right)):
                assert div.restrict(emb.joint, labels).values() == div.positional(t, labels).values()
        for _ in range(300):
            n = rng.randint(1, 3)
            states = tuple(range(rng.randint(2, 3)))
            A = random_process(rng, [f"p{k}" for k in range(rng.randint(1, 3))], states, zero_rate=0.1)
            B = random_process(rng, [f"q{k}" for k in range(rng.randint(1, 3))], states, zero_rate=0.1)
            a = EnumeratedTuple(A, [rng.randrange(A.size) for _ in range(n)])
            b = EnumeratedTuple(B, [rng.randrange(B.size) for _ in range(n)])
            emb = sto.dK_upper_embedding(a, b)
            eps = d_infty(a, b)
            assert dK_lower_bound(a, b) <= emb.bound <= len(states) ** n * eps


def _run_chains(kind, steps, seeds, base, states=2):
    for seed in seeds:
        rng = random.Random(seed)
        target = random_target(rng, kind, base, states)
        c = preset_constant(kind, base, states)
        chain = extension_chain(target, NoisyOracle(seed), c, steps)
        assert chain.ok and len(chain.steps) == steps
        for s in chain.steps:
            bound = Fraction(1, 2 ** s.p)
            assert s.achieved == s.tolerance  # the oracle hits the tolerance exactly
            assert s.d_inf <= bound and s.d_z <= bound
            if s.d_succ is not None:
                assert s.d_succ <= 3 * bound
        assert cauchy_violations(chain) == []


@pytest.mark.criterion(9, "extension chains meet the d_inf, d(w, z) and successor bounds")
def test_extension_chains():
    with Budget(30.0):
        _run_chains("diversity", 10, range(50), base=1)
        _run_chains("process", 8, range(50), base=2, states=2)


@pytest.mark.criterion(10, "predicates are 1-Lipschitz on every suite instance")
def test_lipschitz_on_suites():
    seen = 0
    for D1, D2, J in diversity_amalgam_suite():
        for D in (D1, D2, J):
            assert lipschitz_violation_diversity(D) is None
            seen += 1
    for P1, P2, J in process_amalgam_suite():
        for P in (P1, P2, J):
            assert lipschitz_violation_process(P) is None
            seen += 1
    rng = random.Random(10)
    for _ in range(200):
        n = rng.randint(1, 4)
        w1, w2 = agreeing_cut_pair(rng, n)
        J = l1cut.amalgamate_l1(l1cut.cut_diversity(w1), l1cut.cut_diversity(w2)).diversity
        assert lipschitz_violation_diversity(J) is None
        seen += 1
    assert seen >= 4700
