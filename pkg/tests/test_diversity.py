import random
from fractions import Fraction
from itertools import combinations

import pytest

from helpers import minimality_violation
from metric_fraisse import diversity as div
from metric_fraisse.diversity import DiversityError, FiniteDiversity, from_table
from metric_fraisse.foundation import EnumeratedTuple, StructureError, d_infty
from metric_fraisse.generators import agreeing_diversity_pair, random_diversity, random_extension
from metric_fraisse.l1cut import k23_metric


def fs(s):
    return frozenset(s)


def xy_pair():
    base = {fs("xy"): 2}
    D1 = from_table(["x", "y", "z1"], base | {fs(["x", "z1"]): 1, fs(["y", "z1"]): 1,
                                              fs(["x", "y", "z1"]): 2})
    D2 = from_table(["x", "y", "z2"], base | {fs(["x", "z2"]): 2, fs(["y", "z2"]): 2,
                                              fs(["x", "y", "z2"]): 3})
    return D1, D2


def diameter(m):
    pts = m.points
    table = {}
    for r in range(2, len(pts) + 1):
        for S in combinations(pts, r):
            table[fs(S)] = max(m(x, y) for x, y in combinations(S, 2))
    return from_table(pts, table)


def test_two_points_valid():
    D = from_table("xy", {fs("xy"): 1})
    assert div.is_valid(D)
    assert div.induced_metric(D).d == ((0, 1), (1, 0))


def test_triangle_witness():
    table = {fs("xy"): 1, fs("xz"): 1, fs("yz"): 1, fs("xyz"): 3}
    D = from_table("xyz", table, check=False)
    v = div.find_violation(D)
    assert v.rule == "triangle"
    assert v.witness["lhs"] == 3 and v.witness["rhs"] == 2
    # one point bridges the other two; which one is named is a labelling choice
    assert {tuple(v.witness["A"]), (v.witness["b"],), tuple(v.witness["C"])} == {("x",), ("y",), ("z",)}
    with pytest.raises(DiversityError) as err:
        div.validate(("xyz", table))
    assert err.value.violation.rule == "triangle"


@pytest.mark.parametrize("table, rule", [
    ({fs("xy"): -1}, "nonnegativity"),
    ({fs("xy"): 0}, "D1"),
    ({fs("xy"): 2, fs("xz"): 2, fs("yz"): 2, fs("xyz"): 1}, "monotonicity"),
])
def test_rejections(table, rule):
    pts = sorted(set().union(*table))
    D = from_table(pts, table, check=False)
    assert div.find_violation(D).rule == rule


def test_missing_entry():
    with pytest.raises(DiversityError):
        from_table("xyz", {fs("xy"): 1})


def test_k23_diameter_diversity():
    m = k23_metric()
    D = diameter(m)
    assert div.is_valid(D)
    assert div.induced_metric(D) == m


def test_restrict():
    D1, _ = xy_pair()
    one = div.restrict(D1, ["x"])
    assert one.size == 1 and one.values() == [0, 0]
    assert div.restrict(D1, D1.points) == D1
    with pytest.raises(StructureError):
        div.restrict(D1, [])


def test_minimal_amalgam_example():
    D1, D2 = xy_pair()
    J = div.amalgamate_one_point(D1, D2)
    assert J.delta(["z1", "z2"]) == 1
    assert J.delta(["x", "z1", "z2"]) == 2
    assert J.delta(["y", "z1", "z2"]) == 2
    assert J.delta(["x", "y", "z1", "z2"]) == 3
    assert div.restrict(J, ["x", "y", "z1"]) == D1
    assert div.restrict(J, ["x", "y", "z2"]) == D2
    assert div.is_valid(J)
    a = EnumeratedTuple.of(D1, ["x", "y", "z1"])
    b = EnumeratedTuple.of(D2, ["x", "y", "z2"])
    assert J.delta(["z1", "z2"]) <= d_infty(a, b) == 1
    assert minimality_violation(J, D1, D2, ["x", "y"], "z1", "z2") is None


def test_identical_extensions_give_a_semidiversity():
    D1, _ = xy_pair()
    J = div.amalgamate_one_point(D1, D1.relabel({"z1": "z2"}))
    assert J.delta(["z1", "z2"]) == 0
    assert J.semidiversity
    assert div.is_valid(J, allow_semi=True)
    assert not div.is_valid(J, allow_semi=False)
    Q = div.quotient(J)
    assert Q.size == 3 and not Q.semidiversity


def test_disagreement_is_reported():
    D1, D2 = xy_pair()
    D3 = from_table(["x", "y", "z2"], {fs("xy"): 3, fs(["x", "z2"]): 2, fs(["y", "z2"]): 2,
                                       fs(["x", "y", "z2"]): 3})
    with pytest.raises(StructureError, match="x"):
        div.amalgamate_one_point(D1, D3)


def test_extend_over_base_without_new_points():
    D1, _ = xy_pair()
    Y = div.restrict(D1, ["x", "y"])
    out = div.extend_over_base(Y, D1, ["x", "y"])
    assert out == D1


def test_extend_over_base_three_points():
    rng = random.Random(3)
    for _ in range(30):
        Y = random_diversity(rng, ["p", "q", "r"])
        patch = random_extension(rng, div.restrict(Y, ["p", "q"]), "z")
        out = div.extend_over_base(Y, patch, ["p", "q"])
        assert div.is_valid(out, allow_semi=True)
        assert div.restrict(out, ["p", "q", "r"]) == Y
        assert div.restrict(out, ["p", "q", "z"]) == patch


def test_iterated_extension_reproduces_the_amalgam():
    D1, D2 = xy_pair()
    step = div.extend_over_base(D1, D2, ["x", "y"])
    assert step == div.amalgamate_one_point(D1, D2)


def test_join():
    one_a = FiniteDiversity(["a"], [0, 0])
    one_b = FiniteDiversity(["b"], [0, 0])
    J = div.join(one_a, one_b)
    assert J.delta(["a", "b"]) == 0 and J.semidiversity
    two = from_table("xy", {fs("xy"): 1})
    J2 = div.join(two, two.relabel({"x": "u", "y": "v"}))
    assert div.is_valid(J2)
    assert J2.delta(["x", "u"]) == 1 and J2.delta(["x", "y", "u", "v"]) == 1
    assert div.restrict(J2, ["x", "y"]) == two


def test_quotient_leaves_strict_input_alone():
    D1, _ = xy_pair()
    assert div.quotient(D1) == D1


def test_dk_upper_on_the_example():
    D1, D2 = xy_pair()
    a = EnumeratedTuple.of(D1, ["x", "y", "z1"])
    b = EnumeratedTuple.of(D2, ["x", "y", "z2"])
    emb = div.dK_upper_embedding(a, b)
    assert Fraction(1, 3) <= emb.bound <= 1
    assert emb.method == "chain"
    joint, bound = emb
    assert div.is_valid(joint, allow_semi=True)
    assert div.dK_upper_embedding(a, a).bound == 0


def test_chain_overshoot_falls_back_to_the_closure():
    # found by random search: greedy minimal amalgams leave a3 far from b3
    pa = from_table(["x", "y"], {fs("xy"): Fraction(11, 3)})
    pb = from_table(["u", "v", "w"], {fs("uv"): Fraction(10, 3), fs("uw"): 7, fs("vw"): Fraction(31, 6),
                                      fs("uvw"): 8})
    a = EnumeratedTuple.of(pa, ["x", "x", "y"])
    b = EnumeratedTuple.of(pb, ["u", "v", "w"])
    eps = d_infty(a, b)
    assert eps == Fraction(13, 3)
    assert div.chain_embedding(a, b).bound == Fraction(29, 6)
    emb = div.dK_upper_embedding(a, b)
    assert emb.method == "closure"
    assert emb.bound == eps
    assert div.is_valid(emb.joint, allow_semi=True)


def test_agreeing_pairs_amalgamate():
    rng = random.Random(11)
    for _ in range(50):
        D1, D2 = agreeing_diversity_pair(rng, rng.randint(1, 3))
        J = div.amalgamate_one_point(D1, D2)
        assert div.is_valid(J, allow_semi=True)
