import json
from fractions import Fraction

import pytest

from metric_fraisse import formats as fmt
from metric_fraisse.cli import BAD_INPUT, FAILED, OK, run


def write(tmp_path, name, obj):
    p = tmp_path / name
    p.write_text(obj if isinstance(obj, str) else json.dumps(obj))
    return str(p)


def div_json(points, entries, **extra):
    return {"points": points, "delta": [{"set": list(s), "value": v} for s, v in entries], **extra}


XY_Z1 = div_json(["x", "y", "z1"], [("xy", "2"), (["x", "z1"], "1"), (["y", "z1"], "1"),
                                    (["x", "y", "z1"], "2")])
XY_Z2 = div_json(["x", "y", "z2"], [("xy", "2"), (["x", "z2"], "2"), (["y", "z2"], "2"),
                                    (["x", "y", "z2"], "3")])
BAD_TRIANGLE = div_json(["x", "y", "z"], [("xy", "1"), ("xz", "1"), ("yz", "1"), ("xyz", "3")])


def call(capsys, *argv):
    code = run(list(argv))
    out, err = capsys.readouterr()
    return code, (json.loads(out) if out.strip() and "--format" not in argv else out), err


def test_validate_ok_and_failure(tmp_path, capsys):
    code, rep, _ = call(capsys, "validate", write(tmp_path, "a.json", XY_Z1))
    assert code == OK and rep["valid"] is True
    code, rep, _ = call(capsys, "validate", write(tmp_path, "b.json", BAD_TRIANGLE))
    assert code == FAILED and rep["rule"] == "triangle"
    assert set(rep["witness"]) >= {"A", "b", "C"}


def test_malformed_inputs(tmp_path, capsys):
    code, _, err = call(capsys, "validate", write(tmp_path, "c.json", '{"points": ["x",\n  }'))
    assert code == BAD_INPUT and "c.json:2:" in err
    missing = div_json(["x", "y", "z"], [("xy", "1")])
    code, _, err = call(capsys, "validate", write(tmp_path, "d.json", missing))
    assert code == BAD_INPUT and "no value" in err
    floaty = div_json(["x", "y"], [("xy", 0.5)])
    code, _, err = call(capsys, "validate", write(tmp_path, "e.json", floaty))
    assert code == BAD_INPUT
    single = div_json(["x", "y"], [("xy", "1"), ("x", "0")])
    code, _, _ = call(capsys, "validate", write(tmp_path, "f.json", single))
    assert code == BAD_INPUT
    code, _, _ = call(capsys, "no-such-command")
    assert code == BAD_INPUT
    code, _, _ = call(capsys, "validate", str(tmp_path / "absent.json"))
    assert code == BAD_INPUT


def test_amalgamate_round_trip(tmp_path, capsys):
    code, rep, _ = call(capsys, "amalgamate", write(tmp_path, "1.json", XY_Z1),
                        write(tmp_path, "2.json", XY_Z2))
    assert code == OK
    assert Fraction(rep["d_new"]) == 1 == Fraction(rep["d_inf"])
    out = write(tmp_path, "am.json", rep["amalgam"])
    code, rep2, _ = call(capsys, "validate", out)
    assert code == OK and rep2["valid"]


def test_dk_bounds_example(tmp_path, capsys):
    a = write(tmp_path, "1.json", XY_Z1)
    b = write(tmp_path, "2.json", XY_Z2)
    code, rep, _ = call(capsys, "dk-bounds", a, b, "--left", "x,y,z1", "--right", "x,y,z2")
    assert code == OK
    assert rep["lower"] == "1/3"
    assert Fraction(rep["upper"]) <= 1
    code, rep, _ = call(capsys, "dinfty", a, b, "--left", "x,y,z1", "--right", "x,y")
    assert code == BAD_INPUT


def test_decompose_and_not_l1(tmp_path, capsys):
    cut = div_json([1, 2, 3], [([1, 2], "2"), ([1, 3], "1"), ([2, 3], "3"), ([1, 2, 3], "3")])
    code, rep, _ = call(capsys, "decompose", write(tmp_path, "c.json", cut))
    assert code == OK
    assert {(tuple(c["side"]), c["weight"]) for c in rep["cuts"]["cuts"]} == {((2,), "2"), ((3,), "1")}
    twos = div_json([1, 2, 3], [([1, 2], "2"), ([1, 3], "2"), ([2, 3], "2"), ([1, 2, 3], "2")])
    code, rep, _ = call(capsys, "decompose", write(tmp_path, "t.json", twos))
    assert code == FAILED
    assert rep["witness"]["implied"] == "3" and rep["witness"]["actual"] == "2"


def test_counterexample_text(capsys):
    code, out, _ = call(capsys, "counterexample-k23", "--format", "text")
    assert code == OK and "certified" in out


def test_pentagonal_and_l1_metric(tmp_path, capsys):
    k23 = {"points": ["a", "b", "c", "z1", "z2"],
           "d": [["0", "2", "2", "1", "1"], ["2", "0", "2", "1", "1"], ["2", "2", "0", "1", "1"],
                 ["1", "1", "1", "0", "2"], ["1", "1", "1", "2", "0"]]}
    path = write(tmp_path, "k.json", k23)
    code, rep, _ = call(capsys, "pentagonal", path, "--s3", "a,b,c", "--t2", "z1,z2")
    assert code == FAILED and rep["violations"][0]["value"] == "2"
    code, rep, _ = call(capsys, "check-l1-metric", path)
    assert code == FAILED and rep["certificate"]


def test_process_commands(tmp_path, capsys):
    p1 = {"index": ["a", "w"], "states": ["0", "1"], "semi": True,
          "pmf": [{"outcome": ["0", "0"], "prob": "1/2"}, {"outcome": ["1", "1"], "prob": "1/2"}]}
    p2 = {"index": ["a", "z"], "states": ["0", "1"],
          "pmf": [{"outcome": ["0", "1"], "prob": "1/2"}, {"outcome": ["1", "0"], "prob": "1/2"}]}
    a, b = write(tmp_path, "p1.json", p1), write(tmp_path, "p2.json", p2)
    code, rep, _ = call(capsys, "process-amalgamate", a, b)
    assert code == OK and rep["d_new"] == "1" and rep["bound"] == "1"
    again = write(tmp_path, "am.json", rep["amalgam"])
    code, rep, _ = call(capsys, "validate", again)
    assert code == OK
    code, rep, _ = call(capsys, "dinfty", a, b)
    assert code == OK and rep["d_inf"] == "1/2"
    dist = write(tmp_path, "d.json", {"p": ["1/2", "1/2"], "q": ["1/4", "3/4"]})
    code, rep, _ = call(capsys, "couple", dist)
    assert code == OK and rep["mismatch"] == "1/4" == rep["total_variation"]
    bad = dict(p1, pmf=[{"outcome": ["0", "0"], "prob": "1/2"}])
    code, _, _ = call(capsys, "validate", write(tmp_path, "bad.json", bad))
    assert code == FAILED


def test_chain_and_build_need_a_seed(tmp_path, capsys):
    code, _, _ = call(capsys, "chain")
    assert code == BAD_INPUT
    code, rep, _ = call(capsys, "chain", "--seed", "3", "--steps", "4")
    assert code == OK and len(rep) == 4 and all(s["ok"] for s in rep)
    code, rep1, _ = call(capsys, "build-rich", "--seed", "1", "--rounds", "4")
    code, rep2, _ = call(capsys, "build-rich", "--seed", "1", "--rounds", "4")
    assert code == OK and rep1 == rep2


def test_out_flag(tmp_path, capsys):
    out = tmp_path / "report.json"
    code = run(["validate", write(tmp_path, "a.json", XY_Z1), "--out", str(out)])
    assert code == OK
    assert json.loads(out.read_text())["valid"] is True


def test_json_round_trips():
    D = fmt.diversity_from_json(XY_Z1)
    assert fmt.diversity_from_json(json.loads(fmt.dumps(fmt.to_json(D)))) == D
    for text in ("3/4", "-2", "0"):
        assert fmt.dumps(Fraction(text)) == json.dumps(text)
    with pytest.raises(fmt.InputError):
        fmt.kind_of({"nothing": 1})
