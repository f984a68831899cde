"""JSON readers and writers.  Rationals travel as "p/q" strings (or plain "p")."""
from __future__ import annotations

import json
from fractions import Fraction
from itertools import combinations
from pathlib import Path

from .diversity import FiniteDiversity, from_table
from .foundation import FiniteMetric, StructureError, bits, format_rational, rational
from .l1cut import CutWeights
from .stochastic import FiniteProcess


class InputError(ValueError):
    """Malformed input: bad JSON, wrong shape, unknown labels, inexact numbers."""


def _q(x) -> str:
    return format_rational(x)


def _num(value, where: str) -> Fraction:
    if isinstance(value, bool) or not isinstance(value, (str, int)):
        raise InputError(f"{where}: expected a rational string like \"3/4\", got {value!r}")
    try:
        return rational(value)
    except (StructureError, TypeError) as exc:
        raise InputError(f"{where}: {exc}") from None


def _labels(value, where: str) -> list:
    if not isinstance(value, list):
        raise InputError(f"{where}: expected a list of labels")
    for x in value:
        if isinstance(x, (list, dict)) or x is None:
            raise InputError(f"{where}: labels must be strings or numbers, got {x!r}")
    if len(set(value)) != len(value):
        raise InputError(f"{where}: duplicate labels")
    return value


def _field(obj: dict, key: str, where: str):
    if not isinstance(obj, dict) or key not in obj:
        raise InputError(f"{where}: missing field {key!r}")
    return obj[key]


def loads(text: str, name: str = "<input>"):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        line = text.splitlines()[exc.lineno - 1] if text.splitlines() else ""
        raise InputError(f"{name}:{exc.lineno}:{exc.colno}: {exc.msg}\n    {line}") from None


def load(path) -> object:
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror}") from None
    return loads(text, str(path))


def kind_of(obj) -> str:
    if isinstance(obj, dict):
        for key, kind in (("delta", "diversity"), ("pmf", "process"), ("cuts", "cuts"),
                          ("d", "metric"), ("p", "distributions")):
            if key in obj:
                return kind
    raise InputError("cannot tell what kind of structure this is "
                     "(expected a 'delta', 'pmf', 'cuts', 'd' or 'p' field)")


# -- diversities -------------------------------------------------------------------

def diversity_table(obj, where: str = "diversity"):
    """(points, {frozenset: value}, semidiversity flag) from the JSON shape."""
    points = _labels(_field(obj, "points", where), f"{where}.points")
    known = set(points)
    entries = _field(obj, "delta", where)
    if not isinstance(entries, list):
        raise InputError(f"{where}.delta: expected a list")
    table = {}
    for k, e in enumerate(entries):
        here = f"{where}.delta[{k}]"
        members = _labels(_field(e, "set", here), f"{here}.set")
        unknown = [x for x in members if x not in known]
        if unknown:
            raise InputError(f"{here}: unknown labels {unknown}")
        if len(members) < 2:
            raise InputError(f"{here}: sets must have at least two points")
        key = frozenset(members)
        if key in table:
            raise InputError(f"{here}: duplicate entry for {sorted(map(str, key))}")
        table[key] = _num(_field(e, "value", here), f"{here}.value")
    for r in range(2, len(points) + 1):
        for S in combinations(points, r):
            if frozenset(S) not in table:
                raise InputError(f"{where}.delta: no value for {list(S)}")
    semi = obj.get("semidiversity", False)
    if not isinstance(semi, bool):
        raise InputError(f"{where}.semidiversity: expected true or false")
    return points, table, semi


def diversity_from_json(obj, where: str = "diversity", check: bool = True) -> FiniteDiversity:
    points, table, semi = diversity_table(obj, where)
    return from_table(points, table, semidiversity=semi, check=check)


def diversity_to_json(D: FiniteDiversity) -> dict:
    entries = []
    for m in range(1 << D.size):
        idx = bits(m)
        if len(idx) >= 2:
            entries.append({"set": [D.points[i] for i in idx], "value": _q(D.value(m))})
    out = {"points": list(D.points), "delta": entries}
    if D.semidiversity:
        out["semidiversity"] = True
    return out


# -- processes ---------------------------------------------------------------------

def process_parts(obj, where: str = "process"):
    index = _labels(_field(obj, "index", where), f"{where}.index")
    states = _labels(_field(obj, "states", where), f"{where}.states")
    if not index or not states:
        raise InputError(f"{where}: index and states must be nonempty")
    spos = {s: i for i, s in enumerate(states)}
    entries = _field(obj, "pmf", where)
    if not isinstance(entries, list):
        raise InputError(f"{where}.pmf: expected a list")
    pmf = {}
    for k, e in enumerate(entries):
        here = f"{where}.pmf[{k}]"
        outcome = _field(e, "outcome", here)
        if not isinstance(outcome, list) or len(outcome) != len(index):
            raise InputError(f"{here}.outcome: expected {len(index)} state labels")
        try:
            key = tuple(spos[s] for s in outcome)
        except (KeyError, TypeError):
            raise InputError(f"{here}.outcome: unknown state in {outcome}") from None
        if key in pmf:
            raise InputError(f"{here}: duplicate outcome {outcome}")
        pmf[key] = _num(_field(e, "prob", here), f"{here}.prob")
    semi = obj.get("semi", None)
    if semi is not None and not isinstance(semi, bool):
        raise InputError(f"{where}.semi: expected true or false")
    return index, states, pmf, semi


def process_from_json(obj, where: str = "process") -> FiniteProcess:
    index, states, pmf, semi = process_parts(obj, where)
    return FiniteProcess(index, states, pmf, semi)


def process_to_json(P: FiniteProcess) -> dict:
    out = {"index": list(P.index), "states": list(P.states),
           "pmf": [{"outcome": [P.states[s] for s in o], "prob": _q(p)}
                   for o, p in P.pmf.items()]}
    if P.semi:
        out["semi"] = True
    return out


# -- cut weights and metrics ---------------------------------------------------------

def cuts_from_json(obj, where: str = "cuts") -> CutWeights:
    points = _labels(_field(obj, "points", where), f"{where}.points")
    anchor = _field(obj, "anchor", where)
    entries = _field(obj, "cuts", where)
    if not isinstance(entries, list):
        raise InputError(f"{where}.cuts: expected a list")
    w = {}
    for k, e in enumerate(entries):
        here = f"{where}.cuts[{k}]"
        side = frozenset(_labels(_field(e, "side", here), f"{here}.side"))
        if side in w:
            raise InputError(f"{here}: duplicate side")
        w[side] = _num(_field(e, "weight", here), f"{here}.weight")
    try:
        return CutWeights(points, anchor, w)
    except StructureError as exc:
        raise InputError(f"{where}: {exc}") from None


def cuts_to_json(w: CutWeights) -> dict:
    order = {p: i for i, p in enumerate(w.points)}
    sides = sorted(w.weights, key=lambda s: (len(s), sorted(order[x] for x in s)))
    return {"points": list(w.points), "anchor": w.anchor,
            "cuts": [{"side": sorted(s, key=order.__getitem__), "weight": _q(w.weights[s])}
                     for s in sides]}


def metric_from_json(obj, where: str = "metric") -> FiniteMetric:
    points = _labels(_field(obj, "points", where), f"{where}.points")
    rows = _field(obj, "d", where)
    if not isinstance(rows, list) or len(rows) != len(points):
        raise InputError(f"{where}.d: expected {len(points)} rows")
    d = []
    for i, row in enumerate(rows):
        if not isinstance(row, list) or len(row) != len(points):
            raise InputError(f"{where}.d[{i}]: expected {len(points)} entries")
        d.append([_num(v, f"{where}.d[{i}][{j}]") for j, v in enumerate(row)])
    try:
        return FiniteMetric(points, d)
    except StructureError as exc:
        raise InputError(f"{where}: {exc}") from None


def metric_to_json(m: FiniteMetric) -> dict:
    return {"points": list(m.points), "d": [[_q(v) for v in row] for row in m.d]}


def distributions_from_json(obj, where: str = "distributions"):
    """Two distributions {"p": [...], "q": [...]} with optional "outcomes" labels."""
    p = _field(obj, "p", where)
    q = _field(obj, "q", where)
    if not isinstance(p, list) or not isinstance(q, list) or len(p) != len(q) or not p:
        raise InputError(f"{where}: p and q must be nonempty lists of equal length")
    outcomes = obj.get("outcomes", list(range(len(p))))
    outcomes = _labels(outcomes, f"{where}.outcomes")
    if len(outcomes) != len(p):
        raise InputError(f"{where}.outcomes: expected {len(p)} labels")
    return (outcomes, [_num(v, f"{where}.p[{i}]") for i, v in enumerate(p)],
            [_num(v, f"{where}.q[{i}]") for i, v in enumerate(q)])


def structure_from_json(obj, where: str = "input"):
    kind = kind_of(obj)
    if kind == "diversity":
        return diversity_from_json(obj, where, check=False)
    if kind == "process":
        return process_from_json(obj, where)
    if kind == "cuts":
        return cuts_from_json(obj, where)
    if kind == "metric":
        return metric_from_json(obj, where)
    raise InputError(f"{where}: expected a structure, got {kind}")


def to_json(obj) -> dict:
    if isinstance(obj, FiniteDiversity):
        return diversity_to_json(obj)
    if isinstance(obj, FiniteProcess):
        return process_to_json(obj)
    if isinstance(obj, CutWeights):
        return cuts_to_json(obj)
    if isinstance(obj, FiniteMetric):
        return metric_to_json(obj)
    raise TypeError(f"no JSON form for {type(obj).__name__}")


def chain_report(steps) -> list[dict]:
    return [{"p": s.p, "d_inf": _q(s.d_inf),
             "d_succ": None if s.d_succ is None else _q(s.d_succ), "ok": s.ok}
            for s in steps]


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, default=_default)


def _default(x):
    if isinstance(x, Fraction):
        return _q(x)
    if isinstance(x, (set, frozenset, tuple)):
        return list(x)
    raise TypeError(f"cannot serialize {type(x).__name__}")
