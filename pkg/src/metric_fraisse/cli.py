"""Command line front end.

Exit codes: 0 success, 1 a certified failure (the report carries a witness),
2 malformed input or usage.
"""
from __future__ import annotations

import argparse
import random
import sys
from fractions import Fraction

from . import diversity as div
from . import formats as fmt
from . import l1cut, stochastic as sto
from .foundation import EnumeratedTuple, FiniteMetric, StructureError, d_infty, dK_lower_bound
from .fraisse import ChainError, NoisyOracle, build_rich_structure, extension_chain, preset_constant

OK, FAILED, BAD_INPUT = 0, 1, 2


class Failure(Exception):
    """A certified negative result; ``report`` is printed and the exit code is 1."""

    def __init__(self, report: dict):
        super().__init__(report.get("message", "failed"))
        self.report = report


# -- input helpers ---------------------------------------------------------------

def _load(path, kind=None, validate=True):
    obj = fmt.load(path)
    found = fmt.kind_of(obj)
    if kind is not None and found not in (kind if isinstance(kind, tuple) else (kind,)):
        raise fmt.InputError(f"{path}: expected a {kind}, found a {found}")
    try:
        S = fmt.structure_from_json(obj, str(path))
    except StructureError as exc:
        if found == "process":
            # the table parsed but breaks a process axiom
            raise Failure({"valid": False, "kind": "process", "message": str(exc)}) from None
        raise fmt.InputError(f"{path}: {exc}") from None
    if validate and found == "diversity":
        v = div.find_violation(S, S.semidiversity)
        if v is not None:
            raise Failure({"valid": False, "kind": "diversity", "rule": v.rule,
                           "message": f"{path}: {v.message}", "witness": v.witness})
    return S


def _label_list(text: str | None, flag: str) -> list | None:
    if text is None:
        return None
    items = [x.strip() for x in text.split(",") if x.strip()]
    if not items:
        raise fmt.InputError(f"{flag}: expected a comma-separated list of labels")
    return items


def _resolve(S, labels: list) -> list:
    """Map command-line strings back to the structure's own labels (which may be ints)."""
    by_text = {str(p): p for p in S.points}
    out = []
    for x in labels:
        if x not in by_text:
            raise fmt.InputError(f"unknown point {x!r}; known: {', '.join(by_text)}")
        out.append(by_text[x])
    return out


def _tuples(args):
    S1 = _load(args.first, ("diversity", "process"))
    S2 = _load(args.second, ("diversity", "process")) if args.second else S1
    left = _label_list(args.left, "--left") or [str(p) for p in S1.points]
    right = _label_list(args.right, "--right") or [str(p) for p in S2.points]
    try:
        a = EnumeratedTuple.of(S1, _resolve(S1, left))
        b = EnumeratedTuple.of(S2, _resolve(S2, right))
        d_infty(a, b)  # raises on length, kind or state mismatch
    except StructureError as exc:
        raise fmt.InputError(str(exc)) from None
    return a, b


# -- subcommands ---------------------------------------------------------------------

def cmd_validate(args):
    obj = fmt.load(args.file)
    kind = fmt.kind_of(obj)
    if kind == "metric":
        m = fmt.metric_from_json(obj, args.file)
        bad = m.triangle_violation()
        if bad:
            x, y, z = bad
            raise Failure({"valid": False, "kind": "metric", "rule": "triangle",
                           "witness": {"x": x, "y": y, "z": z},
                           "message": f"d({x},{z}) > d({x},{y}) + d({y},{z})"})
        return {"valid": True, "kind": "metric", "semimetric": m.is_semimetric_only}
    S = _load(args.file)
    if kind == "diversity":
        return {"valid": True, "kind": kind, "semidiversity": S.semidiversity}
    if kind == "process":
        sto.check_consistency(S)
        return {"valid": True, "kind": kind, "semi": S.semi}
    return {"valid": True, "kind": kind}


def cmd_induced_metric(args):
    S = _load(args.file, ("diversity", "process"))
    return fmt.to_json(S.induced_metric())


def _pair(args, kind):
    S1 = _load(args.first, kind)
    S2 = _load(args.second, kind)
    return S1, S2


def cmd_amalgamate(args):
    D1, D2 = _pair(args, "diversity")
    try:
        A = div.amalgamate_one_point(D1, D2)
    except StructureError as exc:
        raise fmt.InputError(str(exc)) from None
    z2 = A.points[-1]
    out = {"amalgam": fmt.to_json(A), "semidiversity": A.semidiversity}
    common = [p for p in D1.points if p in D2.points]
    z1 = next(p for p in D1.points if p not in D2.points)
    bound = d_infty(EnumeratedTuple.of(D1, common + [z1]), EnumeratedTuple.of(D2, common + [z2]))
    out["d_new"] = A.delta([z1, z2])
    out["d_inf"] = bound
    if args.quotient:
        out["quotient"] = fmt.to_json(div.quotient(A))
    return out


def cmd_join(args):
    S1 = _load(args.first, ("diversity", "process"))
    S2 = _load(args.second, ("diversity", "process"))
    if S1.kind != S2.kind:
        raise fmt.InputError("join needs two structures of the same kind")
    try:
        J = div.join(S1, S2) if S1.kind == "diversity" else sto.join_independent(S1, S2)
    except StructureError as exc:
        raise fmt.InputError(str(exc)) from None
    return fmt.to_json(J)


def cmd_quotient(args):
    S = _load(args.file, ("diversity", "process"))
    Q = div.quotient(S) if S.kind == "diversity" else sto.quotient(S)
    return fmt.to_json(Q)


def cmd_dinfty(args):
    a, b = _tuples(args)
    return {"d_inf": d_infty(a, b), "n": len(a)}


def cmd_dk_bounds(args):
    a, b = _tuples(args)
    d = d_infty(a, b)
    emb = (div.dK_upper_embedding if a.structure.kind == "diversity"
           else sto.dK_upper_embedding)(a, b)
    out = {"d_inf": d, "lower": dK_lower_bound(a, b), "upper": emb.bound, "method": emb.method}
    if args.joint:
        out["joint"] = fmt.to_json(emb.joint)
    return out


def cmd_couple(args):
    obj = fmt.load(args.file)
    outcomes, p, q = fmt.distributions_from_json(obj, args.file)
    try:
        c = sto.optimal_coupling(dict(zip(outcomes, p)), dict(zip(outcomes, q)))
        tv = sto.total_variation(p, q)
    except StructureError as exc:
        raise fmt.InputError(str(exc)) from None
    return {"total_variation": tv, "mismatch": c.mismatch,
            "joint": [{"left": u, "right": v, "prob": w} for (u, v), w in c.joint.items()]}


def cmd_process_amalgamate(args):
    P1, P2 = _pair(args, "process")
    try:
        A = sto.amalgamate(P1, P2)
    except StructureError as exc:
        raise fmt.InputError(str(exc)) from None
    z = A.index[-1]
    w = next(t for t in P1.index if t not in P2.index)
    common = [t for t in P1.index if t in P2.index]
    d = d_infty(EnumeratedTuple.of(P1, common + [w]), EnumeratedTuple.of(P2, common + [z]))
    c = preset_constant("process", len(common), len(P1.states))
    return {"amalgam": fmt.to_json(A), "d_new": A.distance(A.index_of(w), A.index_of(z)),
            "d_inf": d, "bound": c * d}


def cmd_decompose(args):
    D = _load(args.file, "diversity")
    anchor = _resolve(D, [args.anchor])[0] if args.anchor else None
    res = l1cut.decompose(D, anchor)
    if isinstance(res, l1cut.NotL1):
        raise Failure({"l1": False, "reason": res.reason, "message": res.describe(),
                       "witness": {"set": list(res.set), "implied": res.implied,
                                   "actual": res.actual,
                                   "negative": [{"side": sorted(s, key=str), "weight": v}
                                                for s, v in res.negative.items()]}})
    return {"l1": True, "cuts": fmt.to_json(res)}


def cmd_l1_amalgamate(args):
    D1, D2 = _pair(args, "diversity")
    anchor = _resolve(D1, [args.anchor])[0] if args.anchor else None
    try:
        r = l1cut.amalgamate_l1(D1, D2, anchor)
    except l1cut.L1Error as exc:
        raise Failure({"l1": False, "message": str(exc)}) from None
    except StructureError as exc:
        raise fmt.InputError(str(exc)) from None
    return {"amalgam": fmt.to_json(r.diversity), "cuts": fmt.to_json(r.weights),
            "d_new": r.z_distance, "bound": r.bound}


def cmd_check_l1_metric(args):
    obj = fmt.load(args.file)
    kind = fmt.kind_of(obj)
    if kind == "metric":
        m = fmt.metric_from_json(obj, args.file)
    elif kind == "diversity":
        m = _load(args.file, "diversity").induced_metric()
    else:
        raise fmt.InputError(f"{args.file}: expected a metric or a diversity")
    try:
        res = l1cut.is_l1_metric(m)
    except StructureError as exc:
        raise fmt.InputError(str(exc)) from None
    if isinstance(res, l1cut.Infeasible):
        raise Failure({"l1": False, "message": res.describe(),
                       "certificate": [{"pair": list(k), "multiplier": v}
                                       for k, v in res.certificate.items()]})
    return {"l1": True, "cuts": fmt.to_json(res)}


def _metric_arg(path) -> FiniteMetric:
    obj = fmt.load(path)
    kind = fmt.kind_of(obj)
    if kind == "metric":
        return fmt.metric_from_json(obj, path)
    if kind == "diversity":
        return _load(path, "diversity").induced_metric()
    raise fmt.InputError(f"{path}: expected a metric or a diversity")


def cmd_pentagonal(args):
    m = _metric_arg(args.file)
    try:
        if args.s3 or args.t2:
            s3 = _resolve(m, _label_list(args.s3, "--s3") or [])
            t2 = _resolve(m, _label_list(args.t2, "--t2") or [])
            value = l1cut.pentagonal_value(m, s3, t2)
            hits = [l1cut.PentagonalWitness(tuple(s3), tuple(t2), value)] if value > 0 else []
            checked = {"s3": s3, "t2": t2, "value": value}
        else:
            hits = l1cut.pentagonal_violations(m)
            checked = {"selections": "all"}
    except StructureError as exc:
        raise fmt.InputError(str(exc)) from None
    if hits:
        raise Failure({"pentagonal": False, "checked": checked,
                       "violations": [{"s3": list(h.s3), "t2": list(h.t2), "value": h.value}
                                      for h in hits]})
    return {"pentagonal": True, "checked": checked}


def cmd_counterexample(args):
    r = l1cut.nap_counterexample()
    report = {
        "inputs_l1": list(r.inputs_l1),
        "input_cuts": [fmt.to_json(w) for w in r.input_weights if w is not None],
        "gamma_range": [r.gamma_low, r.gamma_high],
        "pentagonal_form": {"constant": r.form_constant, "slope": r.form_slope},
        "pentagonal_at_ends": [r.value_low, r.value_high],
        "positive_on_range": r.value_low > 0 and r.value_high > 0,
        "k23_pentagonal": r.k23_value,
        "k23_l1": r.k23_certificate is None,
        "certified": r.ok,
    }
    if not r.ok:
        raise Failure(report)
    return report


def cmd_chain(args):
    from .generators import random_target

    rng = random.Random(args.seed)
    base = args.base if args.base is not None else (1 if args.kind == "diversity" else 2)
    target = random_target(rng, args.kind, base, args.states)
    c = preset_constant(args.kind, base, args.states)
    try:
        chain = extension_chain(target, NoisyOracle(args.seed, exact=args.exact), c, args.steps,
                                strict=False)
    except ChainError as exc:
        raise Failure({"ok": False, "message": str(exc),
                       "steps": fmt.chain_report(exc.steps)}) from None
    report = fmt.chain_report(chain.steps)
    if not chain.ok:
        raise Failure({"ok": False, "steps": report})
    return report


def cmd_build_rich(args):
    if args.catalog:
        raw = fmt.load(args.catalog)
        if not isinstance(raw, list):
            raise fmt.InputError(f"{args.catalog}: expected a JSON list of structures")
        catalog = [fmt.structure_from_json(t, f"{args.catalog}[{i}]") for i, t in enumerate(raw)]
    elif args.kind == "diversity":
        catalog = [div.FiniteDiversity(["b", "n"], [0, 0, 0, v]) for v in (1, 2)]
    else:
        raise fmt.InputError("processes need an explicit --catalog")
    start = _load(args.start) if args.start else None
    try:
        r = build_rich_structure(args.kind, catalog, args.rounds, args.epsilon, args.seed, start)
    except StructureError as exc:
        raise fmt.InputError(str(exc)) from None
    return {"structure": fmt.to_json(r.structure), "cap_reached": r.cap_reached,
            "applied": r.applied,
            "report": [{"template": e.template, "base": list(e.base), "best_d_inf": e.best,
                        "satisfied": e.satisfied} for e in r.report]}


# -- parser ----------------------------------------------------------------------

def _rational_arg(text: str) -> Fraction:
    try:
        from .foundation import rational
        return rational(text)
    except (StructureError, TypeError) as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="metric-fraisse", description=__doc__.splitlines()[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="write the report here instead of stdout")
    common.add_argument("--format", choices=("json", "text"), default="json")
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")

    def add(name, func, help, files=0):
        p = sub.add_parser(name, parents=[common], help=help, description=help)
        if files == 1:
            p.add_argument("file")
        elif files == 2:
            p.add_argument("first")
            p.add_argument("second")
        p.set_defaults(func=func)
        return p

    add("validate", cmd_validate, "check a diversity, process or metric file", 1)
    add("induced-metric", cmd_induced_metric, "pair distances of a diversity or process", 1)
    p = add("amalgamate", cmd_amalgamate, "minimal one-point amalgam of two diversities", 2)
    p.add_argument("--quotient", action="store_true", help="also merge points at distance 0")
    add("join", cmd_join, "disjoint union (diversities) or independent product (processes)", 2)
    add("quotient", cmd_quotient, "merge points at distance 0", 1)
    for name, func, help in (("dinfty", cmd_dinfty, "d_infty between two enumerated tuples"),
                             ("dk-bounds", cmd_dk_bounds, "certified bounds on d_K")):
        p = add(name, func, help)
        p.add_argument("first")
        p.add_argument("second", nargs="?")
        p.add_argument("--left", help="comma-separated labels of the first tuple")
        p.add_argument("--right", help="comma-separated labels of the second tuple")
        if name == "dk-bounds":
            p.add_argument("--joint", action="store_true", help="include the joint structure")
    add("couple", cmd_couple, "optimal coupling of two distributions", 1)
    add("process-amalgamate", cmd_process_amalgamate, "conditional-coupling amalgam", 2)
    p = add("decompose", cmd_decompose, "cut decomposition of a diversity", 1)
    p.add_argument("--anchor")
    p = add("l1-amalgamate", cmd_l1_amalgamate, "L1 amalgam of two L1 diversities", 2)
    p.add_argument("--anchor")
    add("check-l1-metric", cmd_check_l1_metric, "exact cut-cone membership (<= 6 points)", 1)
    p = add("pentagonal", cmd_pentagonal, "pentagonal inequality check", 1)
    p.add_argument("--s3", help="three comma-separated labels")
    p.add_argument("--t2", help="two comma-separated labels")
    add("counterexample-k23", cmd_counterexample, "certify that finite L1 metrics lack AP")
    p = add("chain", cmd_chain, "seeded exact-extension chain with certified bounds")
    p.add_argument("--kind", choices=("diversity", "process"), default="diversity")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--steps", type=int, default=10)
    p.add_argument("--base", type=int, help="length of the base tuple")
    p.add_argument("--states", type=int, default=2)
    p.add_argument("--exact", action="store_true", help="use the exact oracle")
    p = add("build-rich", cmd_build_rich, "grow a structure rich against a catalog")
    p.add_argument("--kind", choices=("diversity", "process"), default="diversity")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--rounds", type=int, default=20)
    p.add_argument("--epsilon", type=_rational_arg, default=Fraction(0))
    p.add_argument("--catalog", help="JSON list of one-point extension templates")
    p.add_argument("--start", help="starting structure")
    return parser


def _text(obj, indent: str = "") -> str:
    if isinstance(obj, dict):
        lines = []
        for k, v in obj.items():
            if isinstance(v, (dict, list)) and v:
                lines.append(f"{indent}{k}:")
                lines.append(_text(v, indent + "  "))
            else:
                lines.append(f"{indent}{k}: {_scalar(v)}")
        return "\n".join(lines)
    if isinstance(obj, list):
        return "\n".join(f"{indent}- " + _text(v, indent + "  ").lstrip() for v in obj)
    return indent + _scalar(obj)


def _scalar(v) -> str:
    if isinstance(v, Fraction):
        return fmt.format_rational(v)
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_scalar(x) for x in v) + "]"
    return str(v)


def _emit(report, args) -> None:
    text = fmt.dumps(report) if args.format == "json" else _text(report)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        report = args.func(args)
        code = OK
    except Failure as f:
        report, code = f.report, FAILED
    except fmt.InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return BAD_INPUT
    _emit(report, args)
    return code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
