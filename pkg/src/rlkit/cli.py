"""Command-line interface.

Exit codes: 0 success or property holds, 1 property refuted, 2 usage or
input error, 3 internal consistency failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction

from . import __version__
from .algebra import (
    classify,
    direct_product,
    generated_subalgebra,
    heyting_chain,
    is_conucleus,
    lukasiewicz_chain,
    morphism_search,
    resolve_algebra,
    validate_algebra,
)
from .errors import ConsistencyError, RLKitError
from .filters import enumerate_filters, is_deductive_filter, quotient, si_analysis, value_poset, values
from .poset_product import (
    ac_criteria,
    box,
    box_conucleus,
    build_poset_product,
    dual_frame,
    enumerate_ac_labelings,
    load_frame,
)
from .posets import poset_from_dict
from .semantics import (
    RelationalModel,
    TemporalFlow,
    check_temporal_assignment,
    countermodel_search,
    extension,
    frame_family,
    frame_valid,
    kripke_bridge,
    kripke_forces,
    kripke_upsets,
    soundness_instance_suite,
    standard_axioms,
    temporal_crosscheck,
    temporal_crosscheck_all,
    temporal_values,
)
from .structure import conuclear_preservation_check, epsilon_embedding, represent_finite_gbl, value_frame
from .syntax import (
    Sequent,
    classify_hierarchy,
    evaluate_term,
    is_conuclear_equation,
    parse,
    parse_line,
    read_formula_file,
    render,
    sequent_consequence,
    variables,
)

OK, REFUTED, USAGE, INTERNAL = 0, 1, 2, 3


class UsageError(RLKitError):
    pass


# ---------------------------------------------------------------- input helpers

def _items(arg):
    """Equations/sequents from a formula file, or the inline text."""
    if os.path.isfile(arg):
        items = read_formula_file(arg)
        if not items:
            raise UsageError(f"{arg} contains no formulas")
        return items
    return [parse_line(arg)]


def _formulas(arg):
    out = []
    for item in _items(arg):
        if isinstance(item, Sequent):
            raise UsageError("expected a formula or equation, not a sequent")
        out.append(item.as_formula())
    return out


def _equations(arg):
    out = []
    for item in _items(arg):
        if isinstance(item, Sequent):
            raise UsageError("expected an equation, not a sequent")
        out.append(item)
    return out


def _algebra(spec, validate=True):
    return resolve_algebra(spec, validate=validate)


def _algebra_list(text):
    names = [s.strip() for s in text.split(",") if s.strip()]
    if not names:
        raise UsageError("--values needs at least one algebra")
    out = []
    for n in names:
        A = _algebra(n)
        A.name = A.name or n
        out.append(A)
    return out


def _ints(values):
    try:
        return [int(v) for v in values]
    except ValueError:
        raise UsageError(f"expected element indices, got {values}") from None


def _json_arg(text):
    """Inline JSON or a path to a JSON file."""
    try:
        if os.path.isfile(text):
            with open(text, encoding="utf-8") as fh:
                return json.load(fh)
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"invalid JSON ({exc})") from None


def _assignment(pairs, A):
    out = {}
    for p in pairs:
        name, _, val = p.partition("=")
        if not _ or not name.strip():
            raise UsageError(f"assignment {p!r} should look like x=2")
        v = _ints([val])[0]
        if not 0 <= v < A.size:
            raise UsageError(f"{name} = {v} is outside 0..{A.size - 1}")
        out[name.strip()] = v
    return out


def _valuation(frame, data):
    """{var: {node: value}} or {var: [values in node order]} -> labelings."""
    if not isinstance(data, dict):
        raise UsageError("valuation must be a JSON object")
    P = frame.poset
    out = {}
    for var, lab in data.items():
        if isinstance(lab, dict):
            missing = [n for n in P.names if n not in lab]
            if missing:
                raise UsageError(f"valuation of {var} misses node(s) {', '.join(missing)}")
            lab = [lab[n] for n in P.names]
        out[var] = tuple(_ints(lab))
    return RelationalModel(frame, out).valuation


def _fraction(v):
    try:
        return Fraction(str(v))
    except (ValueError, ZeroDivisionError):
        raise UsageError(f"{v!r} is not a rational number") from None


def _flow(data):
    if not isinstance(data, dict) or "poset" not in data or "labels" not in data:
        raise UsageError('flow JSON needs "poset" and "labels"')
    P = poset_from_dict(data["poset"])
    labels = data["labels"]
    if isinstance(labels, dict):
        labels = [labels[n] for n in P.names]
    return TemporalFlow(P, _ints(labels))


def _alg_summary(A, name=None):
    return {"name": name or A.name, **A.to_dict()}


# ---------------------------------------------------------------- commands

def cmd_validate_algebra(args):
    A = _algebra(args.algebra, validate=False)
    rep = validate_algebra(A)
    return rep.as_dict(), OK if rep.ok else REFUTED


def cmd_classify(args):
    A = _algebra(args.algebra)
    c = classify(A).as_dict()
    report = {"algebra": args.algebra, "size": A.size, **c}
    code = OK
    for flag in args.expect or ():
        key = flag if flag.startswith("is_") else f"is_{flag}"
        if key not in c:
            raise UsageError(f"unknown classification flag {flag!r}")
        if not c[key]:
            code = REFUTED
    return report, code


def cmd_chain(args):
    A = heyting_chain(args.k) if args.heyting else lukasiewicz_chain(args.k)
    return _alg_summary(A), OK


def cmd_product(args):
    As = [_algebra(a) for a in args.algebras]
    P = direct_product(As, args.cap)
    return _alg_summary(P, "x".join(args.algebras)), OK


def cmd_subalgebra(args):
    A = _algebra(args.algebra)
    elems, S = generated_subalgebra(A, _ints(args.elements))
    return {"elements": elems, "algebra": _alg_summary(S)}, OK


def cmd_filters(args):
    A = _algebra(args.algebra)
    fs = enumerate_filters(A, args.cap)
    return {"count": len(fs), "filters": [list(F.elements) for F in fs]}, OK


def cmd_values(args):
    A = _algebra(args.algebra)
    vals = values(A, args.cap)
    P = value_poset(vals)
    return {
        "count": len(vals),
        "values": {n: list(F.elements) for n, F in zip(P.names, vals)},
        "poset": P.to_dict(),
    }, OK


def cmd_quotient(args):
    A = _algebra(args.algebra)
    S = _ints(args.filter)
    ok, violation = is_deductive_filter(A, S)
    if not ok:
        return {"is_filter": False, "violation": violation}, REFUTED
    Q, proj = quotient(A, S)
    return {"is_filter": True, "projection": proj, "quotient": _alg_summary(Q)}, OK


def cmd_si(args):
    A = _algebra(args.algebra)
    rep = si_analysis(A, args.cap)
    return rep.as_dict(), OK if rep.is_si else REFUTED


def cmd_box(args):
    F = load_frame(args.frame)
    f = _ints(args.choice)
    fixed, three, four = ac_criteria(F, f)
    if not fixed == three == four:
        raise ConsistencyError(f"ac-labeling criteria disagree on {f}")
    return {"input": f, "box": list(box(F, f)), "is_ac_labeling": fixed}, OK


def cmd_labelings(args):
    F = load_frame(args.frame)
    if args.dual:
        F = dual_frame(F)
    labs = enumerate_ac_labelings(F, args.cap)
    return {"nodes": F.poset.names, "count": len(labs), "labelings": [list(f) for f in labs]}, OK


def cmd_poset_product(args):
    F = load_frame(args.frame)
    if args.dual:
        F = dual_frame(F)
    P = build_poset_product(F, args.cap)
    D, sigma = box_conucleus(F, args.cap)
    ok, _, _ = is_conucleus(D, sigma)
    if not ok:
        raise ConsistencyError("box is not a conucleus on the direct product")
    return {
        "frame": F.to_dict(),
        "size": P.size,
        "labelings": [list(f) for f in P.labelings],
        "classification": classify(P.algebra).as_dict(),
        "box_is_conucleus": ok,
        "algebra": P.algebra.to_dict(),
    }, OK


def cmd_value_frame(args):
    A = _algebra(args.algebra)
    vf = value_frame(A)
    return {
        "values": {n: list(F.elements) for n, F in zip(vf.frame.poset.names, vf.values)},
        "factors": vf.factor_names,
        "frame": vf.frame.to_dict(),
    }, OK


def cmd_embed(args):
    A = _algebra(args.algebra)
    if args.target is None:
        return epsilon_embedding(A).as_dict(), OK
    B = _algebra(args.target)
    f = morphism_search(A, B, args.mode, args.cap)
    return {"mode": args.mode, "found": f is not None, "map": f}, OK if f is not None else REFUTED


def cmd_represent(args):
    A = _algebra(args.algebra)
    return represent_finite_gbl(A).as_dict(args.algebra), OK


def cmd_parse(args):
    out = []
    for item in _items(args.formula):
        kind = "sequent" if isinstance(item, Sequent) else "equation"
        out.append({"kind": kind, "canonical": str(item)})
    return {"items": out}, OK


def cmd_eval(args):
    A = _algebra(args.algebra)
    t = parse(args.formula)
    assignment = _assignment(args.assign or (), A)
    return {"formula": render(t), "assignment": assignment, "value": int(evaluate_term(A, assignment, t))}, OK


def cmd_hierarchy(args):
    rows = []
    for t in _formulas(args.formula):
        rows.append({"formula": render(t), **classify_hierarchy(t).as_dict()})
    return {"terms": rows}, OK


def cmd_conuclear(args):
    rows = []
    code = OK
    for eq in _equations(args.equation):
        ok, trace = is_conuclear_equation(eq)
        row = {"equation": str(eq), "conuclear": ok, "trace": trace}
        if not ok:
            code = REFUTED
        if args.algebra and ok:
            A = _algebra(args.algebra)
            sigma = _ints(args.sigma) if args.sigma else list(range(A.size))
            row["preservation"] = conuclear_preservation_check(A, sigma, eq)
        rows.append(row)
    return {"equations": rows}, code


def cmd_sequent(args):
    A = _algebra(args.algebra)
    rows = []
    code = OK
    for item in _items(args.sequent):
        if not isinstance(item, Sequent):
            raise UsageError("expected a sequent 'p, q |- r'")
        res = sequent_consequence(A, item, args.k_max, args.cap)
        rows.append({"sequent": str(item), **res})
        if not res["direct"]:
            code = REFUTED
    return {"sequents": rows}, code


def cmd_valid(args):
    F = load_frame(args.frame)
    P = build_poset_product(F, args.cap)
    reports = [frame_valid(F, phi, cap=args.cap, seed=args.seed, sample=True, product=P).as_dict()
               for phi in _formulas(args.formula)]
    code = REFUTED if any(r["verdict"] == "refuted" for r in reports) else OK
    return reports[0] if len(reports) == 1 else {"reports": reports}, code


def cmd_countermodel(args):
    algs = _algebra_list(args.values)
    reports = [countermodel_search(phi, args.max_poset, algs, cap=args.cap, seed=args.seed).as_dict()
               for phi in _formulas(args.formula)]
    code = REFUTED if any(r["verdict"] == "refuted" for r in reports) else OK
    return reports[0] if len(reports) == 1 else {"reports": reports}, code


def cmd_kripke(args):
    F = load_frame(args.frame)
    upsets = {}
    for spec in args.upset or ():
        name, _, nodes = spec.partition("=")
        if not _:
            raise UsageError(f"up-set {spec!r} should look like p=t1,t2")
        upsets[name.strip()] = [n for n in nodes.split(",") if n]
    valuation = kripke_bridge(F, upsets)
    if {k: sorted(v) for k, v in kripke_upsets(F, valuation).items()} != {k: sorted(v) for k, v in upsets.items()}:
        raise ConsistencyError("up-set round trip failed")
    model = RelationalModel(F, valuation)
    rows = []
    for phi in _formulas(args.formula):
        missing = set(variables(phi)) - set(upsets)
        if missing:
            raise UsageError(f"no up-set for {', '.join(sorted(missing))}")
        ext = extension(model, phi)
        forced = [n for x, n in enumerate(F.poset.names) if ext[x] == F.tops[x]]
        kripke = [n for n in F.poset.names if kripke_forces(F.poset, upsets, n, phi)]
        if forced != kripke:
            raise ConsistencyError(f"labeling forcing {forced} differs from Kripke forcing {kripke}")
        rows.append({"formula": render(phi), "forced_at": forced})
    return {"valuation": {k: list(v) for k, v in valuation.items()}, "formulas": rows}, OK


def cmd_temporal_eval(args):
    flow = _flow(_json_arg(args.flow))
    data = _json_arg(args.assignment)
    P = flow.poset
    v = {}
    for var, vals in data.items():
        if isinstance(vals, dict):
            vals = [vals.get(n) for n in P.names]
        for t, val in enumerate(vals):
            if val is not None:
                v[(var, t)] = _fraction(val)
    check_temporal_assignment(flow, v)
    rows = []
    for phi in _formulas(args.formula):
        vals = temporal_values(flow, v, phi)
        rows.append({"formula": render(phi), "values": {n: str(x) for n, x in zip(P.names, vals)}})
    return rows[0] if len(rows) == 1 else {"formulas": rows}, OK


def cmd_temporal_crosscheck(args):
    F = load_frame(args.frame)
    rows = []
    for phi in _formulas(args.formula):
        if args.valuation:
            rows.append(temporal_crosscheck(F, _valuation(F, _json_arg(args.valuation)), phi))
        else:
            n = temporal_crosscheck_all(F, phi, args.cap)
            rows.append({"formula": render(phi), "agree": True, "valuations_checked": n})
    return rows[0] if len(rows) == 1 else {"formulas": rows}, OK


def cmd_soundness_suite(args):
    algs = _algebra_list(args.values)
    frames = list(frame_family(args.max_poset, algs))
    axioms = standard_axioms()
    if args.axiom:
        axioms = [a for a in axioms if a.name in args.axiom]
        if not axioms:
            raise UsageError("no matching axioms")
    rep = soundness_instance_suite(frames, axioms, cap=args.cap)
    rep["frames"] = len(frames)
    rep["axioms"] = [a.name for a in axioms]
    if not args.rows:
        rep.pop("rows")
    return rep, OK


# ---------------------------------------------------------------- parser

def build_parser():
    p = argparse.ArgumentParser(prog="rlkit", description="Finite residuated lattices and poset-product semantics.")
    p.add_argument("--version", action="version", version=f"rlkit {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="emit a JSON report")
    common.add_argument("--seed", type=int, default=0, help="seed for sampled searches (default 0)")
    common.add_argument("--cap", type=int, default=None, help="size/evaluation cap")
    common.add_argument("--max-poset", type=int, default=3, help="largest poset in generated families")
    common.add_argument("--values", default="L2", help="comma-separated factor algebras for generated frames")
    sub = p.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def add(name, func, help_):
        sp = sub.add_parser(name, parents=[common], help=help_)
        sp.set_defaults(func=func)
        return sp

    add("validate-algebra", cmd_validate_algebra, "check the residuated lattice axioms").add_argument("algebra")
    sp = add("classify", cmd_classify, "GBL/BL/MV/Heyting/Godel/Boolean, chain, potency")
    sp.add_argument("algebra")
    sp.add_argument("--expect", action="append", help="exit 1 unless this flag holds (repeatable)")
    sp = add("chain", cmd_chain, "print the k-element Lukasiewicz (or Heyting) chain")
    sp.add_argument("k", type=int)
    sp.add_argument("--heyting", action="store_true")
    add("product", cmd_product, "direct product").add_argument("algebras", nargs="+")
    sp = add("subalgebra", cmd_subalgebra, "subalgebra generated by elements")
    sp.add_argument("algebra")
    sp.add_argument("elements", nargs="*")
    add("filters", cmd_filters, "all deductive filters").add_argument("algebra")
    add("values", cmd_values, "values and their inclusion poset").add_argument("algebra")
    sp = add("quotient", cmd_quotient, "quotient by a deductive filter")
    sp.add_argument("algebra")
    sp.add_argument("filter", nargs="+")
    add("si", cmd_si, "subdirect irreducibility").add_argument("algebra")
    sp = add("box", cmd_box, "apply box to a choice function")
    sp.add_argument("frame")
    sp.add_argument("choice", nargs="+", metavar="value")
    for name, func, help_ in (
        ("labelings", cmd_labelings, "enumerate ac-labelings"),
        ("poset-product", cmd_poset_product, "build the poset product"),
    ):
        sp = add(name, func, help_)
        sp.add_argument("frame")
        sp.add_argument("--dual", action="store_true", help="use the dual poset")
    add("value-frame", cmd_value_frame, "the value frame of a finite GBL-algebra").add_argument("algebra")
    sp = add("embed", cmd_embed, "epsilon embedding, or a morphism search into TARGET")
    sp.add_argument("algebra")
    sp.add_argument("target", nargs="?")
    sp.add_argument("--mode", choices=("hom", "embedding", "isomorphism"), default="embedding")
    add("represent", cmd_represent, "isomorphism onto the poset product of the value frame").add_argument("algebra")
    add("parse", cmd_parse, "parse and print canonically").add_argument("formula")
    sp = add("eval", cmd_eval, "evaluate a term in an algebra")
    sp.add_argument("algebra")
    sp.add_argument("formula")
    sp.add_argument("assign", nargs="*", help="x=element")
    add("hierarchy", cmd_hierarchy, "substructural hierarchy levels").add_argument("formula")
    sp = add("conuclear", cmd_conuclear, "conuclear shape check, optionally preservation in an algebra")
    sp.add_argument("equation")
    sp.add_argument("--algebra")
    sp.add_argument("--sigma", nargs="+", help="conucleus as a list of images (default identity)")
    sp = add("sequent", cmd_sequent, "direct consequence and local deduction")
    sp.add_argument("algebra")
    sp.add_argument("sequent")
    sp.add_argument("--k-max", type=int, default=4)
    sp = add("valid", cmd_valid, "frame validity")
    sp.add_argument("frame")
    sp.add_argument("formula")
    add("countermodel", cmd_countermodel, "search generated frames for a countermodel").add_argument("formula")
    sp = add("kripke", cmd_kripke, "forcing from up-sets on a two-valued frame")
    sp.add_argument("frame")
    sp.add_argument("formula")
    sp.add_argument("--upset", action="append", help="p=node,node (repeatable)")
    sp = add("temporal-eval", cmd_temporal_eval, "temporal semantics over a flow")
    sp.add_argument("flow", help="flow JSON or file")
    sp.add_argument("formula")
    sp.add_argument("assignment", help="JSON {var: {node: value}} or file")
    sp = add("temporal-crosscheck", cmd_temporal_crosscheck, "temporal vs relational values")
    sp.add_argument("frame")
    sp.add_argument("formula")
    sp.add_argument("--valuation", help="JSON {var: {node: element}}; default all valuations")
    sp = add("soundness-suite", cmd_soundness_suite, "axiom validity over generated frames")
    sp.add_argument("--axiom", action="append")
    sp.add_argument("--rows", action="store_true", help="include per-frame rows")
    return p


def _text(report, indent=""):
    lines = []
    for k, v in report.items():
        if isinstance(v, dict) and v and all(not isinstance(x, (dict, list)) for x in v.values()):
            lines.append(f"{indent}{k}: " + ", ".join(f"{a}={b}" for a, b in v.items()))
        elif isinstance(v, (dict, list)):
            lines.append(f"{indent}{k}: {json.dumps(v, sort_keys=True)}")
        else:
            lines.append(f"{indent}{k}: {v}")
    return "\n".join(lines)


def run(argv=None, out=None, err=None):
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return USAGE if exc.code else OK
    try:
        report, code = args.func(args)
    except ConsistencyError as exc:
        _error(args, err, out, "consistency", exc)
        return INTERNAL
    except (RLKitError, OSError) as exc:
        _error(args, err, out, type(exc).__name__, exc)
        return USAGE
    if args.json:
        out.write(json.dumps(report, sort_keys=True, indent=2, default=str) + "\n")
    else:
        out.write(_text(report) + "\n")
    return code


def _error(args, err, out, kind, exc):
    if getattr(args, "json", False):
        out.write(json.dumps({"error": kind, "message": str(exc)}, sort_keys=True) + "\n")
    err.write(f"rlkit: {exc}\n")


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
