"""``treekit`` command line interface.

Exit codes: 0 OK, 1 FAIL/UNSAT (a counterexample or no witness), 2 usage
or format error, 3 INDETERMINATE (budget exhausted).  ``--expect`` turns
the verdict into a pass/fail assertion for CI.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from fractions import Fraction
from pathlib import Path

from . import __version__
from .fraisse import check_extension_property, generic_stage
from .indiscernibles import (
    check_cone_indiscernible,
    check_indexed_indiscernible,
    check_side_sets,
    check_treetop_collapse,
    extract_copy,
    load_family,
)
from .patterns import (
    ConstraintError,
    SwitcherooError,
    enumerate_embeddings,
    find_realizations,
    solve_switcheroo1,
    solve_switcheroo2,
)
from .ramsey import (
    RamseyError,
    RamseyInstance,
    collapse_leaf_coloring,
    is_ramsey_witness,
    lift_coloring,
    ls_code_coloring,
    ramsey_search,
)
from .tree_core import (
    LanguageTag,
    TreeError,
    balanced_tree,
    format_node,
    format_tree,
    parse_node,
    parse_tree,
    qftp,
)
from .verify import verify_certificate
from .witnesses import (
    RatInterval,
    WitnessError,
    interval_sop2,
    intervals_to_sop3,
    multigraph_certificate,
    multigraph_family,
    oag_certificate,
    oag_family,
    sop3_boundary,
    sop3_replay,
    sop3_to_intervals,
    two_ip_certificate,
    two_ip_family,
)

EXIT = {"OK": 0, "FAIL": 1, "UNSAT": 1, "INDETERMINATE": 3}


class UsageError(Exception):
    pass


class Context:
    """Collects input digests for the report."""

    def __init__(self, args):
        self.args = args
        self.inputs: dict = {}

    def read(self, path: str) -> str:
        try:
            data = Path(path).read_bytes()
        except OSError as exc:
            raise UsageError(f"cannot read {path}: {exc.strerror}") from exc
        self.inputs[path] = hashlib.sha256(data).hexdigest()
        return data.decode("utf-8")

    def tree(self, path: str, autoclose: bool = False):
        return parse_tree(self.read(path), autoclose=autoclose)

    def family(self, path: str):
        try:
            return load_family(self.read(path))
        except (ValueError, KeyError) as exc:
            raise UsageError(f"bad family file {path}: {exc}") from exc


def _nodes(text: str | None) -> tuple:
    if not text:
        return ()
    return tuple(parse_node(s.strip()) for s in text.split(","))


def _fmt(tup) -> list:
    return [format_node(n) for n in tup]


def _check_json(result) -> dict:
    return result.to_json()


# --- command handlers: each returns (verdict, payload) ------------------------


def cmd_validate(ctx, a):
    tree = ctx.tree(a.tree, a.autoclose)
    depth = max((len(n) for n in tree.nodes), default=0)
    return "OK", {
        "nodes": len(tree),
        "leaves": len(tree.leaves),
        "max_word_length": depth,
        "tree": format_tree(tree),
    }


def cmd_qftp(ctx, a):
    tree = ctx.tree(a.tree)
    tup = _nodes(a.tuple)
    code = qftp(tree, tup, LanguageTag(a.tag))
    return "OK", {"tuple": _fmt(tup), "code": code.to_json()}


def cmd_emb(ctx, a):
    src, tgt = ctx.tree(a.source), ctx.tree(a.target)
    embs = enumerate_embeddings(src, tgt, a.limit, respect_p=not a.ignore_p)
    return ("OK" if embs else "FAIL"), {"count": len(embs), "embeddings": [e.to_json() for e in embs]}


def cmd_realize(ctx, a):
    tree = ctx.tree(a.tree)
    ref_tree = ctx.tree(a.type_tree) if a.type_tree else tree
    q = qftp(ref_tree, _nodes(a.tuple), LanguageTag(a.tag))
    out = find_realizations(q, tree, a.constraint or None, a.limit)
    return ("OK" if out else "FAIL"), {"code": q.to_json(), "realizations": [_fmt(t) for t in out]}


def cmd_sw1(ctx, a):
    tree = ctx.tree(a.tree)
    etas, eta_n = _nodes(a.etas), parse_node(a.eta_n)
    res = solve_switcheroo1(tree, etas, eta_n)
    cert = {
        "kind": "sw1",
        "tree": format_tree(tree),
        "etas": _fmt(etas),
        "eta_n": format_node(eta_n),
        "status": res.status,
        "witness": None if res.witness is None else _fmt(res.witness),
        "nodes_visited": res.nodes_visited,
    }
    return ("OK" if res.sat else "UNSAT"), {"certificate": cert}


def cmd_sw2(ctx, a):
    tree = ctx.tree(a.tree)
    eta0, fan = parse_node(a.eta0), _nodes(a.fan)
    res = solve_switcheroo2(tree, eta0, fan)
    cert = {
        "kind": "sw2",
        "tree": format_tree(tree),
        "eta0": format_node(eta0),
        "fan": _fmt(fan),
        "status": res.status,
        "witness": None if res.witness is None else _fmt(res.witness),
        "nodes_visited": res.nodes_visited,
    }
    return ("OK" if res.sat else "UNSAT"), {"certificate": cert}


def _instance(ctx, a):
    return RamseyInstance(ctx.tree(a.A), ctx.tree(a.B), a.r)


def cmd_ramsey_check(ctx, a):
    inst = _instance(ctx, a)
    c = ctx.tree(a.C)
    res = is_ramsey_witness(inst, c, method=a.method, budget=ctx.args.budget, seed=ctx.args.seed or None)
    verdict = {"WITNESS": "OK", "REFUTED": "FAIL", "INDETERMINATE": "INDETERMINATE"}[res.status]
    cert = {
        "kind": "ramsey",
        "A": format_tree(inst.a),
        "B": format_tree(inst.b),
        "r": inst.r,
        "C": format_tree(c),
        "status": res.status,
        "coloring": None if res.bad_coloring is None else list(res.bad_coloring),
        "verified": res.status == "WITNESS",
    }
    return verdict, {"certificate": cert, "stats": res.to_json()}


def cmd_ramsey_search(ctx, a):
    inst = _instance(ctx, a)
    out = ramsey_search(inst, a.size_budget, a.strategy, ctx.args.budget, verify_seed=ctx.args.seed + 1)
    payload = out.to_json()
    if out.witness is not None:
        payload["certificate"] = {
            "kind": "ramsey",
            "A": format_tree(inst.a),
            "B": format_tree(inst.b),
            "r": inst.r,
            "C": format_tree(out.witness),
            "status": "WITNESS",
            "coloring": None,
            "verified": True,
        }
    return ("OK" if out.status == "FOUND" else "FAIL"), payload


def cmd_ramsey_collapse(ctx, a):
    tree = ctx.tree(a.tree)
    q = qftp(tree, _nodes(a.tuple), LanguageTag.L0P)
    reals = find_realizations(q, tree)
    chi = ls_code_coloring(tree)
    res = collapse_leaf_coloring(tree, q, chi, reals)
    if not res.well_defined:
        return "FAIL", {"conflict": [_fmt(t) for t in res.conflict]}
    lifted = lift_coloring(q, res.minus_coloring, reals)
    round_trip = all(lifted[z] == chi(z) for z in reals)
    return ("OK" if round_trip else "FAIL"), {
        "realizations": len(reals),
        "minus_tuples": len(res.minus_coloring),
        "round_trip": round_trip,
    }


def cmd_fraisse_stage(ctx, a):
    st = generic_stage(a.k, a.max_nodes, a.rounds)
    payload = {
        "stage": st.stage,
        "nodes": len(st.tree),
        "tree": format_tree(st.tree),
        "demand_log": [
            {"demand": r.demand.describe(), "step": r.step, "witness": _fmt(r.witness)} for r in st.demand_log
        ],
        "concrete_extensions": len(st.concrete_log),
        "unmet": [d.describe() if hasattr(d, "describe") else f"{_fmt(d[0])} + {d[1].describe()}" for d in st.unmet],
    }
    if a.tree_out:
        Path(a.tree_out).write_text(format_tree(st.tree), encoding="utf-8")
    return ("OK" if st.complete else "INDETERMINATE"), payload


def cmd_fraisse_extend(ctx, a):
    tree = ctx.tree(a.tree)
    missing = check_extension_property(tree, a.k)
    return ("OK" if not missing else "FAIL"), {"missing": [d.describe() for d in missing]}


def cmd_indisc_check(ctx, a):
    res = check_indexed_indiscernible(ctx.family(a.family), LanguageTag(a.tag), a.n_max)
    return ("OK" if res.ok else "FAIL"), {"result": res.to_json()}


def cmd_indisc_collapse(ctx, a):
    res = check_treetop_collapse(ctx.family(a.family), a.n_max, _nodes(a.anchor) or None)
    return ("OK" if res.ok else "FAIL"), {"result": res.to_json()}


def cmd_indisc_cones(ctx, a):
    res = check_cone_indiscernible(ctx.family(a.family), parse_node(a.xi), a.n_max)
    return ("OK" if res.ok else "FAIL"), {"result": res.to_json()}


def cmd_indisc_sides(ctx, a):
    rep = check_side_sets(ctx.family(a.family), parse_node(a.nu), a.n_max)
    return ("OK" if rep.ok else "FAIL"), {"result": rep.to_json()}


def cmd_indisc_extract(ctx, a):
    fam = ctx.family(a.family)
    res = extract_copy(fam, ctx.tree(a.J), a.n_max, ctx.args.budget)
    if res.status == "FOUND":
        return "OK", {"tried": res.tried, "embedding": res.embedding.to_json()}
    over = ctx.args.budget is not None and res.tried >= ctx.args.budget
    return ("INDETERMINATE" if over else "FAIL"), {"tried": res.tried}


def _write_family(a, fam):
    if getattr(a, "family_out", None):
        Path(a.family_out).write_text(json.dumps(fam.to_json(), indent=1), encoding="utf-8")


def cmd_w_oag(ctx, a):
    cert = oag_certificate(a.n, a.m, Fraction(a.g))
    _write_family(a, oag_family(a.n, a.m, Fraction(a.g)))
    return ("FAIL" if cert["collapse"]["counterexample"] else "OK"), {"certificate": cert}


def cmd_w_multigraph(ctx, a):
    cert = multigraph_certificate(a.b, a.d)
    _write_family(a, multigraph_family(a.b, a.d)[1])
    return ("FAIL" if not cert["collapse"]["ok"] else "OK"), {"certificate": cert}


def cmd_w_2ip(ctx, a):
    cert = two_ip_certificate(a.b, a.d)
    _write_family(a, two_ip_family(a.b, a.d)[1])
    return ("FAIL" if not cert["collapse"]["ok"] else "OK"), {"certificate": cert}


def _index(ctx, a):
    return ctx.tree(a.tree) if a.tree else balanced_tree(a.b, a.d)


def cmd_w_sop2(ctx, a):
    fam = interval_sop2(_index(ctx, a))
    bad = fam.invariant_failures()
    return ("OK" if not bad else "FAIL"), {"certificate": fam.certificate(), "violations": bad}


def cmd_w_sop3(ctx, a):
    payload = {}
    if a.boundary:
        depth, log = sop3_boundary(a.n, a.max_depth, a.b)
        payload["boundary"] = {"first_sat_depth": depth, "log": [list(x) for x in log]}
    fam = interval_sop2(_index(ctx, a))
    res = sop3_replay(fam, a.n)
    payload["certificate"] = res.certificate(fam)
    if res.status == "UNSAT":
        return "UNSAT", payload
    return ("OK" if res.verified else "FAIL"), payload


def cmd_w_i2s(ctx, a):
    ks = [Fraction(k) for k in a.ks.split(",")] if a.ks else None
    cert = intervals_to_sop3(a.n, ks)
    return ("OK" if cert["verified"] else "FAIL"), {"certificate": cert}


def cmd_w_s2i(ctx, a):
    sample = None
    if a.sample:
        data = json.loads(ctx.read(a.sample))
        sample = [RatInterval(Fraction(lo), Fraction(hi)) for lo, hi in data]
    cert = sop3_to_intervals(sample)
    return ("OK" if cert["verified"] else "FAIL"), {"certificate": cert}


# --- parser -------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="print the full JSON report")
    common.add_argument("--budget", type=int, default=None, help="search budget (nodes or candidates)")
    common.add_argument("--jobs", type=int, default=1, help="worker count (echoed; searches run in-process)")
    common.add_argument("--seed", type=int, default=0, help="seed for search tie-breaking")
    common.add_argument("--expect", choices=("ok", "fail"), help="exit 0 iff the verdict has this polarity")
    common.add_argument("--out", help="write the JSON report to this path")

    p = argparse.ArgumentParser(prog="treekit", parents=[common], description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"treekit {__version__}")
    p.add_argument("--verify-only", metavar="CERT", help="re-check a saved report or certificate and exit")
    sub = p.add_subparsers(dest="command")

    def add(parent, name, func, help_text):
        sp = parent.add_parser(name, parents=[common], help=help_text)
        sp.set_defaults(func=func)
        return sp

    sp = add(sub, "validate", cmd_validate, "parse and validate a tree file")
    sp.add_argument("tree")
    sp.add_argument("--autoclose", action="store_true")

    sp = add(sub, "qftp", cmd_qftp, "canonical qf type code of a tuple")
    sp.add_argument("tree")
    sp.add_argument("--tuple", required=True, help="comma separated node paths")
    sp.add_argument("--tag", default="L0P", choices=[t.value for t in LanguageTag])

    sp = add(sub, "emb", cmd_emb, "enumerate embeddings")
    sp.add_argument("source")
    sp.add_argument("target")
    sp.add_argument("--limit", type=int)
    sp.add_argument("--ignore-p", action="store_true", help="embed as L0 structures")

    sp = add(sub, "realize", cmd_realize, "realizations of a tuple's type under a constraint")
    sp.add_argument("tree")
    sp.add_argument("--tuple", required=True)
    sp.add_argument("--type-tree", help="read the tuple from this tree instead")
    sp.add_argument("--tag", default="L0P", choices=[t.value for t in LanguageTag])
    sp.add_argument("--constraint", default="")
    sp.add_argument("--limit", type=int)

    solve = sub.add_parser("solve", help="switcheroo witness searches").add_subparsers(dest="sub", required=True)
    sp = add(solve, "sw1", cmd_sw1, "first switcheroo problem")
    sp.add_argument("tree")
    sp.add_argument("--etas", required=True)
    sp.add_argument("--eta-n", required=True)
    sp = add(solve, "sw2", cmd_sw2, "second switcheroo problem")
    sp.add_argument("tree")
    sp.add_argument("--eta0", required=True)
    sp.add_argument("--fan", required=True)

    ram = sub.add_parser("ramsey", help="Ramsey checks").add_subparsers(dest="sub", required=True)
    sp = add(ram, "check", cmd_ramsey_check, "is C a witness for (A, B, r)")
    for flag in ("--A", "--B", "--C"):
        sp.add_argument(flag, required=True)
    sp.add_argument("-r", type=int, default=2)
    sp.add_argument("--method", choices=("backtrack", "exhaustive"), default="backtrack")
    sp = add(ram, "search", cmd_ramsey_search, "search for a witness C")
    sp.add_argument("--A", required=True)
    sp.add_argument("--B", required=True)
    sp.add_argument("-r", type=int, default=2)
    sp.add_argument("--size-budget", type=int, default=20)
    sp.add_argument("--strategy", choices=("default", "balanced", "generic"), default="default")
    sp = add(ram, "collapse", cmd_ramsey_collapse, "collapse the LS-code coloring of a type to minus parts")
    sp.add_argument("tree")
    sp.add_argument("--tuple", required=True, help="a realization of the L0P type to use")

    fr_ = sub.add_parser("fraisse", help="amalgamation and generic stages").add_subparsers(dest="sub", required=True)
    sp = add(fr_, "stage", cmd_fraisse_stage, "build a generic stage")
    sp.add_argument("-k", type=int, required=True)
    sp.add_argument("--max-nodes", type=int, default=200)
    sp.add_argument("--rounds", type=int, default=2)
    sp.add_argument("--tree-out", help="also write the stage as a tree file")
    sp = add(fr_, "extend-check", cmd_fraisse_extend, "list unmet extension demands")
    sp.add_argument("tree")
    sp.add_argument("-k", type=int, required=True)

    ind = sub.add_parser("indisc", help="indiscernibility checks").add_subparsers(dest="sub", required=True)
    sp = add(ind, "check", cmd_indisc_check, "indexed indiscernibility")
    sp.add_argument("family")
    sp.add_argument("--tag", default="L0P", choices=[t.value for t in LanguageTag])
    sp.add_argument("--n-max", type=int, default=2)
    sp = add(ind, "collapse", cmd_indisc_collapse, "leaf sequence over the root")
    sp.add_argument("family")
    sp.add_argument("--n-max", type=int, default=4)
    sp.add_argument("--anchor", help="compare every tuple of this length against it")
    sp = add(ind, "cones", cmd_indisc_cones, "cone leaves over a_xi")
    sp.add_argument("family")
    sp.add_argument("--xi", required=True)
    sp.add_argument("--n-max", type=int, default=4)
    sp = add(ind, "sides", cmd_indisc_sides, "side sets J and J' of a node")
    sp.add_argument("family")
    sp.add_argument("--nu", required=True)
    sp.add_argument("--n-max", type=int, default=3)
    sp = add(ind, "extract", cmd_indisc_extract, "find an indiscernible copy of J")
    sp.add_argument("family")
    sp.add_argument("--J", required=True)
    sp.add_argument("--n-max", type=int, default=2)

    wit = sub.add_parser("witness", help="exact witnesses and certificates").add_subparsers(dest="sub", required=True)
    sp = add(wit, "oag", cmd_w_oag, "ordered abelian group family")
    sp.add_argument("--n", type=int, default=3)
    sp.add_argument("--m", type=int, default=2)
    sp.add_argument("--g", default="1")
    sp.add_argument("--family-out")
    for name, func, d in (("multigraph", cmd_w_multigraph, 3), ("2ip", cmd_w_2ip, 3)):
        sp = add(wit, name, func, f"{name} family on b^<=d")
        sp.add_argument("--b", type=int, default=2)
        sp.add_argument("--d", type=int, default=d)
        sp.add_argument("--family-out")
    for name, func, help_text in (
        ("sop2", cmd_w_sop2, "interval tree family"),
        ("sop3", cmd_w_sop3, "replay the SOP2 to SOP3 construction"),
    ):
        sp = add(wit, name, func, help_text)
        sp.add_argument("--tree", help="index tree file (default: balanced b^<=d)")
        sp.add_argument("--b", type=int, default=2)
        sp.add_argument("--d", type=int, default=3)
        if name == "sop3":
            sp.add_argument("-n", type=int, default=2)
            sp.add_argument("--boundary", action="store_true", help="also report the first SAT depth")
            sp.add_argument("--max-depth", type=int, default=6)
    sp = add(wit, "intervals-to-sop3", cmd_w_i2s, "SOP3 parameters from intervals")
    sp.add_argument("-n", type=int, default=3)
    sp.add_argument("--ks", help="comma separated rationals in (0, 1/3)")
    sp = add(wit, "sop3-to-intervals", cmd_w_s2i, "interval consistency from SOP3 parameters")
    sp.add_argument("--sample", help="JSON list of [lo, hi] pairs")
    return p


def _apply_expect(verdict: str, expect: str | None) -> int:
    code = EXIT[verdict]
    if expect is None or code == 3:
        return code
    positive = code == 0
    return 0 if positive == (expect == "ok") else 1


def _verify_only(path: str) -> tuple[str, dict]:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot load {path}: {exc}") from exc
    cert = data.get("certificate", data)
    problems = verify_certificate(cert)
    if problems:
        return "INVALID", {"problems": problems}
    claimed = data.get("verdict")
    return (claimed or "OK"), {"kind": cert.get("kind"), "checked": True}


def run(argv=None, stdout=None) -> int:
    stdout = stdout or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 2
    t0 = time.perf_counter()
    ctx = Context(args)
    try:
        if args.verify_only:
            verdict, payload = _verify_only(args.verify_only)
            if verdict == "INVALID":
                print(f"INVALID: {'; '.join(payload['problems'])}", file=stdout)
                return 2
            command = "verify-only"
        elif not getattr(args, "func", None):
            parser.print_usage(stdout)
            return 2
        else:
            verdict, payload = args.func(ctx, args)
            command = " ".join(argv if argv is not None else sys.argv[1:])
    except (UsageError, TreeError, ConstraintError, SwitcherooError, RamseyError, WitnessError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    report = {
        "command": command,
        "inputs": ctx.inputs,
        "verdict": verdict,
        "seed": args.seed,
        "jobs": args.jobs,
        "budget": args.budget,
        "timing_s": round(time.perf_counter() - t0, 6),
        **payload,
    }
    if args.out:
        Path(args.out).write_text(json.dumps(report, indent=1), encoding="utf-8")
    if args.json:
        print(json.dumps(report, indent=1), file=stdout)
    else:
        print(verdict, file=stdout)
    return _apply_expect(verdict, args.expect)


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
