"""Command-line entry point.

Every verb reads declared file formats, runs one module operation, and
prints a canonical JSON report: {"schema": "disto/1", "verdict": ...,
"details": ...}.  Exit codes: 0 on success, 1 on input errors, and 2 for
"rejected"/"empty"-class verdicts when --strict is set.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import alternating as alt
from . import asyncrun, automata, decision, formulas, graphs
from . import mucompile, reductions, tiling

SCHEMA = "disto/1"

_REJECTING_VERDICTS = {"rejected", "empty", "empty-up-to-cap",
                       "counterexample", "none-up-to-bound", "not-a-grid",
                       "violation"}


class InputError(Exception):
    pass


def report_format(verdict: str, details: dict | None = None) -> str:
    """Canonical report text: fixed key order, deterministic serialization."""
    payload = {"schema": SCHEMA, "verdict": verdict,
               "details": details or {}}
    return json.dumps(payload, indent=2, sort_keys=False)


def _load_json(path: str) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise InputError(f"{path}: file not found")
    except json.JSONDecodeError as e:
        raise InputError(f"{path}:{e.lineno}:{e.colno}: {e.msg}")


def _load_graph(path: str):
    return graphs.from_json_dict(_load_json(path))


def _load_pointed(path: str) -> graphs.PointedDigraph:
    g = _load_graph(path)
    if not isinstance(g, graphs.PointedDigraph):
        raise InputError(f"{path}: digraph has no point")
    return g


def _load_digraph(path: str) -> graphs.Digraph:
    g = _load_graph(path)
    return g.digraph if isinstance(g, graphs.PointedDigraph) else g


def _load_automaton(path: str) -> automata.DistributedAutomaton:
    return automata.from_json_dict(_load_json(path))


def _load_forgetful(path: str) -> automata.ForgetfulAutomaton:
    return automata.forgetful_from_json_dict(_load_json(path))


def _load_text(path: str) -> str:
    try:
        with open(path) as fh:
            return fh.read()
    except FileNotFoundError:
        raise InputError(f"{path}: file not found")


def _write_out(args, obj: dict) -> None:
    if getattr(args, "out", None):
        with open(args.out, "w") as fh:
            json.dump(obj, fh, indent=2)
            fh.write("\n")


def _graph_detail(g) -> dict:
    return graphs.to_json_dict(g)


# ---------------------------------------------------------------------------
# Verb handlers: each returns (verdict, details)

def cmd_run(args):
    a = _load_automaton(args.automaton)
    d = _load_digraph(args.graph)
    horizon = "auto" if args.horizon == "auto" else int(args.horizon)
    run = automata.sync_run(a, d, horizon=horizon)
    return "ran", {
        "prefix": run.prefix,
        "period": run.period,
        "configurations": [list(c) for c in run.configs],
    }


def cmd_accept(args):
    a = _load_automaton(args.automaton)
    pd = _load_pointed(args.graph)
    ok = automata.decide_acceptance_sync(a, pd)
    return ("accepted" if ok else "rejected"), {"point": pd.point}


def cmd_accept_timed(args):
    a = _load_automaton(args.automaton)
    pd = _load_pointed(args.graph)
    timing = asyncrun.timing_from_json_dict(_load_json(args.timing),
                                            pd.digraph)
    ok = asyncrun.decide_acceptance_timed(a, pd, timing)
    return ("accepted" if ok else "rejected"), {"point": pd.point}


def cmd_falsify_async(args):
    a = _load_automaton(args.automaton)
    d = _load_digraph(args.graph)
    found = asyncrun.falsify_consistency(
        a, d, samples=args.samples, prefix_len=args.prefix,
        lossless=args.lossless, seed=args.seed)
    if found is None:
        return "consistent-so-far", {"samples": args.samples,
                                     "prefix": args.prefix}
    details = {
        "node": found.node,
        "timing_a": asyncrun.timing_to_json_dict(found.timing_a),
        "timing_b": asyncrun.timing_to_json_dict(found.timing_b),
    }
    return "counterexample", details


def cmd_compile_mu(args):
    system = formulas.parse_mu(_load_text(args.formula), bits=args.bits)
    a = mucompile.compile_mu_to_aqda(system)
    details = {"states": len(a.states), "accepting": len(a.accepting),
               "relations": a.rels}
    if args.accept:
        pd = _load_pointed(args.accept)
        ok = automata.decide_acceptance_sync(a, pd)
        return ("accepted" if ok else "rejected"), details
    return "compiled", details


def cmd_decompile_qda(args):
    a = _load_automaton(args.automaton)
    system = mucompile.decompile_qda_to_mu(a)
    text = formulas.print_mu(system)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    return "decompiled", {"variables": len(system.variables),
                          "formula": text}


def cmd_compile_mso(args):
    f = formulas.parse_formula(_load_text(args.formula))
    a = alt.compile_mso_to_aldag(f, bits=args.bits, rels=args.relations)
    details = {"states": len(a.states), "length": alt.length(a)}
    if args.accept:
        d = _load_digraph(args.accept)
        ok = alt.decide_acceptance_alt(a, d)
        return ("accepted" if ok else "rejected"), details
    return "compiled", details


def cmd_alt_accept(args):
    a = alt.from_json_dict(_load_json(args.automaton))
    d = _load_digraph(args.graph)
    ok = alt.decide_acceptance_alt(a, d)
    return ("accepted" if ok else "rejected"), {}


def cmd_alt_closure(args):
    a = alt.from_json_dict(_load_json(args.automaton))
    b = alt.from_json_dict(_load_json(args.second)) if args.second else None
    mapping = None
    if args.mapping:
        mapping = _load_json(args.mapping)
    out = alt.apply_closure(args.kind, a, b, mapping)
    details = {"states": len(out.states), "kind": args.kind}
    if args.accept:
        d = _load_digraph(args.accept)
        ok = alt.decide_acceptance_alt(out, d)
        return ("accepted" if ok else "rejected"), details
    return "closed", details


def cmd_empty_forgetful(args):
    a = _load_forgetful(args.automaton)
    verdict = decision.forgetful_emptiness(a)
    if verdict.empty:
        return "empty", {}
    details = {"time": verdict.time, "state": verdict.state}
    witness = decision.forgetful_witness(a, verdict.time, verdict.state)
    details["witness"] = _graph_detail(witness)
    _write_out(args, _graph_detail(witness))
    return "nonempty", details


def cmd_empty_nldag(args):
    a = alt.from_json_dict(_load_json(args.automaton))
    result = alt.nldag_emptiness(a, mode=args.mode, cap=args.max_nodes)
    if not result.empty:
        details = {"witness": _graph_detail(result.witness)}
        _write_out(args, _graph_detail(result.witness))
        return "nonempty", details
    verdict = "empty" if result.exact else "empty-up-to-cap"
    return verdict, {"searched_up_to": result.searched_up_to,
                     "pigeonhole_bound": result.pigeonhole_bound}


def cmd_search_witness(args):
    a = _load_automaton(args.automaton)
    found = decision.bounded_ditree_search(a, args.max_nodes)
    if found is None:
        return "none-up-to-bound", {"max_nodes": args.max_nodes}
    _write_out(args, _graph_detail(found))
    return "witness", {"witness": _graph_detail(found)}


def cmd_dfa2fda(args):
    dfa = reductions.dfa_from_json_dict(_load_json(args.dfa))
    fda = reductions.dfa_to_fda(dfa)
    return "converted", {"states": len(fda.states),
                         "letters": list(fda.letters())}


def cmd_fda2dfa(args):
    fda = _load_forgetful(args.automaton)
    dfa = reductions.fda_to_dfa(fda)
    obj = reductions.dfa_json_dict(dfa)
    _write_out(args, obj)
    return "converted", {"states": len(dfa.states)}


def cmd_ta2fda(args):
    ta = reductions.ta_from_json_dict(_load_json(args.ta))
    fda = reductions.treeautomaton_to_fda(ta)
    return "converted", {"states": len(fda.states), "arity": fda.rels}


def cmd_tm2da(args):
    m = reductions.tm_from_json_dict(_load_json(args.tm))
    a = reductions.tm_to_da(m)
    details = {"states": len(a.states)}
    if args.accept:
        pd = _load_pointed(args.accept)
        ok = automata.decide_acceptance_sync(a, pd)
        return ("accepted" if ok else "rejected"), details
    return "converted", details


def cmd_ts_recognize(args):
    ts = tiling.ts_from_json_dict(_load_json(args.system))
    g = _load_digraph(args.graph)
    run = tiling.ts_recognize(ts, g)
    if run is None:
        return "rejected", {}
    return "accepted", {"run": [list(row) for row in run.cells]}


def cmd_grid_check(args):
    d = _load_digraph(args.graph)
    failed = tiling.grid_validate(d)
    if failed is None:
        h, w = tiling.grid_dimensions(d)
        return "is-grid", {"height": h, "width": w}
    return "not-a-grid", {"failed_condition": failed,
                          "name": tiling.grid_condition_name(failed)}


def cmd_gen(args):
    if args.kind == "dipath":
        g = graphs.dipath(args.n, bits=args.bits)
    elif args.kind == "grid":
        g = graphs.grid(args.height, args.width, bits=args.bits)
    else:
        raise InputError(f"gen does not support kind {args.kind!r}")
    obj = graphs.to_json_dict(g)
    _write_out(args, obj)
    return "generated", obj


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="disto")
    p.add_argument("--strict", action="store_true",
                   help="exit 2 on rejecting/empty verdicts")
    sub = p.add_subparsers(dest="verb", required=True)

    def add(name, fn, **arguments):
        sp = sub.add_parser(name)
        for arg, kw in arguments.items():
            sp.add_argument(arg.replace("_", "-") if arg.startswith("--")
                            else arg, **kw)
        sp.set_defaults(fn=fn)
        return sp

    sp = add("run", cmd_run, automaton={}, graph={})
    sp.add_argument("--horizon", default="auto")
    add("accept", cmd_accept, automaton={}, graph={})
    add("accept-timed", cmd_accept_timed, automaton={}, graph={}, timing={})
    sp = add("falsify-async", cmd_falsify_async, automaton={}, graph={})
    sp.add_argument("--samples", type=int, required=True)
    sp.add_argument("--prefix", type=int, default=20)
    sp.add_argument("--lossless", action="store_true")
    sp.add_argument("--seed", type=int, required=True)
    sp = add("compile-mu", cmd_compile_mu, formula={})
    sp.add_argument("--bits", type=int, default=None)
    sp.add_argument("--accept", default=None)
    sp = add("decompile-qda", cmd_decompile_qda, automaton={})
    sp.add_argument("--out", default=None)
    sp = add("compile-mso", cmd_compile_mso, formula={})
    sp.add_argument("--bits", type=int, default=0)
    sp.add_argument("--relations", type=int, default=1)
    sp.add_argument("--accept", default=None)
    add("alt-accept", cmd_alt_accept, automaton={}, graph={})
    sp = add("alt-closure", cmd_alt_closure, kind={}, automaton={})
    sp.add_argument("--second", default=None)
    sp.add_argument("--mapping", default=None)
    sp.add_argument("--accept", default=None)
    sp = add("empty-forgetful", cmd_empty_forgetful, automaton={})
    sp.add_argument("--out", default=None)
    sp = add("empty-nldag", cmd_empty_nldag, automaton={})
    sp.add_argument("--mode", default="capped",
                    choices=["capped", "pigeonhole"])
    sp.add_argument("--max-nodes", type=int, default=5)
    sp.add_argument("--out", default=None)
    sp = add("search-witness", cmd_search_witness, automaton={})
    sp.add_argument("--max-nodes", type=int, required=True)
    sp.add_argument("--out", default=None)
    add("dfa2fda", cmd_dfa2fda, dfa={})
    sp = add("fda2dfa", cmd_fda2dfa, automaton={})
    sp.add_argument("--out", default=None)
    add("ta2fda", cmd_ta2fda, ta={})
    sp = add("tm2da", cmd_tm2da, tm={})
    sp.add_argument("--accept", default=None)
    add("ts-recognize", cmd_ts_recognize, system={}, graph={})
    add("grid-check", cmd_grid_check, graph={})
    sp = add("gen", cmd_gen, kind={"choices": ["dipath", "grid"]})
    sp.add_argument("--n", type=int, default=1)
    sp.add_argument("--height", type=int, default=1)
    sp.add_argument("--width", type=int, default=1)
    sp.add_argument("--bits", type=int, default=0)
    sp.add_argument("--out", default=None)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        verdict, details = args.fn(args)
    except InputError as e:
        print(report_format("input-error", {"message": str(e)}))
        return 1
    except (graphs.OracleBoundError, formulas.ParseError,
            formulas.EvalError, formulas.KernelViolation,
            automata.InitializationError, automata.UnmatchedTransition,
            asyncrun.TimingError, alt.AltError, tiling.StructureError,
            mucompile.ClassError, decision.WitnessError,
            ValueError, KeyError) as e:
        print(report_format("input-error",
                            {"message": f"{type(e).__name__}: {e}"}))
        return 1
    print(report_format(verdict, details))
    if args.strict and verdict in _REJECTING_VERDICTS:
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
