"""Command line interface.

Graph arguments are a path to a graph text file, ``-`` for stdin, or a
named family: ``K:n`` (complete), ``C:n`` (cycle), ``graham:part``.
"""
from __future__ import annotations

import argparse
import json
import random
import sys

from . import gadgets, girth, pipeline
from .boosting import restricted_boost
from .errors import BudgetExhausted, GirthforgeError, Infeasible, InputError, ProvenInfeasible, SearchFailure
from .fractional import solve_fractional, verify_fractional
from .graph import Config, complete_graph, cycle_graph, graham_blowup, parse_graph, read_graph
from .matcher import exact_decomposition

EXIT_OK, EXIT_INFEASIBLE, EXIT_BUDGET, EXIT_INPUT = 0, 2, 3, 4


def load_graph(arg: str):
    if arg == "-":
        return parse_graph(sys.stdin.read())
    kind, sep, val = arg.partition(":")
    if sep and kind in ("K", "C", "graham"):
        try:
            k = int(val)
        except ValueError:
            raise InputError(f"bad graph name {arg!r}") from None
        return {"K": complete_graph, "C": cycle_graph, "graham": graham_blowup}[kind](k)
    try:
        return read_graph(arg)
    except OSError as exc:
        raise InputError(f"cannot read {arg}: {exc}") from None


def load_json(path: str):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read {path}: {exc}") from None


def _budget(args, default_s):
    return args.budget_ms / 1000 if args.budget_ms is not None else default_s


def _text(obj, indent=0) -> str:
    pad = "  " * indent
    if isinstance(obj, dict):
        lines = []
        for k, v in obj.items():
            if isinstance(v, (dict, list)) and v and not _flat(v):
                lines.append(f"{pad}{k}:")
                lines.append(_text(v, indent + 1))
            else:
                lines.append(f"{pad}{k}: {_scalar(v)}")
        return "\n".join(lines)
    if isinstance(obj, list):
        return "\n".join(_text(v, indent) if isinstance(v, dict) else pad + _scalar(v) for v in obj)
    return pad + _scalar(obj)


def _flat(v):
    return isinstance(v, list) and all(not isinstance(x, (dict, list)) or _flat(x) for x in v) and len(v) <= 12


def _scalar(v):
    if isinstance(v, list):
        return " ".join(_scalar(x) if not isinstance(x, list) else "(" + ",".join(map(str, x)) + ")" for x in v)
    return str(v)


def emit(args, payload: dict):
    if args.format == "json":
        print(json.dumps(payload, indent=2, default=str))
    else:
        print(_text(payload))


# subcommands

def cmd_gadget(args):
    fresh = gadgets.IdAllocator(10)
    if args.kind == "sphere":
        h = args.size or args.girth or 2
        roots = tuple(range(args.q))
        if args.q != 3:
            raise InputError("spheres are defined for q = 3")
        B = gadgets.g_sphere(roots, h, fresh)
        return {"booster": B.to_json(), "valid": gadgets.verify_booster(B),
                "rooted_girth": girth.girth_to_json(gadgets.rooted_girth(B)),
                "rooted_degeneracy": gadgets.rooted_degeneracy(B.gadget),
                "edges": B.gadget.edge_count}
    if args.kind in ("fake-edge", "anti-edge"):
        S = (0, 1)
        W = (gadgets.fake_edge if args.kind == "fake-edge" else gadgets.anti_edge)(S, args.q, fresh)
        return {"gadget": W.to_json(), "residues": gadgets.divisibility_residues(W, args.q),
                "behaves_like_edge": gadgets.behaves_like_edge(W, args.q),
                "rooted_degeneracy": gadgets.rooted_degeneracy(W)}
    L = load_graph(args.graph) if args.graph else cycle_graph(6)
    A = gadgets.find_absorber(L, args.q, gadgets.IdAllocator(L.n), rng=random.Random(args.seed),
                              time_budget=_budget(args, 60))
    return {"absorber": A.to_json(), "valid": gadgets.check_absorber(A)}


def cmd_girth(args):
    P = girth.Packing.from_json(load_json(args.packing))
    limit = args.limit or max(2, len(P))
    res = girth.packing_girth(P, limit, with_witness=True)
    gv, wit = res if isinstance(res, tuple) else (res, None)
    out = {"blocks": len(P), "girth": girth.girth_to_json(gv)}
    if wit is not None:
        out["witness"] = [list(b) for b in wit.cliques]
    return out


def cmd_fractional(args):
    G = load_graph(args.graph)
    try:
        w = solve_fractional(G, args.q, objective=args.objective)
    except Infeasible as exc:
        cert = {f"{u}-{v}": str(y) for (u, v), y in sorted(exc.certificate.items())}
        raise ProvenInfeasible("no fractional decomposition", {"certificate": cert}) from None
    rep = verify_fractional(G, w)
    return {"weighting": w.to_json(), "balance": {"min": str(rep.min_scaled), "max": str(rep.max_scaled),
                                                 "worst_defect": str(rep.worst_edge_defect)}}


def cmd_boost(args):
    G = load_graph(args.graph)
    F_orb = [tuple(b) for b in load_json(args.forbidden)["blocks"]] if args.forbidden else ()
    fam = restricted_boost(G, args.q, F_orb, rng=random.Random(args.seed))
    return fam.to_json()


def cmd_absorb(args):
    G = load_graph(args.graph)
    X = load_graph(args.x)
    rng = random.Random(args.seed)
    oa = pipeline.build_private_omniabsorber(G, X, args.q, rng)
    out = {"omniabsorber": oa.to_json(), "summary": oa.summary()}
    if args.girth:
        boosted = pipeline.boost_omniabsorber(oa, G, args.girth, rng)
        out["boosted"] = boosted.summary()
        out["collective_girth"] = pipeline.collective_girth(boosted, args.girth)
    return out


def cmd_pack(args):
    G = load_graph(args.graph)
    g = args.girth or 2
    P = exact_decomposition(G, args.q, g, time_budget=_budget(args, 60), rng=random.Random(args.seed))
    return {**P.to_json(), "girth": girth.girth_to_json(girth.packing_girth(P, g + 1))}


def cmd_pipeline(args):
    G = load_graph(args.graph)
    g = args.girth or 4
    cfg = Config(q=args.q, g=g, rng_seed=args.seed, p=args.p, budget_s=_budget(args, 240))
    try:
        res = pipeline.run_pipeline(G, g, cfg, random.Random(args.seed))
    except pipeline.PipelineError as exc:
        args._report = exc.report
        raise exc.cause from None
    return {"route": res.route, "packing": res.packing.to_json(), "report": res.report}


def cmd_verify(args):
    G = load_graph(args.graph)
    P = girth.Packing.from_json(load_json(args.packing))
    ok = girth.is_decomposition(G, P)
    out = {"decomposition": ok}
    if not ok:
        out["uncovered"] = [list(e) for e in girth.uncovered_edges(G, P)][:20]
    if args.girth:
        gv = girth.packing_girth(P, args.girth)
        out["girth"] = girth.girth_to_json(gv)
        out["girth_ok"] = girth.girth_at_least(gv, args.girth)
        ok = ok and out["girth_ok"]
    if not ok:
        args._status = EXIT_INFEASIBLE
    return out


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    common.add_argument("--q", type=int, default=argparse.SUPPRESS)
    common.add_argument("--girth", type=int, default=argparse.SUPPRESS)
    common.add_argument("--format", choices=("json", "text"), default=argparse.SUPPRESS)
    common.add_argument("--budget-ms", type=int, default=argparse.SUPPRESS, dest="budget_ms")

    top = argparse.ArgumentParser(prog="girthforge", description="High-girth clique decompositions.")
    top.add_argument("--seed", type=int, default=0)
    top.add_argument("--q", type=int, default=3)
    top.add_argument("--girth", type=int, default=None)
    top.add_argument("--format", choices=("json", "text"), default="json")
    top.add_argument("--budget-ms", type=int, default=None, dest="budget_ms")
    sub = top.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gadget", parents=[common], help="build and check a gadget")
    p.add_argument("kind", choices=("sphere", "fake-edge", "anti-edge", "absorber"))
    p.add_argument("--size", type=int, default=None, help="sphere size")
    p.add_argument("--graph", default=None, help="L for the absorber")
    p.set_defaults(func=cmd_gadget)

    p = sub.add_parser("girth", parents=[common], help="girth of a packing")
    p.add_argument("packing")
    p.add_argument("--limit", type=int, default=None)
    p.set_defaults(func=cmd_girth)

    p = sub.add_parser("fractional", parents=[common], help="fractional decomposition or certificate")
    p.add_argument("graph")
    p.add_argument("--objective", choices=("feasible", "max_min"), default="feasible")
    p.set_defaults(func=cmd_fractional)

    p = sub.add_parser("boost", parents=[common], help="near-regular clique family")
    p.add_argument("graph")
    p.add_argument("--forbidden", default=None, help="packing JSON of forbidden cliques")
    p.set_defaults(func=cmd_boost)

    p = sub.add_parser("absorb", parents=[common], help="omni-absorber for X inside G")
    p.add_argument("graph")
    p.add_argument("x")
    p.set_defaults(func=cmd_absorb)

    p = sub.add_parser("pack", parents=[common], help="exact decomposition with girth pruning")
    p.add_argument("graph")
    p.set_defaults(func=cmd_pack)

    p = sub.add_parser("pipeline", parents=[common], help="end-to-end decomposition")
    p.add_argument("graph")
    p.add_argument("--p", type=float, default=0.0, help="reserve probability")
    p.set_defaults(func=cmd_pipeline)

    p = sub.add_parser("verify", parents=[common], help="check a packing against a graph")
    p.add_argument("graph")
    p.add_argument("packing")
    p.set_defaults(func=cmd_verify)
    return top


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    args._status = EXIT_OK
    args._report = None
    try:
        payload = args.func(args)
    except InputError as exc:
        return _fail(args, EXIT_INPUT, exc)
    except ProvenInfeasible as exc:
        return _fail(args, EXIT_INFEASIBLE, exc)
    except Infeasible as exc:
        return _fail(args, EXIT_INFEASIBLE, exc)
    except (BudgetExhausted, SearchFailure) as exc:
        return _fail(args, EXIT_BUDGET, exc)
    except GirthforgeError as exc:
        return _fail(args, EXIT_BUDGET, exc)
    emit(args, payload)
    return args._status


def _fail(args, code, exc) -> int:
    payload = {"error": type(exc).__name__, "message": str(exc), "exit_code": code}
    stats = getattr(exc, "stats", None)
    if stats:
        payload["details"] = stats
    if args._report is not None:
        payload["report"] = args._report
    emit(args, payload)
    return code
