"""Command-line surface: graph generation, schedule tables, the coloring
pipeline, verification, regular embedding, and batch experiments.

Exit codes: 0 success, 1 verification/run failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys

from . import __version__
from .baselines import CSV_COLUMNS, compare, repair_color, run_pipeline
from .coloring import EdgeColoring, find_bicolored_cycles, load_coloring, properness_violations, save_coloring
from .errors import AecolorError
from .graphs import GIRTH_UNBOUNDED, generate_high_girth_regular, generate_random_regular, girth, load_graph, save_graph
from .nibble import NibblePolicy
from .regularizer import embed_regular
from .rng import TAG_EXPERIMENT, derive
from .schedule import compute_schedule


def _cmd_gen(args) -> int:
    if args.girth_min is not None:
        g = generate_high_girth_regular(args.n, args.d, args.girth_min, args.seed,
                                        args.max_steps)
    else:
        g = generate_random_regular(args.n, args.d, args.seed)
    save_graph(g, args.out)
    gg = girth(g)
    print(f"wrote {args.out}: n={g.n} m={g.m} girth={'inf' if gg == GIRTH_UNBOUNDED else gg}")
    return 0


def _cmd_schedule(args) -> int:
    params = compute_schedule(args.eps, args.delta, args.girth,
                              max_iterations=args.iterations)
    out = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        w = csv.writer(out)
        w.writerow(["# eps", params.eps])
        w.writerow(["# delta", params.delta])
        w.writerow(["# girth", params.girth])
        w.writerow(["# k", params.k])
        w.writerow(["# i_star", params.i_star])
        w.writerow(["# capped", int(params.capped)])
        w.writerow(["i", "L_i", "T_i", "R_i", "Lp_i", "Tp_i", "Rp_i", "Psi_i", "Lambda_i"])
        for i in range(1, params.i_star + 2):
            w.writerow([i, repr(float(params.L[i])), repr(float(params.T[i])),
                        repr(float(params.R[i])), repr(float(params.L_primed[i])),
                        repr(float(params.T_primed[i])), repr(float(params.R_primed[i])),
                        repr(float(params.psi[i])), repr(float(params.lam[i]))])
    finally:
        if args.out:
            out.close()
    return 0


def _cmd_color(args) -> int:
    g = load_graph(args.graph)
    if args.algo == "repair":
        budget = args.colors if args.colors else 4 * g.max_degree - 4
        res = repair_color(g, budget, args.seed)
        report = {"algo": "repair", "success": res.success, "steps": res.steps,
                  "colors_budget": budget}
        if res.success:
            save_coloring(res.coloring, args.out)
            report["colours_used"] = res.coloring.colors_used()
            report["out"] = args.out
        print(json.dumps(report, sort_keys=True))
        return 0 if res.success else 1
    policy = NibblePolicy(max_restarts=args.restarts)
    if args.lmax is not None:
        policy.lmax = args.lmax
    chi, stage, detail, rounds = run_pipeline(g, args.eps, args.seed, policy)
    report = {"algo": "nibble", "success": chi is not None, "stage": stage,
              "detail": detail, "iterations": rounds, "eps": args.eps}
    if chi is not None:
        save_coloring(chi, args.out)
        report["colours_used"] = chi.colors_used()
        report["out"] = args.out
    if args.trace and chi is None:
        pass
    print(json.dumps(report, sort_keys=True))
    return 0 if chi is not None else 1


def _cmd_verify(args) -> int:
    g = load_graph(args.graph)
    chi = load_coloring(args.coloring, g.m)
    bad = properness_violations(g, chi)
    if bad:
        print(f"IMPROPER: {len(bad)} adjacent equal-color pairs; first: {bad[:5]}")
        return 1
    cycles = find_bicolored_cycles(g, chi)
    if cycles:
        for cyc in cycles[:10]:
            print(f"BICOLORED: vertices {list(cyc.vertices)} colors {cyc.pair}")
        print(f"total bicolored cycles: {len(cycles)}")
        return 1
    print(f"OK: proper and acyclic on {chi.n_colored}/{g.m} colored edges, "
          f"{chi.colors_used()} colors used")
    return 0


def _cmd_embed(args) -> int:
    g = load_graph(args.graph)
    res = embed_regular(g, args.girth_target, args.seed, args.budget)
    save_graph(res.graph, args.out)
    sidecar = args.out + ".copy0.json"
    with open(sidecar, "w", encoding="ascii") as f:
        json.dump({str(k): v for k, v in res.copy0.items()}, f)
    gg = girth(res.graph)
    print(f"wrote {args.out}: n={res.graph.n} m={res.graph.m} "
          f"girth={'inf' if gg == GIRTH_UNBOUNDED else gg}; copy-0 map in {sidecar}")
    return 0


def _cmd_experiment(args) -> int:
    g = load_graph(args.graph)
    seeds = [derive(args.seed, TAG_EXPERIMENT, i) % (1 << 32) for i in range(args.runs)]
    rows = compare(g, args.eps, seeds)
    out = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        w = csv.DictWriter(out, fieldnames=CSV_COLUMNS)
        w.writeheader()
        for row in rows:
            w.writerow(row)
    finally:
        if args.out:
            out.close()
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="aecolor",
                                 description="acyclic edge coloring via iterative semi-random nibble")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("gen", help="generate a (high-girth) random regular graph")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--girth-min", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-steps", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_gen)

    p = sub.add_parser("schedule", help="emit the parameter table as CSV")
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--delta", type=int, required=True)
    p.add_argument("--girth", type=int, required=True)
    p.add_argument("--iterations", type=int, default=None,
                   help="cap i* (required below the reachability scale)")
    p.add_argument("--out", default=None)
    p.set_defaults(fn=_cmd_schedule)

    p = sub.add_parser("color", help="run a coloring algorithm on a graph file")
    p.add_argument("--graph", required=True)
    p.add_argument("--algo", choices=["nibble", "repair"], default="nibble")
    p.add_argument("--eps", type=float, default=0.5)
    p.add_argument("--colors", type=int, default=None, help="repair palette budget")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--lmax", type=int, default=None)
    p.add_argument("--restarts", type=int, default=20)
    p.add_argument("--trace", default=None)
    p.add_argument("--out", default="coloring.json")
    p.set_defaults(fn=_cmd_color)

    p = sub.add_parser("verify", help="verify a coloring file against a graph file")
    p.add_argument("--graph", required=True)
    p.add_argument("--coloring", required=True)
    p.set_defaults(fn=_cmd_verify)

    p = sub.add_parser("embed", help="embed into a regular graph of the same girth")
    p.add_argument("--graph", required=True)
    p.add_argument("--girth-target", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--budget", type=int, default=10**6)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_embed)

    p = sub.add_parser("experiment", help="seed-sweep comparison CSV")
    p.add_argument("--graph", required=True)
    p.add_argument("--eps", type=float, default=0.5)
    p.add_argument("--runs", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)
    p.set_defaults(fn=_cmd_experiment)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code else 0
    try:
        return args.fn(args)
    except AecolorError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
