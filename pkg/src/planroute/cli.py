"""Command-line front end: generate graphs, build schemes, route, evaluate,
and run the verification suites.

All randomness flows from --seed; every output artifact embeds the tool
version, the full config, and that seed. Exit codes: 0 all good, 1 a
property or routing assertion failed, 2 usage error (argparse default).
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__, checks, rng
from .decompose import CenterSet, packing_bound
from .graph import (EmbeddedGraph, generate_grid, generate_triangulated_grid,
                    read_graph, write_graph)
from .scheme import (build_scheme, deserialize_scheme, measure_sizes,
                     serialize_scheme, sidecar_json)
from .simulate import evaluate, route, traces_to_csv


def _config_dict(args) -> dict:
    skip = {"func"}
    return {k: (str(v) if isinstance(v, Fraction) else v)
            for k, v in vars(args).items() if k not in skip and not k.startswith("_")}


def _load_or_generate(args) -> EmbeddedGraph:
    if args.graph:
        return read_graph(args.graph)
    if args.grid:
        r, c = _parse_rc(args.grid)
        return generate_grid(r, c, args.weights, args.seed)
    if args.tri_grid:
        r, c = _parse_rc(args.tri_grid)
        return generate_triangulated_grid(r, c, args.weights, args.seed)
    raise SystemExit("one of --graph/--grid/--tri-grid is required")


def _parse_rc(spec: str):
    try:
        r, c = spec.lower().split("x")
        return int(r), int(c)
    except ValueError:
        raise SystemExit(f"bad RxC spec {spec!r}")


def _parse_sssp(spec: str):
    if spec == "exact":
        return "exact", Fraction(0)
    if spec.startswith("noise:"):
        return "stretch-noise", Fraction(spec.split(":", 1)[1])
    raise SystemExit(f"--sssp must be 'exact' or 'noise:EPS', got {spec!r}")


def _emit(path, payload: dict):
    payload = dict(payload)
    payload["tool"] = {"name": "planroute", "version": __version__}
    text = json.dumps(payload, indent=2, sort_keys=True, default=str)
    if path:
        Path(path).write_text(text + "\n")
    else:
        print(text)


def cmd_generate(args) -> int:
    graph = _load_or_generate(args)
    out = args.out or "graph.txt"
    write_graph(graph, out)
    print(f"wrote {out}: n={graph.n} m={graph.m} denom={graph.denom}")
    return 0


def cmd_build(args) -> int:
    graph = _load_or_generate(args)
    mode, noise_eps = _parse_sssp(args.sssp)
    scheme = build_scheme(graph, Fraction(args.eps), L=args.reps,
                          seed=args.seed, mode=mode)
    blob = serialize_scheme(scheme)
    out = args.out or "scheme.prts"
    Path(out).write_bytes(blob)
    Path(out + ".json").write_text(sidecar_json(scheme, _config_dict(args)) + "\n")
    diag = dict(scheme.diagnostics)
    diag.pop("separators", None)
    diag["sizes"] = measure_sizes(scheme)
    diag["config"] = _config_dict(args)
    _emit(args.diag_out, diag)
    print(f"wrote {out} ({len(blob)} bytes), {len(scheme.records)} trees")
    return 0


def cmd_route(args) -> int:
    graph = _load_or_generate(args)
    scheme = deserialize_scheme(Path(args.scheme).read_bytes())
    traces = []
    failures = 0
    for pair in args.pairs.split(","):
        s, t = (int(x) for x in pair.split(":"))
        tr = route(scheme, graph, s, t)
        traces.append(tr.to_dict())
        if tr.failure:
            failures += 1
    _emit(args.out, {"traces": traces, "config": _config_dict(args)})
    return 1 if failures else 0


def cmd_eval(args) -> int:
    graph = _load_or_generate(args)
    scheme = deserialize_scheme(Path(args.scheme).read_bytes())
    sink = [] if args.csv else None
    report = evaluate(scheme, graph, count=args.count, seed=args.seed,
                      sampler=args.sampler, trace_sink=sink)
    if args.csv:
        traces_to_csv(sink, args.csv)
    _emit(args.out, {"report": json.loads(report.to_json()),
                     "config": _config_dict(args)})
    return 0


def _suite(graph: EmbeddedGraph, args) -> list:
    mode, noise_eps = _parse_sssp(args.sssp)
    seed = args.seed
    results = []
    name = args.suite
    if name in ("all", "sampler"):
        results += checks.check_sampler([1.0, 2 + 2 * math.log(8), 10.0], seed=seed)
    if name in ("all", "diameter"):
        centers = CenterSet.all_of(np.ones(graph.n, dtype=bool))
        results += checks.check_diameter(
            graph, centers, Fraction(4), noise_eps,
            [rng.derive(seed, "diam", k) for k in range(10)],
            label=f"n={graph.n}", mode=mode)
    if name in ("all", "padding"):
        side = int(math.isqrt(graph.n))
        centers = _net_centers(graph, side, 8)
        tau = packing_bound(graph, np.ones(graph.n, dtype=bool), centers, Fraction(8))
        centers = CenterSet(centers.vertices, tau)
        results.append(checks.check_padding(
            graph, centers, Fraction(8), Fraction(1, 32), trials=args.trials,
            seed=seed, eps=noise_eps, label=f"n={graph.n}", mode=mode))
    if name in ("all", "coverage"):
        results.append(checks.check_coverage(
            graph, Fraction(8), Fraction(1, 2),
            L=max(1, math.ceil(2 * math.log2(graph.n))), seed=seed,
            label=f"n={graph.n}", mode=mode))
    if not results:
        raise SystemExit(f"unknown suite {args.suite!r}")
    return results


def _net_centers(graph: EmbeddedGraph, side: int, spacing: int) -> CenterSet:
    """Grid net centers at (spacing/2 + k*spacing) in both axes."""
    half = spacing // 2
    vs = [r * side + c
          for r in range(half, side, spacing) for c in range(half, side, spacing)]
    return CenterSet(np.array(vs, dtype=np.int32), len(vs))


def cmd_verify(args) -> int:
    if args.graph or args.grid or args.tri_grid:
        graph = _load_or_generate(args)
    else:
        side = int(math.isqrt(args.n))
        graph = generate_grid(side, side, "unit", args.seed)
    results = _suite(graph, args)
    out_lines = [r.to_json_line() for r in results]
    if args.out:
        Path(args.out).write_text("\n".join(out_lines) + "\n")
    else:
        for line in out_lines:
            print(line)
    print(checks.summary_table(results), file=sys.stderr)
    failed = [r for r in results if not r.passed]
    if failed:
        print(f"{len(failed)} properties FAILED", file=sys.stderr)
        return 1
    return 0


def _add_graph_opts(p):
    p.add_argument("--graph", help="read graph from file")
    p.add_argument("--grid", metavar="RxC", help="generate an RxC grid")
    p.add_argument("--tri-grid", metavar="RxC", help="generate a triangulated RxC grid")
    p.add_argument("--weights", default="unit", help="unit | uniform:a:b")
    p.add_argument("--seed", type=int, default=0)


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="planroute", description=__doc__)
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="cmd", required=True)

    g = sub.add_parser("generate", help="write a graph file")
    _add_graph_opts(g)
    g.add_argument("--out")
    g.set_defaults(func=cmd_generate)

    b = sub.add_parser("build", help="build and serialize a routing scheme")
    _add_graph_opts(b)
    b.add_argument("--eps", default="1/2", type=Fraction)
    b.add_argument("--reps", type=int, default=None, help="covers per level L")
    b.add_argument("--sssp", default="exact", help="exact | noise:EPS")
    b.add_argument("--out")
    b.add_argument("--diag-out")
    b.set_defaults(func=cmd_build)

    r = sub.add_parser("route", help="route explicit pairs through a built scheme")
    _add_graph_opts(r)
    r.add_argument("--scheme", required=True)
    r.add_argument("--pairs", required=True, help="comma list of s:t")
    r.add_argument("--out")
    r.set_defaults(func=cmd_route)

    e = sub.add_parser("eval", help="sample pairs and measure stretch")
    _add_graph_opts(e)
    e.add_argument("--scheme", required=True)
    e.add_argument("--count", type=int, default=1000)
    e.add_argument("--sampler", default="uniform", choices=["uniform", "stratified"])
    e.add_argument("--csv", help="per-pair CSV output")
    e.add_argument("--out")
    e.set_defaults(func=cmd_eval)

    v = sub.add_parser("verify", help="run property suites")
    _add_graph_opts(v)
    v.add_argument("--sssp", default="exact", help="exact | noise:EPS")
    v.add_argument("--suite", default="all",
                   choices=["all", "sampler", "diameter", "padding", "coverage"])
    v.add_argument("--n", type=int, default=256, help="default grid size if no graph given")
    v.add_argument("--trials", type=int, default=100)
    v.add_argument("--out")
    v.set_defaults(func=cmd_verify)

    for p in (b, e, v):
        p.add_argument("--jobs", type=int, default=os.cpu_count(),
                       help="parallelism degree (advisory)")

    args = ap.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
