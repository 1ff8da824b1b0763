"""Hop-by-hop packet forwarding and stretch measurement.

A packet carries only the target's label set and the tree id chosen at the
source; every hop consults the current node's table for that tree. Strict
mode re-selects the tree at every intermediate node instead, to compare the
two header conventions. Failures (no common tree, missing mid-route table)
abort the packet and are counted, never masked.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from . import rng
from .graph import EmbeddedGraph
from .scheme import NO_TREE
from .sssp import SourceSpec, exact_sssp
from .treeroute import DELIVERED, RoutingContractError


@dataclass
class PacketTrace:
    source: int
    target: int
    tree: int                       # chosen tree id, NO_TREE on selection failure
    path: list
    routed_num: Optional[int]       # length numerator, None on failure
    exact_num: int
    denom: int
    failure: Optional[str] = None
    hops: int = 0

    @property
    def routed(self) -> Optional[Fraction]:
        return None if self.routed_num is None else Fraction(self.routed_num, self.denom)

    @property
    def exact(self) -> Fraction:
        return Fraction(self.exact_num, self.denom)

    @property
    def stretch(self) -> float:
        if self.routed_num is None:
            return float("inf")
        if self.exact_num == 0:
            return 1.0
        return self.routed_num / self.exact_num

    def to_dict(self) -> dict:
        return {
            "source": self.source, "target": self.target, "tree": self.tree,
            "path": self.path, "routed": None if self.routed_num is None
            else str(self.routed), "exact": str(self.exact),
            "stretch": None if self.routed_num is None else self.stretch,
            "failure": self.failure, "hops": self.hops,
        }


def _edge_weight(graph: EmbeddedGraph, u: int, v: int) -> int:
    for k in range(int(graph.indptr[u]), int(graph.indptr[u + 1])):
        if int(graph.nbr[k]) == v:
            return int(graph.nbr_w[k])
    raise RoutingContractError(f"hop {u}->{v} is not a graph edge")


def route(scheme, graph: EmbeddedGraph, s: int, t: int,
          exact_num: Optional[int] = None, strict: bool = False) -> PacketTrace:
    """Forward one packet from s to t; returns the full trace."""
    if exact_num is None:
        forest = exact_sssp(graph, None, SourceSpec.single(s))
        exact_num = int(forest.dist[t])
    if s == t:
        return PacketTrace(s, t, NO_TREE, [s], 0, 0, graph.denom)
    tid, _ = scheme.select_tree(s, t)
    if tid == NO_TREE:
        return PacketTrace(s, t, NO_TREE, [s], None, exact_num, graph.denom,
                           failure="NO_TREE")
    path = [s]
    total = 0
    v = s
    budget = 4 * graph.n + 8
    cur_tid = tid
    while True:
        try:
            if strict:
                cur_tid, _ = scheme.select_tree(v, t)
                if cur_tid == NO_TREE:
                    return PacketTrace(s, t, tid, path, None, exact_num,
                                       graph.denom, failure="NO_TREE_MIDROUTE",
                                       hops=len(path) - 1)
            nxt = scheme.next_hop(v, cur_tid, t)
        except RoutingContractError as exc:
            return PacketTrace(s, t, tid, path, None, exact_num, graph.denom,
                               failure=f"MID_ROUTE:{exc}", hops=len(path) - 1)
        if nxt == DELIVERED:
            return PacketTrace(s, t, tid, path, total, exact_num, graph.denom,
                               hops=len(path) - 1)
        total += _edge_weight(graph, v, int(nxt))
        path.append(int(nxt))
        v = int(nxt)
        if v == t:
            return PacketTrace(s, t, tid, path, total, exact_num, graph.denom,
                               hops=len(path) - 1)
        if len(path) > budget:
            return PacketTrace(s, t, tid, path, None, exact_num, graph.denom,
                               failure="HOP_BUDGET", hops=len(path) - 1)


@dataclass
class StretchReport:
    pairs: int
    ok: int
    failures: int
    quantiles: dict                  # p50/p90/p99/max over successful routes
    level_histogram: dict            # chosen tree's distance-class exponent -> count
    exact_stretch_one: bool          # all stretches >= 1 held exactly
    config: dict = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps({
            "pairs": self.pairs, "ok": self.ok, "failures": self.failures,
            "quantiles": self.quantiles, "level_histogram": self.level_histogram,
            "exact_stretch_one": self.exact_stretch_one, "config": self.config,
        }, indent=2, sort_keys=True)


def sample_pairs(graph: EmbeddedGraph, count: int, seed: int,
                 sampler: str = "uniform") -> list:
    """Deterministic query pairs: uniform, or stratified by distance decade."""
    gen = rng.generator(seed, "pairs")
    if sampler == "uniform":
        s = gen.integers(0, graph.n, size=count)
        t = gen.integers(0, graph.n, size=count)
        return list(zip(s.tolist(), t.tolist()))
    if sampler == "stratified":
        forest = exact_sssp(graph, None, SourceSpec.single(0))
        dmax = max(1, int(forest.dist.max()))
        decades = max(1, dmax.bit_length())
        pairs = []
        tries = 0
        while len(pairs) < count and tries < 50 * count:
            tries += 1
            s = int(gen.integers(0, graph.n))
            t = int(gen.integers(0, graph.n))
            want = len(pairs) % decades
            f = exact_sssp(graph, None, SourceSpec.single(s))
            d = int(f.dist[t])
            if d > 0 and d.bit_length() - 1 == want:
                pairs.append((s, t))
            elif tries > 10 * count:     # decade may be empty; stop insisting
                pairs.append((s, t))
        return pairs
    raise ValueError(f"unknown sampler {sampler!r}")


def evaluate(scheme, graph: EmbeddedGraph, pairs=None, count: int = 1000,
             seed: int = 0, sampler: str = "uniform", strict: bool = False,
             trace_sink: Optional[list] = None) -> StretchReport:
    """Route many pairs against the exact-distance oracle and aggregate."""
    if pairs is None:
        pairs = sample_pairs(graph, count, seed, sampler)
    dist_cache: dict = {}
    level_of = {}
    if hasattr(scheme, "records"):
        level_of = {rec.tid: rec.level for rec in scheme.records}
    stretches = []
    failures = 0
    hist: dict = {}
    exact_one = True
    for s, t in pairs:
        if s not in dist_cache:
            dist_cache[s] = exact_sssp(graph, None, SourceSpec.single(s)).dist
        tr = route(scheme, graph, s, t, exact_num=int(dist_cache[s][t]), strict=strict)
        if trace_sink is not None:
            trace_sink.append(tr)
        if tr.failure is not None:
            failures += 1
            continue
        if tr.routed_num is not None and tr.routed_num < tr.exact_num:
            exact_one = False
        stretches.append(tr.stretch)
        lv = level_of.get(tr.tree, -1)
        hist[lv] = hist.get(lv, 0) + 1
    stretches.sort()

    def q(p):
        if not stretches:
            return None
        return stretches[min(len(stretches) - 1, int(p * len(stretches)))]

    return StretchReport(
        pairs=len(pairs), ok=len(stretches), failures=failures,
        quantiles={"p50": q(0.50), "p90": q(0.90), "p99": q(0.99),
                   "max": stretches[-1] if stretches else None},
        level_histogram=hist, exact_stretch_one=exact_one,
        config={"seed": seed, "sampler": sampler, "count": len(pairs),
                "strict": strict},
    )


def traces_to_csv(traces, path) -> None:
    with open(path, "w") as fh:
        fh.write("source,target,exact,routed,stretch,tree\n")
        for tr in traces:
            routed = "" if tr.routed_num is None else str(tr.routed)
            stretch = "" if tr.routed_num is None else f"{tr.stretch:.6f}"
            fh.write(f"{tr.source},{tr.target},{tr.exact},{routed},{stretch},{tr.tree}\n")
