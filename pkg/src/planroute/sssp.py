"""The (1+eps)-approximate SSSP primitive used by every other module.

Exact single/multi-source shortest-path forests plus an adversarial
"stretch-noise" wrapper that returns genuinely suboptimal, tree-consistent
forests whose distances still satisfy d_G <= dist <= (1+eps) d_G. Downstream
algorithms treat this as a black box and must tolerate any conforming oracle.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from . import kernels, rng
from .graph import EmbeddedGraph, full_mask


@dataclass(frozen=True)
class SourceSpec:
    """Single vertex, a vertex set, or a virtual super-source.

    The virtual form seeds each attached vertex x with the virtual-edge
    weight w(s,x); that reproduces SSSP from an added super-source without
    mutating the graph.
    """
    vertices: np.ndarray      # int32
    init_dist: np.ndarray     # int64 numerators (zeros unless virtual)
    virtual: bool = False

    @staticmethod
    def single(v: int) -> "SourceSpec":
        return SourceSpec(np.array([v], dtype=np.int32), np.zeros(1, dtype=np.int64))

    @staticmethod
    def vertex_set(vs: Sequence[int]) -> "SourceSpec":
        vs = np.asarray(sorted(int(v) for v in vs), dtype=np.int32)
        return SourceSpec(vs, np.zeros(len(vs), dtype=np.int64))

    @staticmethod
    def super_source(pairs: Sequence[tuple]) -> "SourceSpec":
        """pairs of (target vertex, virtual weight numerator), weights >= 0."""
        vs = np.array([p[0] for p in pairs], dtype=np.int32)
        ds = np.array([p[1] for p in pairs], dtype=np.int64)
        if len(ds) and ds.min() < 0:
            raise ValueError("virtual edge weights must be nonnegative")
        return SourceSpec(vs, ds, virtual=True)


@dataclass
class SsspForest:
    dist: np.ndarray      # int64 numerators, -1 unreached
    parent: np.ndarray    # int32, -1 for roots / unreached
    root: np.ndarray      # int32 source vertex whose tree contains v, -1 unreached
    denom: int            # numerator scale (graph denom times any extra factor)
    eps: Fraction = Fraction(0)
    source: Optional[SourceSpec] = None

    def reached(self) -> np.ndarray:
        return self.dist >= 0

    def dist_frac(self, v: int) -> Fraction:
        d = int(self.dist[v])
        if d < 0:
            raise ValueError(f"vertex {v} unreached")
        return Fraction(d, self.denom)

    def path_to_root(self, v: int) -> list:
        out = [v]
        while self.parent[out[-1]] >= 0:
            out.append(int(self.parent[out[-1]]))
            if len(out) > len(self.dist):
                raise RuntimeError("cycle in parent pointers")
        return out

    def check_tree_consistent(self, graph: EmbeddedGraph, scale: int = 1):
        """dist(v) == dist(parent) + w(v,parent) exactly, for every reached v."""
        wmap = {}
        for eid in range(graph.m):
            u, w = int(graph.edge_u[eid]), int(graph.edge_v[eid])
            wmap[(u, w)] = wmap[(w, u)] = int(graph.weight_num[eid]) * scale
        for v in range(len(self.dist)):
            p = int(self.parent[v])
            if p >= 0:
                assert int(self.dist[v]) == int(self.dist[p]) + wmap[(v, p)], v
                assert self.root[v] == self.root[p]


def _run(graph, mask, sources: SourceSpec, cutoff=-1, scale: int = 1) -> SsspForest:
    for v in sources.vertices:
        if not mask[v]:
            raise ValueError(f"source {int(v)} outside the mask")
    wt = graph.nbr_w if scale == 1 else graph.nbr_w * np.int64(scale)
    dist, parent, root = kernels.dijkstra(
        graph.indptr, graph.nbr, wt, sources.vertices, sources.init_dist, mask, cutoff
    )
    return SsspForest(dist, parent, root, graph.denom * scale, source=sources)


def exact_sssp(graph: EmbeddedGraph, mask: Optional[np.ndarray], sources: SourceSpec,
               cutoff: int = -1, scale: int = 1) -> SsspForest:
    """Exact shortest-path forest within the induced subgraph."""
    if mask is None:
        mask = full_mask(graph)
    return _run(graph, mask, sources, cutoff, scale)


def approx_sssp(graph: EmbeddedGraph, mask: Optional[np.ndarray], sources: SourceSpec,
                eps: Fraction = Fraction(0), mode: str = "exact", seed: int = 0,
                cutoff: int = -1, scale: int = 1) -> SsspForest:
    """(1+eps)-approximate forest: d_G <= dist <= (1+eps) d_G for every vertex.

    mode "exact" returns the exact forest (valid for any eps >= 0). Mode
    "stretch-noise" degrades parent choices vertex by vertex: vertex v aims
    for a path of length about s_v * d_G(v) with s_v uniform on [1, 1+eps],
    clamped so the sandwich bound always holds.
    """
    eps = Fraction(eps)
    if eps < 0:
        raise ValueError("eps must be nonnegative")
    if mask is None:
        mask = full_mask(graph)
    if mode == "exact" or eps == 0:
        forest = _run(graph, mask, sources, cutoff, scale)
        forest.eps = eps
        return forest
    if mode != "stretch-noise":
        raise ValueError(f"unknown sssp mode {mode!r}")
    return _noisy(graph, mask, sources, eps, seed, cutoff, scale)


def _noisy(graph, mask, sources, eps, seed, cutoff, scale):
    # pass 1: exact distances
    exact = _run(graph, mask, sources, -1, scale)
    n = graph.n
    d0 = exact.dist
    order = [v for v in range(n) if d0[v] >= 0]
    order.sort(key=lambda v: (int(d0[v]), v))
    u = rng.uniforms_at(rng.derive(seed, "noise"), np.arange(n, dtype=np.uint64))
    p, q = eps.numerator, eps.denominator

    dist = np.full(n, -1, dtype=np.int64)
    parent = np.full(n, -1, dtype=np.int32)
    root = np.full(n, -1, dtype=np.int32)
    seeded = {}
    for i, v in enumerate(sources.vertices):
        v = int(v)
        d = int(sources.init_dist[i])
        if mask[v] and (v not in seeded or d < seeded[v]):
            seeded[v] = d

    wt = graph.nbr_w if scale == 1 else graph.nbr_w * np.int64(scale)
    for v in order:
        dv = int(d0[v])
        if v in seeded and seeded[v] == dv:
            dist[v] = dv
            root[v] = v
            continue
        # cap: floor((1+eps) d_G(v)); target: s_v * d_G(v)
        cap = (dv * (p + q)) // q
        target = dv + int(u[v] * float(p) / float(q) * dv)
        best = -1
        best_nd = -1
        fallback = -1
        fallback_nd = -1
        for k in range(int(graph.indptr[v]), int(graph.indptr[v + 1])):
            w = int(graph.nbr[k])
            if dist[w] < 0 or not mask[w]:
                continue
            if (int(d0[w]), w) >= (dv, v):
                continue  # only settled-earlier vertices may be parents
            nd = int(dist[w]) + int(wt[k])
            if nd <= cap:
                if nd > fallback_nd or (nd == fallback_nd and w < fallback):
                    fallback, fallback_nd = w, nd
                if nd <= target and (nd > best_nd or (nd == best_nd and w < best)):
                    best, best_nd = w, nd
        if best < 0:
            best, best_nd = fallback, fallback_nd
        if best < 0:
            # no assigned neighbor can stay under the cap; fall back to the
            # exact parent (always conforming by induction)
            best = int(exact.parent[v])
            best_nd = dv
            if best < 0:  # exact root seeded above
                dist[v] = dv
                root[v] = v
                continue
            if dist[best] < 0:
                raise RuntimeError("noisy pass processed vertices out of order")
            for k in range(int(graph.indptr[v]), int(graph.indptr[v + 1])):
                if int(graph.nbr[k]) == best:
                    best_nd = int(dist[best]) + int(wt[k])
                    break
        dist[v] = best_nd
        parent[v] = best
        root[v] = root[best]
        if cutoff >= 0 and best_nd > cutoff:
            pass  # truncation applied below so ancestors stay present
    if cutoff >= 0:
        drop = dist > cutoff
        dist[drop] = -1
        parent[drop] = -1
        root[drop] = -1
    return SsspForest(dist, parent, root, graph.denom * scale, eps, sources)


def multi_source_groups(graph: EmbeddedGraph, masks: Sequence[np.ndarray],
                        groups: Sequence[Sequence[SourceSpec]], eps=Fraction(0),
                        mode: str = "exact", seed: int = 0, cutoff: int = -1):
    """Per-group forests on vertex-disjoint masks; paths never leave a mask.

    groups[i] lists the source sets for masks[i]. Returns a list of lists of
    forests with matching shape.
    """
    if len(masks) != len(groups):
        raise ValueError("need one group list per mask")
    combined = np.zeros(graph.n, dtype=np.int64)
    for mask in masks:
        combined += mask.astype(np.int64)
    if combined.max(initial=0) > 1:
        raise ValueError("masks overlap")
    out = []
    for i, (mask, group_list) in enumerate(zip(masks, groups)):
        row = []
        for j, spec in enumerate(group_list):
            row.append(approx_sssp(graph, mask, spec, eps, mode,
                                   rng.derive(seed, "msg", i, j), cutoff))
        out.append(row)
    return out
