"""(eps, Delta)-additive tree covers.

Five phases per recursion level: pseudo-padded partition of the uncharted
components, one tree-path separator per partition, portals every
eps_p*Delta along each separator arm, truncated (1+eps_t)-SSSP trees grown
from the portals inside their partition, then the separator vertices leave
the uncharted set. Levels repeat until nothing is uncharted; every pair at
distance < 2*Delta ends up with a tree within (1+eps)*d + eps*Delta with
constant probability per cover, so independent repetitions drive the
failure rate down.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from . import kernels, rng
from .decompose import CenterSet, decompose
from .graph import EmbeddedGraph, full_mask
from .separator import SeparatorPath, find_separator
from .sssp import SourceSpec, approx_sssp


class CoverError(RuntimeError):
    pass


def _log2ceil(n: int) -> int:
    return max(1, math.ceil(math.log2(max(2, n))))


@dataclass
class CoverParams:
    delta: Fraction
    eps: Fraction
    c_pd: int
    eps_pd: Fraction
    eps_s: Fraction
    eps_p: Fraction
    eps_t: Fraction
    max_recursions: int
    repetitions: int

    @staticmethod
    def defaults(n: int, delta, eps, c_pd: Optional[int] = None) -> "CoverParams":
        delta = Fraction(delta)
        eps = Fraction(eps)
        if eps <= 0 or delta <= 0:
            raise ValueError("delta and eps must be positive")
        lg = _log2ceil(n)
        if c_pd is None:
            c_pd = min(6400 * lg * lg, 8 * lg)
        return CoverParams(
            delta=delta,
            eps=eps,
            c_pd=c_pd,
            eps_pd=Fraction(1, c_pd),
            eps_s=eps / c_pd,
            eps_p=eps / 6,
            eps_t=eps / 6,
            max_recursions=6 * lg,
            repetitions=max(1, math.ceil(2 * math.log2(max(2, n)))),
        )


@dataclass(frozen=True)
class Portal:
    vertex: int
    cls: int                 # distance class along the arm, >= 1
    along: Fraction          # exact along-arm distance from the arm's root end
    arm: int


def make_portals(arm_vertices: Sequence[int], along_num: Sequence[int], denom: int,
                 eps_p: Fraction, delta: Fraction, arm: int = 0) -> list:
    """First vertex of every nonempty eps_p*Delta distance class on one arm.

    along_num are exact within-path distances (numerators over denom) from
    the arm's root end; vertex k is in class max(1, ceil(along_k / q)) with
    q = eps_p * Delta, and the first member of each class is its portal.
    """
    q = Fraction(eps_p) * Fraction(delta)
    if q <= 0:
        raise ValueError("portal spacing must be positive")
    portals = []
    seen_cls = set()
    for v, dn in zip(arm_vertices, along_num):
        d = Fraction(int(dn), denom)
        cls = max(1, math.ceil(d / q))
        if cls not in seen_cls:
            seen_cls.add(cls)
            portals.append(Portal(int(v), cls, d, arm))
    return portals


@dataclass
class CoverTree:
    tid: tuple                # (repetition, level, partition center, portal vertex)
    root: int
    members: np.ndarray       # int32, ascending vertex ids
    parent: np.ndarray        # int32 parent vertex id, -1 at root (parallel to members)
    dist: np.ndarray          # int64 numerators to root (parallel to members)
    denom: int

    def pos(self, v: int) -> int:
        i = int(np.searchsorted(self.members, v))
        if i >= len(self.members) or self.members[i] != v:
            return -1
        return i

    def __contains__(self, v: int) -> bool:
        return self.pos(int(v)) >= 0

    def dist_of(self, v: int) -> Fraction:
        return Fraction(int(self.dist[self.pos(v)]), self.denom)

    def size(self) -> int:
        return len(self.members)


def tree_distance(tree: CoverTree, u: int, v: int) -> Fraction:
    """Exact within-tree distance via the LCA (tree-consistent dist fields)."""
    pu, pv = tree.pos(u), tree.pos(v)
    if pu < 0 or pv < 0:
        raise KeyError("vertex not in tree")
    du, dv = int(tree.dist[pu]), int(tree.dist[pv])
    a, da, b, db = int(u), du, int(v), dv
    while a != b:
        if da >= db:
            a = int(tree.parent[tree.pos(a)])
            if a < 0:
                raise KeyError("vertices in different trees")
            da = int(tree.dist[tree.pos(a)])
        else:
            b = int(tree.parent[tree.pos(b)])
            if b < 0:
                raise KeyError("vertices in different trees")
            db = int(tree.dist[tree.pos(b)])
    return Fraction(du + dv - 2 * da, tree.denom)


@dataclass
class TreeCover:
    trees: list
    params: CoverParams
    seed: int
    repetition: int
    diagnostics: dict = field(default_factory=dict)
    vertex_index: Optional[list] = None   # per vertex: list of tree indices

    def ensure_index(self):
        if self.vertex_index is None:
            prune_far_roots(self, self.params.delta)
        return self.vertex_index


def _arm_portals(forest, sep: SeparatorPath, denom, eps_p, delta) -> list:
    """Portals over both arms, deduplicated by vertex (the lca is on both)."""
    portals = []
    seen = set()
    for ai, arm in enumerate(sep.arms):
        if not arm:
            continue
        # arms run tipward->lca; portal classes count from the rootward end
        ordered = list(reversed(arm))
        base = int(forest.dist[ordered[0]])
        along = [int(forest.dist[v]) - base for v in ordered]
        for p in make_portals(ordered, along, denom, eps_p, delta, arm=ai):
            if p.vertex not in seen:
                seen.add(p.vertex)
                portals.append(p)
    return portals


def _degenerate_path(graph, members) -> tuple:
    """Tree path and along-distances for regions of fewer than 3 vertices."""
    verts = sorted(int(v) for v in members)
    if len(verts) == 1:
        return verts, [0]
    u, v = verts
    for k in range(int(graph.indptr[u]), int(graph.indptr[u + 1])):
        if int(graph.nbr[k]) == v:
            return verts, [0, int(graph.nbr_w[k])]
    raise CoverError("two-vertex region is not connected")


def build_cover(graph: EmbeddedGraph, params: CoverParams, seed: int,
                mode: str = "exact", repetition: int = 0,
                mask: Optional[np.ndarray] = None) -> TreeCover:
    """One (eps, Delta)-additive tree cover of the masked region."""
    if mask is None:
        mask = full_mask(graph)
    uncharted = mask.copy()
    delta = params.delta
    delta_num = _delta_num(delta, graph.denom)
    cutoff = 2 * delta_num
    delta_pd = delta * params.c_pd
    trees: list = []
    sep_records: list = []
    shrink_log: list = []
    level = 0
    while uncharted.any():
        if level >= params.max_recursions:
            raise CoverError(
                f"recursion cap {params.max_recursions} exceeded; separator balance bug")
        labels, k = kernels.connected_components(graph.indptr, graph.nbr, uncharted)
        old_sizes = np.bincount(labels[labels >= 0], minlength=k)
        charted_now = np.zeros(graph.n, dtype=bool)
        for ci in range(k):
            comp_mask = labels == ci
            comp = np.flatnonzero(comp_mask)
            part_items = _partitions(graph, comp_mask, comp, delta_pd, params,
                                     seed, level, ci, mode)
            for center, part in part_items:
                part_mask = np.zeros(graph.n, dtype=bool)
                part_mask[part] = True
                if len(part) >= 3:
                    root = int(part.min())
                    forest = approx_sssp(graph, part_mask, SourceSpec.single(root),
                                         params.eps_s, mode,
                                         seed=rng.derive(seed, "sep", level, ci, center))
                    sep = find_separator(graph, part_mask, forest)
                    portals = _arm_portals(forest, sep, graph.denom,
                                           params.eps_p, delta)
                    path = sep.vertices
                else:
                    path, along = _degenerate_path(graph, part)
                    sep = None
                    portals = (make_portals(path, along, graph.denom,
                                            params.eps_p, delta)
                               if len(path) >= 2 else [])
                if sep is not None and not sep.balanced():
                    raise CoverError(
                        f"level {level}: separator left a component of "
                        f"{sep.max_component}/{sep.region_size}")
                sep_records.append({
                    "level": level, "region": int(len(part)),
                    "max_component": int(sep.max_component) if sep else 0,
                    "arms": sum(1 for a in sep.arms if len(a) > 1) if sep else 1,
                    "degenerate": sep.degenerate if sep else True,
                    "balanced": sep.balanced() if sep else True,
                    "fallback": sep.used_fallback if sep else False,
                })
                for p in portals:
                    pf = approx_sssp(graph, part_mask, SourceSpec.single(p.vertex),
                                     params.eps_t, mode,
                                     seed=rng.derive(seed, "pt", level, ci, p.vertex),
                                     cutoff=cutoff)
                    members = np.flatnonzero(pf.reached()).astype(np.int32)
                    if len(members) < 2:
                        continue
                    trees.append(CoverTree(
                        tid=(repetition, level, int(center), int(p.vertex)),
                        root=int(p.vertex),
                        members=members,
                        parent=pf.parent[members].astype(np.int32),
                        dist=pf.dist[members].copy(),
                        denom=graph.denom,
                    ))
                for v in path:
                    charted_now[v] = True
        uncharted &= ~charted_now
        if uncharted.any():
            new_labels, nk = kernels.connected_components(graph.indptr, graph.nbr,
                                                          uncharted)
            worst = 0.0
            for ni in range(nk):
                nc = np.flatnonzero(new_labels == ni)
                parent_size = int(old_sizes[labels[nc[0]]])
                # strict shrink per component; the 5/6 factor holds inside one
                # partition but residuals of different partitions may merge
                if len(nc) >= parent_size:
                    raise CoverError(
                        f"level {level}: component kept {len(nc)}/{parent_size} "
                        "vertices, separator balance bug")
                worst = max(worst, len(nc) / parent_size)
            shrink_log.append(worst)
        level += 1
    cover = TreeCover(trees, params, seed, repetition,
                      {"levels": level, "separators": sep_records,
                       "worst_component_shrink": max(shrink_log, default=0.0)})
    return cover


def _partitions(graph, comp_mask, comp, delta_pd, params, seed, level, ci, mode):
    """Phase 1: pseudo-padded decomposition of one uncharted component."""
    if len(comp) == 1:
        return [(int(comp[0]), comp.astype(np.int32))]
    centers = CenterSet.all_of(comp_mask)
    part = decompose(graph, comp_mask, centers, delta_pd, params.eps_pd,
                     seed=rng.derive(seed, "pd", level, ci), mode=mode)
    if part.covering_violations:
        raise CoverError(f"covering violated in level {level}: "
                         f"{part.covering_violations[:3]}")
    clusters = part.clusters()
    return sorted(clusters.items())


def _delta_num(delta: Fraction, denom: int) -> int:
    v = Fraction(delta) * denom
    if v.denominator != 1:
        raise ValueError(f"Delta={delta} is not on the 1/{denom} weight grid")
    return int(v)


def prune_far_roots(cover: TreeCover, delta) -> TreeCover:
    """Re-apply the 2*Delta root-distance cut and rebuild the vertex index.

    The cut is already enforced during growth; this pass re-checks it, drops
    any member beyond the bound, and reports the per-vertex per-level tree
    counts (expected to stay around O(1/eps) portals per separator arm).
    """
    delta_num = _delta_num(Fraction(delta), cover.trees[0].denom if cover.trees else 1)
    bound = 2 * delta_num
    kept = []
    for t in cover.trees:
        keep = t.dist <= bound
        if not keep.all():
            t = CoverTree(t.tid, t.root, t.members[keep], t.parent[keep],
                          t.dist[keep], t.denom)
        if len(t.members) >= 2:
            kept.append(t)
    cover.trees = kept
    n = 1 + max((int(t.members.max()) for t in kept), default=0)
    index: list = [[] for _ in range(n)]
    per_level: dict = {}
    for i, t in enumerate(kept):
        lvl = t.tid[1]
        for v in t.members:
            index[v].append(i)
            key = (int(v), lvl)
            per_level[key] = per_level.get(key, 0) + 1
    cover.vertex_index = index
    cover.diagnostics["max_trees_per_vertex_per_level"] = max(per_level.values(), default=0)
    cover.diagnostics["max_trees_per_vertex"] = max((len(ix) for ix in index), default=0)
    return cover


def repeat_covers(graph: EmbeddedGraph, params: CoverParams, L: int, seed: int,
                  mode: str = "exact") -> list:
    """L independently seeded covers; the union serves downstream queries."""
    if L < 1:
        raise ValueError("need at least one repetition")
    out = []
    for j in range(L):
        cover = build_cover(graph, params, rng.derive(seed, "rep", j),
                            mode=mode, repetition=j)
        prune_far_roots(cover, params.delta)
        out.append(cover)
    return out


def dump_cover(cover: TreeCover, fh) -> None:
    """Diagnostic dump: one sortable text line per (vertex, tree, dist, parent)."""
    for t in cover.trees:
        tid = ":".join(str(x) for x in t.tid)
        for i, v in enumerate(t.members):
            fh.write(f"{int(v)}\t{tid}\t{int(t.dist[i])}/{t.denom}\t{int(t.parent[i])}\n")


def best_tree_distance(covers: Sequence[TreeCover], u: int, v: int):
    """Smallest within-tree distance over all trees containing both vertices."""
    best = None
    for cover in covers:
        index = cover.ensure_index()
        if u >= len(index) or v >= len(index):
            continue
        common = set(index[u]) & set(index[v])
        for ti in common:
            d = tree_distance(cover.trees[ti], u, v)
            if best is None or d < best:
                best = d
    return best
