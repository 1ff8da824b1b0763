"""Independent oracles shared by the test modules.

These deliberately avoid the library's own shortest-path and routing code:
Bellman-Ford for distances, explicit ancestor climbing for tree paths, and
exhaustive enumeration for separator balance.
"""
from __future__ import annotations

from fractions import Fraction

import numpy as np

from planroute.cover import CoverTree
from planroute.graph import EmbeddedGraph


def bellman_ford(graph: EmbeddedGraph, source: int, mask=None):
    """O(n*m) relaxation; returns exact distance numerators (-1 unreached)."""
    n = graph.n
    INF = float("inf")
    dist = [INF] * n
    if mask is None:
        mask = np.ones(n, dtype=bool)
    dist[source] = 0
    edges = []
    for eid in range(graph.m):
        u, v, w = int(graph.edge_u[eid]), int(graph.edge_v[eid]), int(graph.weight_num[eid])
        if mask[u] and mask[v]:
            edges.append((u, v, w))
    for _ in range(n):
        changed = False
        for u, v, w in edges:
            if dist[u] + w < dist[v]:
                dist[v] = dist[u] + w
                changed = True
            if dist[v] + w < dist[u]:
                dist[u] = dist[v] + w
                changed = True
        if not changed:
            break
    return np.array([-1 if d == INF or not mask[i] else int(d)
                     for i, d in enumerate(dist)], dtype=np.int64)


def random_cover_tree(seed_gen: np.random.Generator, max_n: int = 64,
                      id_stride: int = 3) -> CoverTree:
    """Random rooted weighted tree with non-contiguous vertex ids."""
    k = int(seed_gen.integers(2, max_n + 1))
    ids = np.sort(seed_gen.choice(np.arange(0, id_stride * max_n + 5), size=k,
                                  replace=False)).astype(np.int32)
    order = seed_gen.permutation(k)
    parent = np.full(k, -1, dtype=np.int32)
    dist = np.zeros(k, dtype=np.int64)
    placed = [int(order[0])]
    for i in order[1:]:
        p = int(placed[int(seed_gen.integers(0, len(placed)))])
        w = int(seed_gen.integers(1, 10))
        parent[int(i)] = ids[p]
        dist[int(i)] = dist[p] + w
        placed.append(int(i))
    return CoverTree(tid=(0, 0, int(ids[int(order[0])]), int(ids[int(order[0])])),
                     root=int(ids[int(order[0])]), members=ids, parent=parent,
                     dist=dist, denom=1)


def tree_path_oracle(tree: CoverTree, s: int, t: int) -> list:
    """s..t path by climbing both root paths and splicing at the first common
    vertex; independent of DFS labels."""
    def root_path(v):
        out = [v]
        while True:
            p = int(tree.parent[tree.pos(out[-1])])
            if p < 0:
                return out
            out.append(p)

    ps, pt = root_path(s), root_path(t)
    set_s = {v: i for i, v in enumerate(ps)}
    for j, v in enumerate(pt):
        if v in set_s:
            return ps[:set_s[v]] + pt[:j + 1][::-1]
    raise AssertionError("no common ancestor")


def tree_dist_oracle(tree: CoverTree, s: int, t: int) -> Fraction:
    path = tree_path_oracle(tree, s, t)
    total = 0
    for u, v in zip(path, path[1:]):
        du, dv = int(tree.dist[tree.pos(u)]), int(tree.dist[tree.pos(v)])
        total += abs(du - dv)
    return Fraction(total, tree.denom)


def components_after_removal(graph: EmbeddedGraph, mask, removed) -> list:
    keep = mask.copy()
    for v in removed:
        keep[v] = False
    seen = np.zeros(graph.n, dtype=bool)
    comps = []
    for s in np.flatnonzero(keep):
        s = int(s)
        if seen[s]:
            continue
        comp = []
        stack = [s]
        seen[s] = True
        while stack:
            v = stack.pop()
            comp.append(v)
            for w in graph.neighbors(v):
                w = int(w)
                if keep[w] and not seen[w]:
                    seen[w] = True
                    stack.append(w)
        comps.append(sorted(comp))
    return comps


def balanced_tree_path_exists(graph: EmbeddedGraph, mask, forest) -> bool:
    """Brute force: some tree path splits the region to <= ceil(2/3 region)."""
    members = [int(v) for v in np.flatnonzero(mask)]
    bound = -(-2 * len(members) // 3)
    from planroute.separator import tree_path
    for i, x in enumerate(members):
        for y in members[i:]:
            path, _, _, _ = tree_path(forest, x, y)
            comps = components_after_removal(graph, mask, path)
            if all(len(c) <= bound for c in comps):
                return True
    return False
