"""Balanced shortest-path separators from an SSSP tree and the embedding.

The region's spanning tree is unrolled into its Euler tour (one replica per
tree-edge arrival, i.e. per corner of the embedding). Every non-tree edge
becomes a chord between the two corners that host it; the chord's span is
the lighter of the two open tour arcs between its corners, which is exactly
the arc left after the weight-flip step. Corners covered by no span are the
external nodes; the two-node selection on them yields two tree vertices
whose unique tree path splits the region so that every residual component
has at most ceil(2/3 * region) vertices.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import lcm
from typing import Optional, Sequence

import numpy as np

from . import kernels, rng
from .graph import EmbeddedGraph, induced_rotation
from .sssp import SsspForest, SourceSpec, approx_sssp


@dataclass
class EulerTour:
    """Cyclic corner sequence of a spanning tree inside an embedded region.

    visits[i] = (vertex, arrival edge id); weight_num[i] = D // tree_deg(vertex)
    where D is the lcm of the tree degrees, so weights are exact integers and
    sum to region_size * D.
    """
    visits: list
    weight_num: list
    weight_denom: int
    index_of: dict               # (vertex, arrival eid) -> tour position

    @property
    def length(self) -> int:
        return len(self.visits)

    @property
    def total_num(self) -> int:
        return sum(self.weight_num)

    def weights(self) -> list:
        return [Fraction(w, self.weight_denom) for w in self.weight_num]


class SeparatorError(ValueError):
    pass


def _tree_edges_in_rotation(graph, mask, forest, v):
    """v's tree edges in induced clockwise rotation order, with positions."""
    rot = induced_rotation(graph, mask, v)
    tree_nbrs = set()
    p = int(forest.parent[v])
    if p >= 0:
        tree_nbrs.add(p)
    # children: any masked neighbor w with parent[w] == v
    for eid in rot:
        w = graph.other_end(eid, v)
        if int(forest.parent[w]) == v:
            tree_nbrs.add(w)
    entries = []
    for pos, eid in enumerate(rot):
        w = graph.other_end(eid, v)
        if w in tree_nbrs and (int(forest.parent[w]) == v or w == p):
            entries.append((pos, eid, w))
    return rot, entries


def euler_tour(graph: EmbeddedGraph, mask: np.ndarray, forest: SsspForest,
               root: int) -> EulerTour:
    """Euler tour of the forest's tree covering the masked region.

    The tour follows the embedding: arriving at v along a tree edge, it
    leaves along the next tree edge in v's clockwise rotation. The cycle is
    rotated so position 0 is a corner of the root.
    """
    members = [int(v) for v in np.flatnonzero(mask)]
    for v in members:
        if forest.dist[v] < 0:
            raise SeparatorError(f"tree does not span the region at vertex {v}")
    if len(members) < 2:
        raise SeparatorError("tour needs at least one tree edge")

    next_tree = {}     # (v, arrival eid) -> departure eid
    tree_deg = {}
    for v in members:
        _, entries = _tree_edges_in_rotation(graph, mask, forest, v)
        if not entries:
            raise SeparatorError(f"vertex {v} has no tree edge")
        tree_deg[v] = len(entries)
        for k in range(len(entries)):
            _, eid, _ = entries[k]
            next_tree[(v, eid)] = entries[(k + 1) % len(entries)][1]

    dmax = lcm(*sorted(set(tree_deg.values())))
    start_v = root
    start_eid = next(eid for (v, eid) in next_tree if v == start_v)
    # walk directed tree edges; each arrival is one corner replica
    visits = []
    total = 2 * (len(members) - 1)
    cv, ce = start_v, start_eid
    for _ in range(total):
        w = graph.other_end(ce, cv)
        visits.append((w, ce))
        cv = w
        ce = next_tree[(w, ce)]
    if (cv, ce) != (start_v, start_eid):
        raise SeparatorError("euler tour failed to close; embedding inconsistent")
    # rotate so a root corner sits at position 0 (the final arrival is at root)
    k = max(i for i, (w, _) in enumerate(visits) if w == root)
    visits = visits[k:] + visits[:k]
    weight_num = [dmax // tree_deg[w] for (w, _) in visits]
    index_of = {visit: i for i, visit in enumerate(visits)}
    return EulerTour(visits, weight_num, dmax, index_of)


@dataclass
class SeparatorPath:
    x: int
    y: int
    lca: int
    vertices: list                     # x .. lca .. y along the tree
    arms: list                         # [x..lca], [lca..y] minus shared lca
    components: list                   # residual masks' vertex arrays, big first
    region_size: int
    degenerate: bool = False
    used_fallback: bool = False

    @property
    def max_component(self) -> int:
        return max((len(c) for c in self.components), default=0)

    def balanced(self) -> bool:
        return self.max_component <= -(-2 * self.region_size // 3)


def _corner_of(graph, mask, forest, tour, v, eid) -> int:
    """Tour position owning non-tree edge eid at vertex v."""
    rot, entries = _tree_edges_in_rotation(graph, mask, forest, v)
    pos = rot.index(eid)
    best = None
    for tpos, teid, _ in entries:
        if tpos <= pos:
            best = teid
    if best is None:           # wraps: owned by the last tree edge's corner
        best = entries[-1][1]
    return tour.index_of[(v, best)]


def find_separator(graph: EmbeddedGraph, mask: Optional[np.ndarray],
                   forest: SsspForest) -> SeparatorPath:
    """One-tree-path separator of the masked region, balanced to <= 2/3.

    The supplied forest must span the region from a single root. Regions of
    fewer than 3 vertices short-circuit to "the whole region" (degenerate).
    """
    if mask is None:
        mask = np.ones(graph.n, dtype=bool)
    members = np.flatnonzero(mask)
    region = len(members)
    roots = [int(v) for v in members if forest.parent[v] < 0 and forest.dist[v] >= 0]
    if len(roots) != 1:
        raise SeparatorError(f"region must have exactly one tree root, found {roots}")
    root = roots[0]
    if region < 3:
        verts = [int(v) for v in members]
        path = sorted(verts)
        return SeparatorPath(path[0], path[-1], path[0], path, [path, []],
                             [], region, degenerate=True)

    tour = euler_tour(graph, mask, forest, root)
    T = tour.length
    w = tour.weight_num
    prefix = [0]
    for x in w:
        prefix.append(prefix[-1] + x)
    total = prefix[-1]

    def arc_weight(a: int, b: int) -> int:
        # weight of corners strictly between a and b going forward
        if a == b:
            return total - w[a]
        if a < b:
            return prefix[b] - prefix[a + 1]
        return (total - prefix[a + 1]) + prefix[b]

    # chords: masked non-tree edges, attached at their two host corners
    in_tree = set()
    for v in members:
        p = int(forest.parent[v])
        if p >= 0:
            in_tree.add((min(int(v), p), max(int(v), p)))
    covered = np.zeros(T, dtype=np.int64)

    def mark(a: int, b: int):
        # mark the open arc (a, b) going forward; may wrap past position 0
        if a < b:
            covered[a + 1:b] += 1
        else:
            covered[a + 1:T] += 1
            covered[0:b] += 1

    for eid in range(graph.m):
        u, v = int(graph.edge_u[eid]), int(graph.edge_v[eid])
        if not (mask[u] and mask[v]):
            continue
        if (min(u, v), max(u, v)) in in_tree:
            continue
        cu = _corner_of(graph, mask, forest, tour, u, eid)
        cv = _corner_of(graph, mask, forest, tour, v, eid)
        a, b = min(cu, cv), max(cu, cv)
        fwd = arc_weight(a, b)
        bwd = total - fwd - w[a] - w[b]
        if fwd <= bwd:
            mark(a, b)
        else:
            mark(b, a)

    external = [i for i in range(T) if covered[i] == 0]
    used_fallback = False
    if len(external) >= 2:
        z0 = external[0]
        later = external[1:]
        yp = None
        for e in later:
            if 3 * arc_weight(z0, e) <= 2 * total:
                yp = e
            else:
                break
        if yp is None:
            yp = later[0]
            used_fallback = True
        xp = z0
        idx = later.index(yp)
        if idx + 1 < len(later):
            z1 = later[idx + 1]
            if 3 * arc_weight(yp, z1) > total:
                xp = z1
    else:
        # covering degenerated (possible only under exact-tie span choices);
        # split at the weighted midpoint instead
        used_fallback = True
        z0 = 0
        acc = 0
        yp = T - 1
        for i in range(1, T):
            acc += w[i]
            if 2 * acc > total:
                yp = i
                break
        xp = z0

    x = tour.visits[xp][0]
    y = tour.visits[yp][0]
    path, lca, arm_x, arm_y = tree_path(forest, x, y)
    pathset = np.zeros(graph.n, dtype=bool)
    pathset[path] = True
    rest = mask & ~pathset
    label, k = kernels.connected_components(graph.indptr, graph.nbr, rest)
    comps = [np.flatnonzero(label == i).astype(np.int32) for i in range(k)]
    comps.sort(key=lambda c: (-len(c), int(c[0]) if len(c) else 0))
    return SeparatorPath(x, y, lca, path, [arm_x, arm_y], comps, region,
                         used_fallback=used_fallback)


def tree_path(forest: SsspForest, x: int, y: int):
    """Unique tree path x..y, its LCA, and the two root-path arms."""
    a, b = x, y
    up_a, up_b = [a], [b]
    while a != b:
        if forest.dist[a] >= forest.dist[b]:
            a = int(forest.parent[a])
            if a < 0:
                raise SeparatorError("vertices lie in different trees")
            up_a.append(a)
        else:
            b = int(forest.parent[b])
            if b < 0:
                raise SeparatorError("vertices lie in different trees")
            up_b.append(b)
    lca = a
    path = up_a + up_b[-2::-1]
    return path, lca, up_a, up_b


def separate_all(graph: EmbeddedGraph, masks: Sequence[np.ndarray],
                 eps=Fraction(0), mode: str = "exact", seed: int = 0) -> list:
    """Independent separators for disjoint regions; SSSP root = min-id vertex."""
    seen = np.zeros(graph.n, dtype=np.int64)
    for m in masks:
        seen += m.astype(np.int64)
    if seen.max(initial=0) > 1:
        raise SeparatorError("regions overlap")
    out = []
    for i, m in enumerate(masks):
        members = np.flatnonzero(m)
        if len(members) == 0:
            raise SeparatorError("empty region")
        root = int(members.min())
        forest = approx_sssp(graph, m, SourceSpec.single(root), eps, mode,
                             seed=rng.derive(seed, "sep", i))
        out.append(find_separator(graph, m, forest))
    return out
