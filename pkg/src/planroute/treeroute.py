"""Exact compact routing on one rooted tree.

Per node: a table (root, dist, parent, DFS entry/exit, heavy child); per
target: a label (root, DFS entry, the endpoints of non-heavy edges on its
root path, dist). A hop looks only at the current node's table, its local
child ids, and the packet's target label: climb while the target's entry
index is outside the node's interval, then descend to the labelled light
child if one is local, else to the heavy child.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .cover import CoverTree

DELIVERED = -1


class RoutingContractError(RuntimeError):
    """Target label does not belong to this tree."""


@dataclass
class TreeTables:
    """Bulk per-member routing data for one tree (arrays parallel members)."""
    root: int
    members: np.ndarray        # int32 ascending
    parent: np.ndarray         # int32 vertex id, -1 at root
    dist: np.ndarray           # int64 numerators
    denom: int
    a: np.ndarray              # int32 DFS entry
    b: np.ndarray              # int32 max DFS entry in subtree
    heavy: np.ndarray          # int32 vertex id, -1 at leaves
    light_indptr: np.ndarray   # int32, len members+1
    light_data: np.ndarray     # int32 vertex ids, root-to-leaf order

    def pos(self, v: int) -> int:
        i = int(np.searchsorted(self.members, v))
        if i >= len(self.members) or self.members[i] != v:
            return -1
        return i

    def light_list(self, pos: int) -> np.ndarray:
        return self.light_data[self.light_indptr[pos]:self.light_indptr[pos + 1]]


def build_tree_arrays(tree: CoverTree) -> TreeTables:
    members = tree.members
    k = len(members)
    parent = tree.parent
    dist = tree.dist
    rootsel = parent < 0
    if int(rootsel.sum()) != 1:
        raise ValueError("tree must have exactly one root")
    root_pos = int(np.flatnonzero(rootsel)[0])
    pp = np.searchsorted(members, np.where(rootsel, members[0], parent)).astype(np.int32)
    pp[root_pos] = -1
    # children before parents: dist strictly decreases toward the root
    order = np.lexsort((members, -dist))
    size = np.ones(k, dtype=np.int64)
    for i in order.tolist():
        p = pp[i]
        if p >= 0:
            size[p] += size[i]
    nonroot = np.flatnonzero(pp >= 0)
    grouped = nonroot[np.lexsort((members[nonroot], size[nonroot], pp[nonroot]))]
    child_count = np.bincount(pp[nonroot], minlength=k)
    child_indptr = np.concatenate([[0], np.cumsum(child_count)]).astype(np.int64)
    heavy = np.full(k, -1, dtype=np.int32)
    gl = grouped.tolist()
    for p in range(k):
        lo, hi = int(child_indptr[p]), int(child_indptr[p + 1])
        if lo == hi:
            continue
        best = gl[lo]
        for j in range(lo + 1, hi):
            c = gl[j]
            if size[c] > size[best]:
                best = c
        heavy[p] = members[best]    # group is (size, id)-ascending; ties keep smaller id
    a = np.zeros(k, dtype=np.int32)
    b = np.zeros(k, dtype=np.int32)
    light_lists: list = [None] * k
    light_lists[root_pos] = []
    counter = 1
    it_stack = [(root_pos, 0)]
    while it_stack:
        i, ci = it_stack.pop()
        lo = int(child_indptr[i])
        if lo + ci < int(child_indptr[i + 1]):
            it_stack.append((i, ci + 1))
            c = gl[lo + ci]
            a[c] = counter
            counter += 1
            chain = light_lists[i]
            if int(members[c]) != int(heavy[i]):
                chain = chain + [int(members[c])]
            light_lists[c] = chain
            it_stack.append((c, 0))
    b[:] = a + size - 1
    light_indptr = np.zeros(k + 1, dtype=np.int32)
    for i in range(k):
        light_indptr[i + 1] = light_indptr[i] + len(light_lists[i])
    light_data = np.empty(int(light_indptr[-1]), dtype=np.int32)
    for i in range(k):
        light_data[light_indptr[i]:light_indptr[i + 1]] = light_lists[i]
    return TreeTables(tree.root, members, parent, dist, tree.denom,
                      a, b, heavy, light_indptr, light_data)


@dataclass(frozen=True)
class TreeTable:
    r: int                     # root id
    d: Fraction                # dist to root
    p: int                     # parent id, -1 at root
    a: int                     # DFS entry
    b: int                     # DFS exit (max entry in subtree)
    h: int                     # heavy child id, -1 at leaves
    children: tuple = ()       # node-local adjacency, not part of the table size


@dataclass(frozen=True)
class TreeLabel:
    r: int
    a: int
    light: tuple               # ids of non-heavy endpoints on the root path
    d: Fraction


def build_tree_tables(tree: CoverTree):
    """Per-member TreeTable and TreeLabel for one tree."""
    tt = build_tree_arrays(tree)
    k = len(tt.members)
    kids: dict = {int(v): [] for v in tt.members}
    for i in range(k):
        p = int(tt.parent[i])
        if p >= 0:
            kids[p].append(int(tt.members[i]))
    tables = {}
    labels = {}
    for i in range(k):
        v = int(tt.members[i])
        d = Fraction(int(tt.dist[i]), tt.denom)
        tables[v] = TreeTable(tt.root, d, int(tt.parent[i]), int(tt.a[i]),
                              int(tt.b[i]), int(tt.heavy[i]), tuple(sorted(kids[v])))
        labels[v] = TreeLabel(tt.root, int(tt.a[i]),
                              tuple(int(x) for x in tt.light_list(i)), d)
    return tables, labels


def tree_next_hop(table: TreeTable, target: TreeLabel) -> int:
    """Next neighbor toward the target, or DELIVERED.

    Memoryless: depends only on the current node's table (plus its local
    child ids) and the target label.
    """
    if table.r != target.r:
        raise RoutingContractError("label belongs to a different tree")
    at = target.a
    if at == table.a:
        return DELIVERED
    if at < table.a or at > table.b:
        if table.p < 0:
            raise RoutingContractError("target entry outside the root interval")
        return table.p
    for w in target.light:
        if w in table.children:
            return w
    if table.h < 0:
        raise RoutingContractError("descend step at a leaf; label corrupt")
    return table.h


def tree_route(tables: dict, s: int, target: TreeLabel, max_hops: int | None = None):
    """Iterate tree_next_hop from s; returns the traversed vertex sequence."""
    if s not in tables:
        raise RoutingContractError(f"{s} is not in the tree")
    path = [s]
    v = s
    budget = max_hops if max_hops is not None else 4 * len(tables) + 4
    while True:
        nxt = tree_next_hop(tables[v], target)
        if nxt == DELIVERED:
            return path
        path.append(nxt)
        v = nxt
        if len(path) > budget:
            raise RoutingContractError("hop budget exceeded; routing loop")


def route_length(tables: dict, path: Sequence[int]) -> Fraction:
    """Sum of tree-edge weights along a routed path, from the dist fields."""
    total = Fraction(0)
    for u, v in zip(path, path[1:]):
        total += abs(tables[u].d - tables[v].d)
    return total
