"""Weighted embedded planar graphs: data model, generators, file I/O.

A graph is undirected and connected, carries one rotation system (the
clockwise cyclic order of incident edge ids at every vertex), and stores
edge weights as exact rationals: integer numerators over one shared
denominator. All distance arithmetic downstream stays in int64 numerators,
so path-length comparisons are exact and ties break reproducibly.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np

from . import rng


class GraphFormatError(ValueError):
    """Malformed graph file; message carries the offending line number."""


@dataclass
class EmbeddedGraph:
    n: int
    edge_u: np.ndarray          # int32, len m
    edge_v: np.ndarray          # int32, len m
    weight_num: np.ndarray      # int64 numerators, len m
    denom: int                  # shared weight denominator, >= 1
    rotation: list              # per vertex: list of incident edge ids, clockwise
    coords: Optional[list] = None   # per vertex (x, y) or None

    # CSR adjacency, built once in __post_init__
    indptr: np.ndarray = field(init=False, repr=False)
    nbr: np.ndarray = field(init=False, repr=False)
    nbr_eid: np.ndarray = field(init=False, repr=False)
    nbr_w: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        self.edge_u = np.asarray(self.edge_u, dtype=np.int32)
        self.edge_v = np.asarray(self.edge_v, dtype=np.int32)
        self.weight_num = np.asarray(self.weight_num, dtype=np.int64)
        self._build_csr()
        self.validate()

    @property
    def m(self) -> int:
        return len(self.edge_u)

    def weight(self, eid: int) -> Fraction:
        return Fraction(int(self.weight_num[eid]), self.denom)

    @property
    def max_weight(self) -> Fraction:
        if self.m == 0:
            return Fraction(1)
        return Fraction(int(self.weight_num.max()), self.denom)

    def other_end(self, eid: int, v: int) -> int:
        u = int(self.edge_u[eid])
        return int(self.edge_v[eid]) if u == v else u

    def _build_csr(self):
        # rotation order defines CSR order; kernels and face walks rely on it
        deg = np.array([len(r) for r in self.rotation], dtype=np.int64)
        self.indptr = np.concatenate([[0], np.cumsum(deg)]).astype(np.int64)
        total = int(self.indptr[-1])
        self.nbr = np.empty(total, dtype=np.int32)
        self.nbr_eid = np.empty(total, dtype=np.int32)
        self.nbr_w = np.empty(total, dtype=np.int64)
        for v, rot in enumerate(self.rotation):
            base = int(self.indptr[v])
            for k, eid in enumerate(rot):
                self.nbr[base + k] = self.other_end(eid, v)
                self.nbr_eid[base + k] = eid
                self.nbr_w[base + k] = self.weight_num[eid]

    def neighbors(self, v: int) -> np.ndarray:
        return self.nbr[self.indptr[v]:self.indptr[v + 1]]

    def validate(self):
        if self.n < 1:
            raise ValueError("graph needs at least one vertex")
        if self.denom < 1:
            raise ValueError("denominator must be positive")
        if self.m != len(self.edge_v) or self.m != len(self.weight_num):
            raise ValueError("edge arrays disagree on m")
        if len(self.rotation) != self.n:
            raise ValueError("rotation must cover every vertex")
        if self.m and (self.edge_u == self.edge_v).any():
            raise ValueError("self-loops are not allowed")
        lo = np.minimum(self.edge_u, self.edge_v).astype(np.int64)
        hi = np.maximum(self.edge_u, self.edge_v).astype(np.int64)
        if self.m and len(np.unique(lo * self.n + hi)) != self.m:
            raise ValueError("parallel edges are not allowed")
        if self.m and int(self.weight_num.min()) < self.denom:
            raise ValueError("weights below 1 are not allowed")
        if self.n >= 3 and self.m > 3 * self.n - 6:
            raise ValueError(f"m={self.m} violates the planar bound 3n-6={3 * self.n - 6}")
        seen = np.zeros(self.m, dtype=np.int8)
        for v, rot in enumerate(self.rotation):
            for eid in rot:
                if not (0 <= eid < self.m):
                    raise ValueError(f"rotation at {v} names unknown edge {eid}")
                if v not in (int(self.edge_u[eid]), int(self.edge_v[eid])):
                    raise ValueError(f"rotation at {v} lists non-incident edge {eid}")
                seen[eid] += 1
        if self.m and not (seen == 2).all():
            bad = int(np.flatnonzero(seen != 2)[0])
            raise ValueError(f"edge {bad} must appear exactly once in each endpoint rotation")
        if not self.is_connected():
            raise ValueError("graph must be connected")

    def is_connected(self) -> bool:
        if self.n == 1:
            return True
        seen = np.zeros(self.n, dtype=bool)
        stack = [0]
        seen[0] = True
        count = 1
        while stack:
            v = stack.pop()
            for w in self.neighbors(v):
                if not seen[w]:
                    seen[w] = True
                    count += 1
                    stack.append(int(w))
        return count == self.n

    def check_weight_bound(self, c: float = 3.0) -> bool:
        """Sanity check 1 <= w <= n**c on every edge weight."""
        if self.m == 0:
            return True
        hi = Fraction(self.n) ** Fraction(c).limit_denominator(1)
        return self.max_weight <= hi and Fraction(int(self.weight_num.min()), self.denom) >= 1

    def structurally_equal(self, other: "EmbeddedGraph") -> bool:
        return (
            self.n == other.n
            and self.denom == other.denom
            and np.array_equal(self.edge_u, other.edge_u)
            and np.array_equal(self.edge_v, other.edge_v)
            and np.array_equal(self.weight_num, other.weight_num)
            and self.rotation == other.rotation
        )


def full_mask(graph: EmbeddedGraph) -> np.ndarray:
    return np.ones(graph.n, dtype=bool)


def induced_rotation(graph: EmbeddedGraph, mask: np.ndarray, v: int) -> list:
    """Rotation of v in the induced subgraph: delete entries leaving the mask."""
    return [eid for eid in graph.rotation[v] if mask[graph.other_end(eid, v)]]


# ---------------------------------------------------------------------------
# generators
# ---------------------------------------------------------------------------

def _draw_weights(dist: str, count: int, seed: int, denom: int) -> np.ndarray:
    """Weight numerators from a distribution spec: 'unit' or 'uniform:a:b'."""
    if dist == "unit":
        return np.full(count, denom, dtype=np.int64)
    if dist.startswith("uniform:"):
        parts = dist.split(":")
        if len(parts) != 3:
            raise ValueError(f"bad weight spec {dist!r}, want uniform:a:b")
        lo, hi = int(parts[1]), int(parts[2])
        if lo < 1 or hi < lo:
            raise ValueError(f"bad uniform range [{lo},{hi}]")
        u = rng.uniforms_at(rng.derive(seed, "weights"), np.arange(count, dtype=np.uint64))
        nums = (lo * denom + np.floor(u * (hi - lo + 1)).astype(np.int64) * denom)
        return np.minimum(nums, hi * denom)
    raise ValueError(f"unknown weight distribution {dist!r}")


def generate_grid(rows: int, cols: int, weight_dist: str = "unit", seed: int = 0,
                  denom: int = 1) -> EmbeddedGraph:
    """rows x cols grid with the canonical clockwise rotation N, E, S, W."""
    if rows < 1 or cols < 1:
        raise ValueError("grid dimensions must be positive")
    n = rows * cols

    def vid(r, c):
        return r * cols + c

    edge_u, edge_v = [], []
    horiz = {}
    vert = {}
    for r in range(rows):
        for c in range(cols):
            if c + 1 < cols:
                horiz[(r, c)] = len(edge_u)
                edge_u.append(vid(r, c))
                edge_v.append(vid(r, c + 1))
            if r + 1 < rows:
                vert[(r, c)] = len(edge_u)
                edge_u.append(vid(r, c))
                edge_v.append(vid(r + 1, c))
    rotation = []
    for r in range(rows):
        for c in range(cols):
            rot = []
            if r > 0:
                rot.append(vert[(r - 1, c)])        # N
            if c + 1 < cols:
                rot.append(horiz[(r, c)])           # E
            if r + 1 < rows:
                rot.append(vert[(r, c)])            # S
            if c > 0:
                rot.append(horiz[(r, c - 1)])       # W
            rotation.append(rot)
    w = _draw_weights(weight_dist, len(edge_u), seed, denom)
    coords = [(float(c), float(r)) for r in range(rows) for c in range(cols)]
    return EmbeddedGraph(n, np.array(edge_u), np.array(edge_v), w, denom, rotation, coords)


def generate_triangulated_grid(rows: int, cols: int, weight_dist: str = "unit",
                               seed: int = 0, denom: int = 1) -> EmbeddedGraph:
    """Grid plus one SE diagonal per unit square; all inner faces triangles."""
    if rows < 2 or cols < 2:
        raise ValueError("triangulated grid needs rows, cols >= 2")
    base = generate_grid(rows, cols, "unit", seed, denom)
    n = base.n

    def vid(r, c):
        return r * cols + c

    edge_u = list(base.edge_u)
    edge_v = list(base.edge_v)
    diag = {}
    for r in range(rows - 1):
        for c in range(cols - 1):
            diag[(r, c)] = len(edge_u)
            edge_u.append(vid(r, c))
            edge_v.append(vid(r + 1, c + 1))
    # diagonal points SE at (r,c): insert between E and S; at (r+1,c+1) it
    # points NW: insert between W and N (i.e. at the wrap position after W)
    rotation = [list(rot) for rot in base.rotation]
    for (r, c), eid in diag.items():
        rot = rotation[vid(r, c)]
        pos = rot.index(_grid_edge(base, vid(r, c), vid(r, c + 1)))  # E edge
        rot.insert(pos + 1, eid)
        rotation[vid(r + 1, c + 1)].append(eid)  # after W, wraps before N
    w = _draw_weights(weight_dist, len(edge_u), seed, denom)
    return EmbeddedGraph(n, np.array(edge_u), np.array(edge_v), w, denom, rotation, base.coords)


def _grid_edge(g: EmbeddedGraph, u: int, v: int) -> int:
    for eid in g.rotation[u]:
        if g.other_end(eid, u) == v:
            return eid
    raise KeyError((u, v))


# ---------------------------------------------------------------------------
# faces
# ---------------------------------------------------------------------------

def faces(graph: EmbeddedGraph, mask: Optional[np.ndarray] = None) -> list:
    """Face boundaries of the embedding as cyclic lists of directed slots.

    A directed slot is (v, eid) meaning the walk leaves v along eid. The
    successor of arriving at w via eid is the next edge after eid in w's
    clockwise rotation. Every directed slot lies on exactly one face.
    """
    if mask is None:
        mask = full_mask(graph)
    rot = {v: induced_rotation(graph, mask, v) for v in range(graph.n) if mask[v]}
    pos = {}
    for v, edges in rot.items():
        for k, eid in enumerate(edges):
            pos[(v, eid)] = k
    visited = set()
    out = []
    for v in sorted(rot):
        for eid in rot[v]:
            if (v, eid) in visited:
                continue
            face = []
            cv, ce = v, eid
            while (cv, ce) not in visited:
                visited.add((cv, ce))
                face.append((cv, ce))
                w = graph.other_end(ce, cv)
                k = pos[(w, ce)]
                nxt = rot[w][(k + 1) % len(rot[w])]
                cv, ce = w, nxt
            out.append(face)
    return out


def euler_face_check(graph: EmbeddedGraph) -> bool:
    """n - m + f = 2 for a connected embedded planar graph."""
    f = len(faces(graph)) if graph.m else 1
    return graph.n - graph.m + f == 2


# ---------------------------------------------------------------------------
# file I/O
# ---------------------------------------------------------------------------

def write_graph(graph: EmbeddedGraph, path) -> None:
    with open(path, "w") as fh:
        fh.write(f"p planar {graph.n} {graph.m} {graph.denom}\n")
        if graph.coords is not None:
            for v, (x, y) in enumerate(graph.coords):
                fh.write(f"v {v} {x:g} {y:g}\n")
        for eid in range(graph.m):
            fh.write(f"e {eid} {graph.edge_u[eid]} {graph.edge_v[eid]} {graph.weight_num[eid]}\n")
        for v in range(graph.n):
            fh.write("r " + " ".join(str(e) for e in [v] + list(graph.rotation[v])) + "\n")


def read_graph(path) -> EmbeddedGraph:
    n = m = denom = None
    coords = {}
    edges = {}
    rotation = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            try:
                if parts[0] == "p":
                    if parts[1] != "planar" or len(parts) != 5:
                        raise GraphFormatError(f"line {lineno}: malformed header")
                    n, m, denom = int(parts[2]), int(parts[3]), int(parts[4])
                elif parts[0] == "v":
                    coords[int(parts[1])] = (float(parts[2]), float(parts[3]))
                elif parts[0] == "e":
                    eid, u, v, w = (int(x) for x in parts[1:5])
                    edges[eid] = (u, v, w)
                elif parts[0] == "r":
                    rotation[int(parts[1])] = [int(x) for x in parts[2:]]
                else:
                    raise GraphFormatError(f"line {lineno}: unknown record {parts[0]!r}")
            except (IndexError, ValueError) as exc:
                if isinstance(exc, GraphFormatError):
                    raise
                raise GraphFormatError(f"line {lineno}: {exc}") from exc
    if n is None:
        raise GraphFormatError("missing 'p planar' header")
    if len(edges) != m:
        raise GraphFormatError(f"header promises {m} edges, file has {len(edges)}")
    edge_u = np.zeros(m, dtype=np.int32)
    edge_v = np.zeros(m, dtype=np.int32)
    wnum = np.zeros(m, dtype=np.int64)
    for eid, (u, v, w) in edges.items():
        if not (0 <= eid < m):
            raise GraphFormatError(f"edge id {eid} out of range")
        if not (0 <= u < n and 0 <= v < n):
            raise GraphFormatError(f"edge {eid}: unknown vertex")
        edge_u[eid], edge_v[eid], wnum[eid] = u, v, w
    rot = []
    incident = [[] for _ in range(n)]
    for eid in range(m):
        incident[edge_u[eid]].append(eid)
        incident[edge_v[eid]].append(eid)
    for v in range(n):
        if v not in rotation:
            raise GraphFormatError(f"rotation missing for vertex {v}")
        if sorted(rotation[v]) != sorted(incident[v]):
            raise GraphFormatError(f"rotation incomplete at {v}")
        rot.append(rotation[v])
    coord_list = None
    if coords:
        if sorted(coords) != list(range(n)):
            raise GraphFormatError("coordinate records must cover all vertices or none")
        coord_list = [coords[v] for v in range(n)]
    try:
        return EmbeddedGraph(n, edge_u, edge_v, wnum, denom, rot, coord_list)
    except ValueError as exc:
        raise GraphFormatError(str(exc)) from exc
