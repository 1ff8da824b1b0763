"""Hierarchical tree covers and the assembled routing scheme.

Stage 1 builds L independent (eps/3, 2^i)-additive tree covers for every
distance class i up to d* = ceil(log2(n W)); levels whose class exceeds the
graph's weighted diameter serve no pair and are skipped. Stage 2's exact
per-tree tables and labels (treeroute) are concatenated per node; stage 3
selects, per query, the common tree minimizing the via-root distance bound
d(s, root) + d(root, t) read off the stored fields.
"""
from __future__ import annotations

import hashlib
import json
import math
import struct
import time
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np

from . import rng
from .cover import CoverParams, repeat_covers
from .graph import EmbeddedGraph
from .sssp import SourceSpec, exact_sssp
from .treeroute import TreeTables, build_tree_arrays

MAGIC = b"PRTS1"
VERSION = 1

NO_TREE = -1


def tree_id64(rep: int, level_exp: int, recursion: int, center: int, portal: int) -> int:
    payload = struct.pack("<iiiii", rep, level_exp, recursion, center, portal)
    return int.from_bytes(hashlib.blake2b(payload, digest_size=8).digest(), "little")


@dataclass
class HierarchyParams:
    d_star: int
    levels: list                 # kept distance-class exponents i (Delta_i = 2^i)
    eps_cover: Fraction          # eps/3
    repetitions: int

    @staticmethod
    def plan(graph: EmbeddedGraph, eps: Fraction, L: Optional[int]) -> "HierarchyParams":
        n = graph.n
        eps = Fraction(eps)
        if eps <= 0:
            raise ValueError("eps must be positive")
        w_max = max(graph.max_weight, 1)
        d_star = max(1, math.ceil(math.log2(n * w_max))) if n * w_max > 1 else 1
        if L is None:
            L = max(1, math.ceil(2 * math.log2(n))) if n > 1 else 1
        if n == 1:
            return HierarchyParams(d_star, [], eps / 3, L)
        ecc0 = _eccentricity(graph, 0)
        levels = [i for i in range(1, d_star + 1)
                  if Fraction(2) ** (i - 1) < 2 * ecc0]
        if not levels:
            levels = [1]
        return HierarchyParams(d_star, levels, eps / 3, L)


def _eccentricity(graph: EmbeddedGraph, v: int) -> Fraction:
    forest = exact_sssp(graph, None, SourceSpec.single(v))
    return Fraction(int(forest.dist.max()), graph.denom)


@dataclass
class SchemeTreeRecord:
    tid: int
    level: int
    rep: int
    tables: TreeTables


class Scheme:
    """Per-node routing tables and labels over all covers, array-backed."""

    def __init__(self, graph: EmbeddedGraph, eps: Fraction, hierarchy: HierarchyParams,
                 seed: int, records: list, diagnostics: dict):
        self.n = graph.n
        self.denom = graph.denom
        self.eps = Fraction(eps)
        self.hierarchy = hierarchy
        self.seed = seed
        self.records = records
        self.diagnostics = diagnostics
        self._build_node_index()

    def _build_node_index(self):
        total = sum(len(rec.tables.members) for rec in self.records)
        verts = np.empty(total, dtype=np.int64)
        tids = np.empty(total, dtype=np.uint64)
        trees = np.empty(total, dtype=np.int32)
        poss = np.empty(total, dtype=np.int32)
        off = 0
        for ti, rec in enumerate(self.records):
            k = len(rec.tables.members)
            verts[off:off + k] = rec.tables.members
            tids[off:off + k] = rec.tid
            trees[off:off + k] = ti
            poss[off:off + k] = np.arange(k, dtype=np.int32)
            off += k
        order = np.lexsort((tids, verts))
        self.entry_tid = tids[order]
        self.entry_tree = trees[order]
        self.entry_pos = poss[order]
        counts = np.bincount(verts, minlength=self.n + 1)
        self.node_indptr = np.concatenate([[0], np.cumsum(counts[:self.n])]).astype(np.int64)

    # -- query-side views ---------------------------------------------------

    def node_slice(self, v: int):
        return int(self.node_indptr[v]), int(self.node_indptr[v + 1])

    def tree_count(self, v: int) -> int:
        lo, hi = self.node_slice(v)
        return hi - lo

    def entry_of(self, v: int, tid: int):
        lo, hi = self.node_slice(v)
        tids = self.entry_tid[lo:hi]
        i = int(np.searchsorted(tids, np.uint64(tid)))
        if i >= len(tids) or int(tids[i]) != tid:
            return None
        return int(self.entry_tree[lo + i]), int(self.entry_pos[lo + i])

    def select_tree(self, s: int, t: int):
        """Common tree with the least d(s,root)+d(root,t) bound, ties to
        the smaller tree id. Returns (tid, bound numerator) or NO_TREE."""
        lo_s, hi_s = self.node_slice(s)
        lo_t, hi_t = self.node_slice(t)
        ts, tt = self.entry_tid[lo_s:hi_s], self.entry_tid[lo_t:hi_t]
        i = j = 0
        best = None
        while i < len(ts) and j < len(tt):
            a, b = int(ts[i]), int(tt[j])
            if a == b:
                rec_s = self.records[int(self.entry_tree[lo_s + i])]
                ds = int(rec_s.tables.dist[int(self.entry_pos[lo_s + i])])
                dt = int(rec_s.tables.dist[int(self.entry_pos[lo_t + j])])
                bound = ds + dt
                if best is None or bound < best[1] or (bound == best[1] and a < best[0]):
                    best = (a, bound)
                i += 1
                j += 1
            elif a < b:
                i += 1
            else:
                j += 1
        if best is None:
            return NO_TREE, None
        return best

    def next_hop(self, v: int, tid: int, t: int):
        """Hop decision inside tree tid using v's table and t's label fields."""
        from .treeroute import DELIVERED, RoutingContractError

        ev = self.entry_of(v, tid)
        et = self.entry_of(t, tid)
        if ev is None:
            raise RoutingContractError(f"{v} has no table for tree {tid}")
        if et is None:
            raise RoutingContractError(f"{t} has no label for tree {tid}")
        ti, pv = ev
        _, pt = et
        tt = self.records[ti].tables
        at = int(tt.a[pt])
        av, bv = int(tt.a[pv]), int(tt.b[pv])
        if at == av:
            return DELIVERED
        if at < av or at > bv:
            p = int(tt.parent[pv])
            if p < 0:
                raise RoutingContractError("target entry outside the root interval")
            return p
        for w in tt.light_list(pt):
            w = int(w)
            pw = tt.pos(w)
            if pw >= 0 and int(tt.parent[pw]) == v:
                return w
        h = int(tt.heavy[pv])
        if h < 0:
            raise RoutingContractError("descend step at a leaf")
        return h

    def label_dist(self, v: int, tid: int) -> int:
        ti, pos = self.entry_of(v, tid)
        return int(self.records[ti].tables.dist[pos])


def build_scheme(graph: EmbeddedGraph, eps, L: Optional[int] = None, seed: int = 0,
                 mode: str = "exact", c_pd: Optional[int] = None) -> Scheme:
    """Full scheme: hierarchical covers, per-tree tables, per-node assembly."""
    t0 = time.time()
    eps = Fraction(eps)
    hier = HierarchyParams.plan(graph, eps, L)
    records: list = []
    by_tid = {}
    sep_records = []
    cover_diag = []
    for i in hier.levels:
        delta = Fraction(2) ** i
        params = CoverParams.defaults(graph.n, delta, hier.eps_cover, c_pd=c_pd)
        covers = repeat_covers(graph, params, hier.repetitions,
                               rng.derive(seed, "level", i), mode=mode)
        for cover in covers:
            sep_records.extend(
                dict(rec, delta_exp=i, rep=cover.repetition)
                for rec in cover.diagnostics["separators"])
            cover_diag.append({
                "level_exp": i, "rep": cover.repetition,
                "trees": len(cover.trees),
                "recursions": cover.diagnostics["levels"],
                "max_trees_per_vertex_per_level":
                    cover.diagnostics["max_trees_per_vertex_per_level"],
            })
            for tree in cover.trees:
                rep, lvl, center, portal = tree.tid
                tid = tree_id64(rep, i, lvl, center, portal)
                if tid in by_tid:
                    raise RuntimeError(f"tree id collision on {tid}")
                by_tid[tid] = True
                records.append(SchemeTreeRecord(tid, i, rep, build_tree_arrays(tree)))
    diagnostics = {
        "levels_kept": hier.levels,
        "d_star": hier.d_star,
        "repetitions": hier.repetitions,
        "tree_count": len(records),
        "covers": cover_diag,
        "separators": sep_records,
        "build_seconds": None,
    }
    scheme = Scheme(graph, eps, hier, seed, records, diagnostics)
    diagnostics["build_seconds"] = time.time() - t0
    counts = np.diff(scheme.node_indptr)
    diagnostics["trees_per_node_max"] = int(counts.max(initial=0))
    diagnostics["trees_per_node_mean"] = float(counts.mean()) if scheme.n else 0.0
    if scheme.n:
        hist, edges = np.histogram(counts, bins=10)
        diagnostics["trees_per_node_hist"] = {
            "counts": hist.tolist(), "edges": [float(e) for e in edges]}
    return scheme


# ---------------------------------------------------------------------------
# size accounting
# ---------------------------------------------------------------------------

def _id_bits(n: int) -> int:
    return max(1, (max(2, n) - 1).bit_length())


def measure_sizes(scheme: Scheme) -> dict:
    """Bit sizes of every node's label and table under fixed-width fields."""
    idb = _id_bits(scheme.n)
    max_d = max((int(r.tables.dist.max()) for r in scheme.records), default=1)
    db = max(1, max_d.bit_length()) + 1
    label_bits = np.zeros(scheme.n, dtype=np.int64)
    table_bits = np.zeros(scheme.n, dtype=np.int64)
    tree_count = np.zeros(scheme.n, dtype=np.int64)
    for rec in scheme.records:
        tt = rec.tables
        nlight = np.diff(tt.light_indptr)
        for i, v in enumerate(tt.members):
            label_bits[v] += 64 + 2 * idb + db + int(nlight[i]) * idb
            table_bits[v] += 64 + 5 * idb + db
            tree_count[v] += 1
    return {
        "n": scheme.n,
        "id_bits": idb,
        "dist_bits": db,
        "label_bits_max": int(label_bits.max(initial=0)),
        "label_bits_mean": float(label_bits.mean()) if scheme.n else 0.0,
        "table_bits_max": int(table_bits.max(initial=0)),
        "table_bits_mean": float(table_bits.mean()) if scheme.n else 0.0,
        "trees_per_node_max": int(tree_count.max(initial=0)),
        "trees_per_node_mean": float(tree_count.mean()) if scheme.n else 0.0,
    }


# ---------------------------------------------------------------------------
# serialization: per-node little-endian records + JSON sidecar
# ---------------------------------------------------------------------------

def serialize_scheme(scheme: Scheme) -> bytes:
    out = bytearray()
    out += MAGIC
    out += struct.pack("<HIQ", VERSION, scheme.n, scheme.denom)
    out += struct.pack("<qqQ", scheme.eps.numerator, scheme.eps.denominator,
                       scheme.seed & 0xFFFFFFFFFFFFFFFF)
    children_of: list = []
    for rec in scheme.records:
        tt = rec.tables
        cmap: dict = {}
        for c in range(len(tt.members)):
            p = int(tt.parent[c])
            if p >= 0:
                cmap.setdefault(p, []).append(int(tt.members[c]))
        children_of.append(cmap)
    for v in range(scheme.n):
        lo, hi = scheme.node_slice(v)
        out += struct.pack("<II", v, hi - lo)
        for k in range(lo, hi):
            tid = int(scheme.entry_tid[k])
            ti = int(scheme.entry_tree[k])
            pos = int(scheme.entry_pos[k])
            tt = scheme.records[ti].tables
            children = children_of[ti].get(v, [])
            light = [int(x) for x in tt.light_list(pos)]
            out += struct.pack("<QIiiIIq", tid, tt.root, int(tt.parent[pos]),
                               int(tt.heavy[pos]), int(tt.a[pos]), int(tt.b[pos]),
                               int(tt.dist[pos]))
            out += struct.pack("<H", len(light))
            out += struct.pack(f"<{len(light)}I", *light) if light else b""
            out += struct.pack("<H", len(children))
            out += struct.pack(f"<{len(children)}I", *children) if children else b""
    return bytes(out)


def sidecar_json(scheme: Scheme, config: dict) -> str:
    doc = {
        "format": MAGIC.decode(),
        "version": VERSION,
        "n": scheme.n,
        "denom": scheme.denom,
        "eps": str(scheme.eps),
        "seed": scheme.seed,
        "levels": scheme.hierarchy.levels,
        "d_star": scheme.hierarchy.d_star,
        "repetitions": scheme.hierarchy.repetitions,
        "tree_count": len(scheme.records),
        "config": config,
    }
    return json.dumps(doc, indent=2, sort_keys=True)


class LoadedScheme:
    """Routing view reconstructed from a serialized scheme file."""

    def __init__(self, n: int, denom: int, eps: Fraction, seed: int, nodes: dict):
        self.n = n
        self.denom = denom
        self.eps = eps
        self.seed = seed
        self.nodes = nodes     # v -> {tid: entry dict}

    def node_tids(self, v: int):
        return sorted(self.nodes.get(v, {}))

    def select_tree(self, s: int, t: int):
        es, et = self.nodes.get(s, {}), self.nodes.get(t, {})
        best = None
        for tid in sorted(set(es) & set(et)):
            bound = es[tid]["d"] + et[tid]["d"]
            if best is None or bound < best[1] or (bound == best[1] and tid < best[0]):
                best = (tid, bound)
        return best if best else (NO_TREE, None)

    def next_hop(self, v: int, tid: int, t: int):
        from .treeroute import DELIVERED, RoutingContractError

        ev = self.nodes.get(v, {}).get(tid)
        et = self.nodes.get(t, {}).get(tid)
        if ev is None or et is None:
            raise RoutingContractError(f"missing table or label for tree {tid}")
        at = et["a"]
        if at == ev["a"]:
            return DELIVERED
        if at < ev["a"] or at > ev["b"]:
            if ev["p"] < 0:
                raise RoutingContractError("target entry outside the root interval")
            return ev["p"]
        for w in et["light"]:
            if w in ev["children"]:
                return w
        if ev["h"] < 0:
            raise RoutingContractError("descend step at a leaf")
        return ev["h"]

    def label_dist(self, v: int, tid: int) -> int:
        return self.nodes[v][tid]["d"]

    def tree_count(self, v: int) -> int:
        return len(self.nodes.get(v, {}))


def deserialize_scheme(blob: bytes) -> LoadedScheme:
    if blob[:5] != MAGIC:
        raise ValueError("bad magic; not a scheme file")
    off = 5
    version, n, denom = struct.unpack_from("<HIQ", blob, off)
    off += struct.calcsize("<HIQ")
    if version != VERSION:
        raise ValueError(f"unsupported scheme version {version}")
    ep, eq, seed = struct.unpack_from("<qqQ", blob, off)
    off += struct.calcsize("<qqQ")
    nodes: dict = {}
    for _ in range(n):
        v, cnt = struct.unpack_from("<II", blob, off)
        off += 8
        entries = {}
        for _ in range(cnt):
            tid, root, p, h, a, b, d = struct.unpack_from("<QIiiIIq", blob, off)
            off += struct.calcsize("<QIiiIIq")
            (nl,) = struct.unpack_from("<H", blob, off)
            off += 2
            light = list(struct.unpack_from(f"<{nl}I", blob, off)) if nl else []
            off += 4 * nl
            (nc,) = struct.unpack_from("<H", blob, off)
            off += 2
            children = set(struct.unpack_from(f"<{nc}I", blob, off)) if nc else set()
            off += 4 * nc
            entries[tid] = {"r": root, "p": p, "h": h, "a": a, "b": b, "d": d,
                            "light": light, "children": children}
        nodes[v] = entries
    return LoadedScheme(n, denom, Fraction(ep, eq), seed, nodes)
