"""Pseudo-padded decomposition around a center set.

One super-source SSSP drives the whole construction: every center x gets a
random offset delta_x = Delta * Texp(2 + 2 ln tau) and a virtual edge of
weight Delta - delta_x from a virtual source s; the cluster of a vertex is
the first real vertex (a center) on its tree path to s. Offsets live on a
2^16-fine integer grid so all comparisons stay exact.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np

from . import rng
from .graph import EmbeddedGraph, full_mask
from .sssp import SourceSpec, approx_sssp, exact_sssp

OFFSET_SCALE = 1 << 16


@dataclass(frozen=True)
class TruncExpParams:
    lam: float            # shape, > 0
    delta: Fraction       # scale Delta, > 0

    def __post_init__(self):
        if self.lam <= 0:
            raise ValueError("lambda must be positive")
        if self.delta <= 0:
            raise ValueError("delta must be positive")


def texp_pdf(x, lam: float):
    x = np.asarray(x, dtype=np.float64)
    return np.where((x >= 0) & (x <= 1), lam * np.exp(-x * lam) / (1 - math.exp(-lam)), 0.0)


def texp_cdf(x, lam: float):
    x = np.clip(np.asarray(x, dtype=np.float64), 0.0, 1.0)
    return (1 - np.exp(-lam * x)) / (1 - math.exp(-lam))


def texp_inv_cdf(u, lam: float):
    u = np.asarray(u, dtype=np.float64)
    return -np.log1p(-u * (1 - math.exp(-lam))) / lam


def texp_mean(lam: float) -> float:
    return 1.0 / lam - math.exp(-lam) / (1 - math.exp(-lam))


def sample_texp(params: TruncExpParams, seed: int, ident: int = 0) -> float:
    """One draw of Delta * Texp(lambda) by inverse-CDF sampling."""
    u = rng.uniform_at(rng.derive(seed, "texp"), ident)
    return float(texp_inv_cdf(u, params.lam)) * float(params.delta)


def sample_texp_many(params: TruncExpParams, seed: int, count: int) -> np.ndarray:
    u = rng.uniforms_at(rng.derive(seed, "texp"), np.arange(count, dtype=np.uint64))
    return texp_inv_cdf(u, params.lam) * float(params.delta)


@dataclass
class CenterSet:
    vertices: np.ndarray               # int32, sorted
    tau: int                           # packing bound used for lambda

    def __post_init__(self):
        self.vertices = np.asarray(np.sort(self.vertices), dtype=np.int32)
        if self.tau < 1:
            raise ValueError("tau must be >= 1")

    @staticmethod
    def all_of(mask: np.ndarray) -> "CenterSet":
        vs = np.flatnonzero(mask).astype(np.int32)
        return CenterSet(vs, max(1, len(vs)))


def covering_radius_ok(graph: EmbeddedGraph, mask: np.ndarray, centers: CenterSet,
                       delta: Fraction) -> bool:
    """Every masked vertex within Delta of some center."""
    cutoff = _num(delta, graph.denom)
    forest = exact_sssp(graph, mask, SourceSpec.vertex_set(centers.vertices), cutoff=cutoff)
    return bool(forest.reached()[mask].all())


def packing_bound(graph: EmbeddedGraph, mask: np.ndarray, centers: CenterSet,
                  delta: Fraction, eps: Fraction = Fraction(0)) -> int:
    """Brute-force tau: max number of centers within (3+eps)*Delta of any vertex."""
    cutoff = _floor_num((3 + Fraction(eps)) * delta, graph.denom)
    counts = np.zeros(graph.n, dtype=np.int64)
    for c in centers.vertices:
        forest = exact_sssp(graph, mask, SourceSpec.single(int(c)), cutoff=cutoff)
        counts += forest.reached()
    return int(counts.max(initial=0))


def _num(x: Fraction, denom: int) -> int:
    v = Fraction(x) * denom
    if v.denominator != 1:
        raise ValueError(f"{x} is not representable on the 1/{denom} weight grid")
    return int(v)


def _floor_num(x: Fraction, denom: int) -> int:
    return int(Fraction(x) * denom)  # Fraction -> int truncates toward zero; x >= 0 here


@dataclass
class Partition:
    cluster_of: np.ndarray        # int32 center id per vertex, -1 outside mask
    parent: np.ndarray            # int32 within-cluster tree parent, -1 at centers
    dist_scaled: np.ndarray       # int64 distance to own center, offset grid units
    scale: int                    # numerator scale: graph.denom * OFFSET_SCALE
    centers: np.ndarray           # int32 active centers, sorted
    offsets_scaled: np.ndarray    # int64 offsets of active centers (same order)
    delta: Fraction
    eps: Fraction
    tau: int
    lam: float
    seed: int
    covering_violations: list = field(default_factory=list)
    _members: Optional[dict] = field(default=None, repr=False)

    def clusters(self) -> dict:
        if self._members is None:
            members = {int(c): [] for c in self.centers}
            for v in np.flatnonzero(self.cluster_of >= 0):
                members[int(self.cluster_of[v])].append(int(v))
            self._members = {c: np.array(vs, dtype=np.int32) for c, vs in members.items()}
        return self._members

    def dist_to_center(self, v: int) -> Fraction:
        return Fraction(int(self.dist_scaled[v]), self.scale)


def decompose(graph: EmbeddedGraph, mask: Optional[np.ndarray], centers: CenterSet,
              delta: Fraction, eps: Fraction = Fraction(0), seed: int = 0,
              mode: str = "exact") -> Partition:
    """Cluster the masked region around the given centers.

    Requires the covering property (every masked vertex within Delta of a
    center); a violation is recorded on the result, never silently dropped.
    """
    if mask is None:
        mask = full_mask(graph)
    delta = Fraction(delta)
    eps = Fraction(eps)
    tau = centers.tau
    lam = 2.0 + 2.0 * math.log(tau)

    scale = OFFSET_SCALE
    delta_scaled = _num(delta, graph.denom) * scale
    ids = centers.vertices.astype(np.uint64)
    u = rng.uniforms_at(rng.derive(seed, "texp"), ids)
    x = texp_inv_cdf(u, lam)
    offsets = np.minimum((x * delta_scaled).astype(np.int64), delta_scaled)
    virtual_w = delta_scaled - offsets

    spec = SourceSpec.super_source(list(zip(centers.vertices.tolist(), virtual_w.tolist())))
    forest = approx_sssp(graph, mask, spec, eps, mode,
                         seed=rng.derive(seed, "sssp"), scale=scale)

    n = graph.n
    cluster_of = np.where(mask, forest.root, -1).astype(np.int32)
    parent = np.where(mask, forest.parent, -1).astype(np.int32)

    off_by_center = dict(zip(centers.vertices.tolist(), offsets.tolist()))
    dist_scaled = np.full(n, -1, dtype=np.int64)
    violations = []
    bound = 2 * delta_scaled * (eps.numerator + eps.denominator)
    for v in np.flatnonzero(mask):
        v = int(v)
        c = int(cluster_of[v])
        if c < 0:
            violations.append((v, None))
            continue
        d = int(forest.dist[v]) - (delta_scaled - off_by_center[c])
        dist_scaled[v] = d
        if d * eps.denominator > bound:
            violations.append((v, c))

    active = np.unique(cluster_of[cluster_of >= 0]).astype(np.int32)
    act_off = np.array([off_by_center[int(c)] for c in active], dtype=np.int64)
    return Partition(cluster_of, parent, dist_scaled, graph.denom * scale,
                     active, act_off, delta, eps, tau, lam, seed, violations)


def assignment_argmin_sets(graph: EmbeddedGraph, mask: np.ndarray, centers: CenterSet,
                           partition: Partition):
    """Brute-force eps=0 assignment oracle.

    Returns per-vertex (min key, set of centers achieving it) for the key
    (Delta - delta_x) + d_G(x, v). With exact distances the decomposition
    must assign every vertex to one of the argmin centers; ties between
    centers at equal key fall to the tree's (length, last-hop) rule, so the
    oracle checks membership rather than a unique winner.
    """
    scale = partition.scale // graph.denom
    delta_scaled = _num(partition.delta, graph.denom) * scale
    off = dict(zip(partition.centers.tolist(), partition.offsets_scaled.tolist()))
    u = rng.uniforms_at(rng.derive(partition.seed, "texp"),
                        centers.vertices.astype(np.uint64))
    x = texp_inv_cdf(u, partition.lam)
    all_off = np.minimum((x * delta_scaled).astype(np.int64), delta_scaled)
    for c, o in zip(centers.vertices.tolist(), all_off.tolist()):
        if c in off:
            assert off[c] == o, "offset recomputation must be reproducible"
    best = np.full(graph.n, -1, dtype=np.int64)
    argmins: list = [set() for _ in range(graph.n)]
    for c, o in zip(centers.vertices.tolist(), all_off.tolist()):
        forest = exact_sssp(graph, mask, SourceSpec.single(int(c)), scale=scale)
        key = delta_scaled - o + forest.dist
        for v in np.flatnonzero(mask & forest.reached()):
            if best[v] < 0 or key[v] < best[v]:
                best[v] = key[v]
                argmins[v] = {int(c)}
            elif key[v] == best[v]:
                argmins[v].add(int(c))
    return best, argmins


@dataclass
class PaddingEstimate:
    gamma: Fraction
    delta: Fraction
    eps: Fraction
    trials: int
    preserved: np.ndarray        # int64 per-vertex preserved-ball counts
    in_region: np.ndarray        # bool
    seed: int

    @property
    def per_vertex(self) -> np.ndarray:
        freq = np.zeros(len(self.preserved), dtype=np.float64)
        freq[self.in_region] = self.preserved[self.in_region] / self.trials
        return freq

    @property
    def aggregate(self) -> float:
        k = int(self.in_region.sum())
        return float(self.preserved[self.in_region].sum()) / (k * self.trials)

    def wilson(self, z: float = 1.96) -> tuple:
        k = int(self.in_region.sum()) * self.trials
        return wilson_interval(float(self.preserved[self.in_region].sum()), k, z)

    def to_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("vertex,frequency,ci_low,ci_high\n")
            for v in np.flatnonzero(self.in_region):
                p, t = float(self.preserved[v]), self.trials
                lo, hi = wilson_interval(p, t)
                fh.write(f"{v},{p / t:.6f},{lo:.6f},{hi:.6f}\n")


def wilson_interval(successes: float, total: int, z: float = 1.96) -> tuple:
    if total == 0:
        return (0.0, 1.0)
    phat = successes / total
    denom = 1 + z * z / total
    center = (phat + z * z / (2 * total)) / denom
    half = z * math.sqrt(phat * (1 - phat) / total + z * z / (4 * total * total)) / denom
    return (max(0.0, center - half), min(1.0, center + half))


def estimate_padding(graph: EmbeddedGraph, centers: CenterSet, delta: Fraction,
                     eps: Fraction, gamma: Fraction, trials: int, seed: int,
                     mask: Optional[np.ndarray] = None, mode: str = "exact") -> PaddingEstimate:
    """Monte-Carlo frequency of B(v, gamma*Delta) landing inside v's cluster."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    gamma = Fraction(gamma)
    if gamma > Fraction(1, 16):
        raise ValueError("gamma must be at most 1/16")
    if mask is None:
        mask = full_mask(graph)
    delta = Fraction(delta)
    cutoff = _floor_num(gamma * delta, graph.denom)
    balls = []
    for v in range(graph.n):
        if not mask[v]:
            balls.append(None)
            continue
        forest = exact_sssp(graph, mask, SourceSpec.single(v), cutoff=cutoff)
        balls.append(np.flatnonzero(forest.reached()))
    preserved = np.zeros(graph.n, dtype=np.int64)
    for t in range(trials):
        part = decompose(graph, mask, centers, delta, eps,
                         seed=rng.derive(seed, "trial", t), mode=mode)
        cl = part.cluster_of
        for v in np.flatnonzero(mask):
            ball = balls[v]
            if (cl[ball] == cl[v]).all():
                preserved[v] += 1
    return PaddingEstimate(gamma, delta, eps, trials, preserved, mask.copy(), seed)
