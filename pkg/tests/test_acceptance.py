"""Acceptance suite: one test per criterion, each printing a PASS line with
its measured value and runtime. Tolerances are pinned here, not configurable.

Run with `pytest tests/test_acceptance.py -v -s` to watch the lines appear.
"""
import math
import time
from fractions import Fraction

import numpy as np
import pytest

from helpers import random_cover_tree
from planroute import rng
from planroute.checks import (check_coverage, check_diameter, check_padding,
                              check_sampler)
from planroute.decompose import CenterSet, packing_bound
from planroute.graph import full_mask, generate_grid, generate_triangulated_grid
from planroute.scheme import build_scheme, measure_sizes, serialize_scheme
from planroute.separator import find_separator
from planroute.simulate import evaluate
from planroute.sssp import SourceSpec, exact_sssp
from planroute.treeroute import build_tree_tables, tree_route


def report(criterion, passed, detail, t0):
    line = f"[criterion {criterion}] {'PASS' if passed else 'FAIL'} {detail} ({time.time() - t0:.1f}s)"
    print(line, flush=True)
    assert passed, line


@pytest.fixture(scope="session")
def scheme_16():
    g = generate_grid(16, 16)
    return g, build_scheme(g, Fraction(1, 2), seed=161616)


@pytest.fixture(scope="session")
def scheme_32():
    g = generate_grid(32, 32)
    return g, build_scheme(g, Fraction(1, 2), seed=323232)


def test_criterion_1_tree_routing_exactness():
    t0 = time.time()
    failures = 0
    pairs = 0
    for i in range(500):
        gen = rng.generator(1000 + i, "ctree")
        tree = random_cover_tree(gen, 64)
        tables, labels = build_tree_tables(tree)
        members = [int(v) for v in tree.members]
        # oracle root paths computed once per tree
        root_path = {}
        for v in members:
            rp = [v]
            while int(tree.parent[tree.pos(rp[-1])]) >= 0:
                rp.append(int(tree.parent[tree.pos(rp[-1])]))
            root_path[v] = rp
        for s in members:
            idx_s = {v: k for k, v in enumerate(root_path[s])}
            for t in members:
                pairs += 1
                expected = None
                for j, v in enumerate(root_path[t]):
                    if v in idx_s:
                        expected = root_path[s][:idx_s[v]] + root_path[t][:j + 1][::-1]
                        break
                got = tree_route(tables, s, labels[t])
                if got != expected:
                    failures += 1
    report(1, failures == 0,
           f"tree routing exact on {pairs} ordered pairs over 500 trees, "
           f"{failures} mismatches", t0)


def _stretch_criterion(graph, scheme, pairs, seed):
    sink = []
    rep = evaluate(scheme, graph, count=pairs, seed=seed, trace_sink=sink)
    within = sum(1 for tr in sink if tr.failure is None
                 and 2 * tr.routed_num <= 3 * tr.exact_num)
    floor_ok = all(tr.routed_num >= tr.exact_num
                   for tr in sink if tr.failure is None)
    midroute = sum(1 for tr in sink if tr.failure and tr.failure != "NO_TREE")
    return within, floor_ok, rep.failures, midroute


def test_criterion_2_stretch(scheme_16, scheme_32):
    t0 = time.time()
    msgs = []
    passed = True
    for (g, sch), label in ((scheme_16, "16x16"), (scheme_32, "32x32")):
        within, floor_ok, failures, midroute = _stretch_criterion(g, sch, 2000, 777)
        ok = within >= 0.99 * 2000 and floor_ok and midroute == 0
        passed &= ok
        msgs.append(f"{label}: {within}/2000 within 1.5, floor_exact={floor_ok}, "
                    f"failures={failures}, midroute={midroute}")
    report(2, passed, "; ".join(msgs), t0)


def test_criterion_3_strong_diameter():
    t0 = time.time()
    configs = [
        (generate_grid(16, 16), Fraction(4), "grid16"),
        (generate_triangulated_grid(12, 12, "uniform:1:8", seed=5), Fraction(6), "tri12w"),
        (generate_grid(24, 24), Fraction(8), "grid24"),
    ]
    violations = 0
    runs = 0
    for g, delta, label in configs:
        centers = CenterSet.all_of(full_mask(g))
        seeds = [rng.derive(3000, label, k) for k in range(50)]
        for r in check_diameter(g, centers, delta, Fraction(0), seeds, label=label):
            runs += 1
            if not r.passed or r.details["covering_violations"]:
                violations += 1
    report(3, violations == 0,
           f"{runs} decompose runs, every cluster diameter <= 4*Delta, "
           f"{violations} violations", t0)


def test_criterion_4_separator_balance(scheme_16, scheme_32):
    t0 = time.time()
    bad = 0
    count = 0
    gen = rng.generator(4000, "inst")
    while count < 100:
        r = int(gen.integers(3, 46))
        c = int(gen.integers(3, 46))
        if not (9 <= r * c <= 2000):
            continue
        count += 1
        g = generate_triangulated_grid(r, c, "uniform:1:8", seed=int(gen.integers(0, 2**31)))
        root = int(gen.integers(0, g.n))
        forest = exact_sssp(g, None, SourceSpec.single(root))
        sep = find_separator(g, None, forest)
        arms = sum(1 for a in sep.arms if len(a) > 1)
        if not sep.balanced() or arms > 2 or sep.used_fallback:
            bad += 1
    level_records = 0
    for (_, sch) in (scheme_16, scheme_32):
        for rec in sch.diagnostics["separators"]:
            level_records += 1
            if not rec["balanced"] or rec["arms"] > 2:
                bad += 1
    report(4, bad == 0,
           f"100 random instances + {level_records} recursion-level separators, "
           f"{bad} unbalanced", t0)


def test_criterion_5_coverage():
    t0 = time.time()
    g = generate_grid(14, 14)
    L = math.ceil(2 * math.log2(196))
    res = check_coverage(g, Fraction(8), Fraction(1, 2), L=L, seed=5555,
                         label="grid14")
    report(5, res.passed,
           f"14x14 exhaustive: {res.details['failed']}/{res.details['eligible_pairs']} "
           f"pairs uncovered (budget 1%), L={L}", t0)


def test_criterion_6_sampler_fidelity():
    t0 = time.time()
    results = check_sampler([1.0, 2 + 2 * math.log(8), 10.0],
                            count=100_000, seed=6666)
    ks = [r for r in results if r.name == "sampler_ks"]
    worst = max(r.value for r in ks)
    report(6, all(r.passed for r in ks),
           f"K-S max {worst:.4f} < 0.02 for lambdas {{1, 2+2ln8, 10}}", t0)


def test_criterion_7_padding():
    t0 = time.time()
    g = generate_grid(24, 24)
    centers = CenterSet(np.array(
        [r * 24 + c for r in range(4, 24, 8) for c in range(4, 24, 8)],
        dtype=np.int32), 9)
    tau = packing_bound(g, full_mask(g), centers, Fraction(8))
    assert tau <= 16
    centers = CenterSet(centers.vertices, tau)
    res = check_padding(g, centers, Fraction(8), Fraction(1, 32),
                        trials=400, seed=7777, label="grid24net")
    report(7, res.passed,
           f"preserved-ball frequency {res.value:.4f} >= "
           f"{res.bound:.5f} (= 0.5 e^(-64 gamma ln tau), tau={tau})", t0)


def test_criterion_8_size_growth(scheme_16, scheme_32):
    t0 = time.time()
    g8 = generate_grid(8, 8)
    s8 = build_scheme(g8, Fraction(1, 2), seed=888)
    sizes = {64: measure_sizes(s8),
             256: measure_sizes(scheme_16[1]),
             1024: measure_sizes(scheme_32[1])}
    passed = True
    msgs = []
    for a, b in ((64, 256), (256, 1024)):
        allowed = 1.0
        n = a
        while n < b:
            allowed *= (math.log2(2 * n) / math.log2(n)) ** 5 * 1.5
            n *= 2
        ratio = sizes[b]["label_bits_max"] / sizes[a]["label_bits_max"]
        passed &= ratio <= allowed
        msgs.append(f"n={a}->{b}: label-bit ratio {ratio:.2f} <= {allowed:.2f}")
    g12 = generate_grid(12, 12)
    t_half = build_scheme(g12, Fraction(1, 4), L=6, seed=88)
    t_full = build_scheme(g12, Fraction(1, 2), L=6, seed=88)
    m_half = measure_sizes(t_half)["trees_per_node_max"]
    m_full = measure_sizes(t_full)["trees_per_node_max"]
    ratio = m_half / m_full
    passed &= ratio <= 2 * 1.5
    msgs.append(f"eps 1/2->1/4: trees/node ratio {ratio:.2f} <= 3.0")
    report(8, passed, "; ".join(msgs), t0)


def test_criterion_9_determinism():
    t0 = time.time()
    g = generate_grid(8, 8)
    blob1 = serialize_scheme(build_scheme(g, Fraction(1, 2), seed=99))
    blob2 = serialize_scheme(build_scheme(g, Fraction(1, 2), seed=99))
    report(9, blob1 == blob2,
           f"two builds serialize to identical {len(blob1)} bytes", t0)
