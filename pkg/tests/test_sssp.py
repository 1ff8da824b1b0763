from fractions import Fraction

import numpy as np
import pytest

from helpers import bellman_ford
from planroute.graph import EmbeddedGraph, generate_grid, generate_triangulated_grid
from planroute.sssp import SourceSpec, approx_sssp, exact_sssp, multi_source_groups


def path_graph(weights):
    n = len(weights) + 1
    eu = np.arange(n - 1)
    ev = np.arange(1, n)
    rot = [[i - 1, i] if 0 < i < n - 1 else ([0] if i == 0 else [n - 2])
           for i in range(n)]
    return EmbeddedGraph(n, eu, ev, np.array(weights), 1, rot)


def test_path_single_source():
    g = path_graph([2, 3])
    f = exact_sssp(g, None, SourceSpec.single(0))
    assert f.dist.tolist() == [0, 2, 5]
    assert int(f.parent[2]) == 1


def test_path_source_set():
    g = path_graph([2, 3])
    f = exact_sssp(g, None, SourceSpec.vertex_set([0, 2]))
    assert int(f.dist[1]) == 2
    assert int(f.root[1]) == 0


def test_source_outside_mask_rejected():
    g = path_graph([2, 3])
    mask = np.array([True, True, False])
    with pytest.raises(ValueError, match="outside the mask"):
        exact_sssp(g, mask, SourceSpec.single(2))


def test_against_bellman_ford_oracle():
    g = generate_triangulated_grid(5, 10, "uniform:1:8", seed=21)
    for src in (0, 17, 49):
        f = exact_sssp(g, None, SourceSpec.single(src))
        assert np.array_equal(f.dist, bellman_ford(g, src))


def test_masked_against_oracle():
    g = generate_triangulated_grid(6, 6, "uniform:1:4", seed=2)
    mask = np.zeros(g.n, dtype=bool)
    mask[:18] = True
    f = exact_sssp(g, mask, SourceSpec.single(0))
    assert np.array_equal(f.dist, bellman_ford(g, 0, mask))


def test_virtual_super_source():
    g = path_graph([1, 1, 1, 1])
    spec = SourceSpec.super_source([(0, 7), (4, 2)])
    f = exact_sssp(g, None, spec)
    # min over centers of virtual weight + graph distance
    assert f.dist.tolist() == [6, 5, 4, 3, 2]
    assert int(f.root[0]) == 4


def test_virtual_negative_weight_rejected():
    with pytest.raises(ValueError):
        SourceSpec.super_source([(0, -1)])


def test_eps_zero_any_mode_is_exact():
    g = generate_grid(6, 6, "uniform:1:8", seed=4)
    a = exact_sssp(g, None, SourceSpec.single(3))
    b = approx_sssp(g, None, SourceSpec.single(3), Fraction(0), "stretch-noise", seed=9)
    assert np.array_equal(a.dist, b.dist)
    assert np.array_equal(a.parent, b.parent)


def test_negative_eps_rejected():
    g = path_graph([1])
    with pytest.raises(ValueError):
        approx_sssp(g, None, SourceSpec.single(0), Fraction(-1, 2))


def test_noise_sandwich_and_consistency():
    g = generate_triangulated_grid(10, 10, "uniform:1:8", seed=3)
    ex = exact_sssp(g, None, SourceSpec.single(0))
    no = approx_sssp(g, None, SourceSpec.single(0), Fraction(1, 4),
                     "stretch-noise", seed=5)
    assert (no.dist >= ex.dist).all()
    assert all(4 * int(no.dist[v]) <= 5 * int(ex.dist[v]) for v in range(g.n))
    assert int((no.dist > ex.dist).sum()) > 0     # genuinely suboptimal somewhere
    no.check_tree_consistent(g)


def test_noise_exact_on_trees():
    g = path_graph([3, 1, 4, 1, 5])
    ex = exact_sssp(g, None, SourceSpec.single(0))
    no = approx_sssp(g, None, SourceSpec.single(0), Fraction(1, 4),
                     "stretch-noise", seed=5)
    assert np.array_equal(ex.dist, no.dist)       # unique paths on a tree


def test_permutation_invariance():
    g = generate_triangulated_grid(4, 5, "uniform:1:8", seed=6)
    perm = np.random.RandomState(0).permutation(g.n)
    inv = np.argsort(perm)
    h = EmbeddedGraph(g.n, perm[g.edge_u], perm[g.edge_v], g.weight_num.copy(),
                      g.denom, [list(g.rotation[int(inv[v])]) for v in range(g.n)])
    f = exact_sssp(g, None, SourceSpec.single(7))
    fh = exact_sssp(h, None, SourceSpec.single(int(perm[7])))
    assert np.array_equal(f.dist, fh.dist[perm])


def test_multi_source_groups_disjoint():
    g = generate_grid(12, 12)
    left = np.zeros(g.n, dtype=bool)
    right = np.zeros(g.n, dtype=bool)
    for r in range(12):
        for c in range(12):
            (left if c < 6 else right)[r * 12 + c] = True
    groups = [[SourceSpec.single(0), SourceSpec.single(61)],
              [SourceSpec.single(6), SourceSpec.single(60 + 7)]]
    out = multi_source_groups(g, [left, right], groups)
    assert len(out) == 2 and len(out[0]) == 2
    for mi, mask in enumerate([left, right]):
        for forest in out[mi]:
            reached = forest.reached()
            assert not reached[~mask].any()       # paths never leave the mask
            for v in np.flatnonzero(reached):
                p = int(forest.parent[v])
                assert p < 0 or mask[p]
            ref = exact_sssp(g, mask, SourceSpec.single(int(forest.root[
                np.flatnonzero(reached)[0]])))
            assert np.array_equal(forest.dist, ref.dist)


def test_multi_source_groups_overlap_rejected():
    g = generate_grid(3, 3)
    m = np.ones(g.n, dtype=bool)
    with pytest.raises(ValueError, match="overlap"):
        multi_source_groups(g, [m, m], [[SourceSpec.single(0)], [SourceSpec.single(1)]])


def test_truncated_forest_is_connected():
    g = generate_grid(9, 9)
    f = exact_sssp(g, None, SourceSpec.single(40), cutoff=3)
    reached = np.flatnonzero(f.reached())
    for v in reached:
        p = int(f.parent[v])
        assert p < 0 or f.dist[p] >= 0
    assert int(f.dist.max()) <= 3
