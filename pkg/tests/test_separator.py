import numpy as np
import pytest

from helpers import balanced_tree_path_exists, components_after_removal
from planroute import rng
from planroute.graph import (EmbeddedGraph, full_mask, generate_grid,
                             generate_triangulated_grid)
from planroute.separator import (SeparatorError, euler_tour, find_separator,
                                 separate_all)
from planroute.sssp import SourceSpec, exact_sssp


def star_k13():
    return EmbeddedGraph(4, np.array([0, 0, 0]), np.array([1, 2, 3]),
                         np.array([1, 1, 1]), 1, [[0, 1, 2], [0], [1], [2]])


def test_euler_tour_star():
    g = star_k13()
    f = exact_sssp(g, None, SourceSpec.single(0))
    tour = euler_tour(g, full_mask(g), f, 0)
    assert tour.length == 6                      # 3 edges x 2
    assert sum(tour.weights()) == 4              # weight conservation


def test_euler_tour_path():
    g = generate_grid(1, 4)
    f = exact_sssp(g, None, SourceSpec.single(0))
    tour = euler_tour(g, full_mask(g), f, 0)
    assert tour.length == 6
    assert sum(tour.weights()) == 4


def test_euler_tour_bfs_tree_grid():
    g = generate_triangulated_grid(4, 4)
    f = exact_sssp(g, None, SourceSpec.single(0))
    tour = euler_tour(g, full_mask(g), f, 0)
    assert sum(tour.weights()) == 16
    assert tour.length == 2 * (g.n - 1)
    # every (vertex, arrival-edge) replica appears exactly once
    assert len(set(tour.visits)) == tour.length


def test_path_graph_median_separator():
    g = generate_grid(1, 9)
    sep = separate_all(g, [full_mask(g)])[0]
    assert 4 in sep.vertices
    assert sep.max_component <= 6
    assert sep.balanced()


def test_tri_grid_from_corner():
    g = generate_triangulated_grid(3, 3)
    f = exact_sssp(g, None, SourceSpec.single(0))
    sep = find_separator(g, None, f)
    assert sep.max_component <= 6
    comps = components_after_removal(g, full_mask(g), sep.vertices)
    assert sorted(map(tuple, comps)) == sorted(tuple(c.tolist()) for c in sep.components)


def test_degenerate_regions():
    g = generate_grid(1, 2)
    f = exact_sssp(g, None, SourceSpec.single(0))
    sep = find_separator(g, None, f)
    assert sep.degenerate and sorted(sep.vertices) == [0, 1]


def test_path_is_tree_path_with_two_arms():
    g = generate_triangulated_grid(6, 7, "uniform:1:8", seed=3)
    f = exact_sssp(g, None, SourceSpec.single(0))
    sep = find_separator(g, None, f)
    assert len(sep.arms) == 2
    # each arm is a contiguous climb toward the lca in the SSSP tree
    for arm in sep.arms:
        for u, v in zip(arm, arm[1:]):
            assert int(f.parent[u]) == v
        assert arm[-1] == sep.lca
    assert sep.vertices[0] == sep.x and sep.vertices[-1] == sep.y
    # arm length equals the exact root-path distance difference (eps=0 tree)
    for end, arm in ((sep.x, sep.arms[0]), (sep.y, sep.arms[1])):
        length = sum(
            abs(int(f.dist[a]) - int(f.dist[b])) for a, b in zip(arm, arm[1:]))
        assert length == int(f.dist[end]) - int(f.dist[sep.lca])


def test_removal_correctness():
    g = generate_triangulated_grid(5, 8, "uniform:1:5", seed=11)
    f = exact_sssp(g, None, SourceSpec.single(0))
    sep = find_separator(g, None, f)
    covered = set(sep.vertices)
    for comp in sep.components:
        covered.update(int(v) for v in comp)
    assert covered == set(range(g.n))
    # components pairwise non-adjacent
    owner = {}
    for i, comp in enumerate(sep.components):
        for v in comp:
            owner[int(v)] = i
    for eid in range(g.m):
        u, v = int(g.edge_u[eid]), int(g.edge_v[eid])
        if u in owner and v in owner:
            assert owner[u] == owner[v]


@pytest.mark.parametrize("seed", range(12))
def test_spanning_tree_input_balanced(seed):
    # tree graphs: no chords at all, every corner external
    gen = rng.generator(seed, "tree")
    cols = int(gen.integers(5, 40))
    g = generate_grid(1, cols, "uniform:1:8", seed=seed)
    f = exact_sssp(g, None, SourceSpec.single(int(gen.integers(0, cols))))
    sep = find_separator(g, None, f)
    assert sep.balanced()
    assert balanced_tree_path_exists(g, full_mask(g), f)


@pytest.mark.parametrize("seed", range(15))
def test_random_instances_balanced_vs_oracle(seed):
    gen = rng.generator(seed, "inst")
    r = int(gen.integers(3, 7))
    c = int(gen.integers(3, 7))
    g = generate_triangulated_grid(r, c, "uniform:1:8", seed=seed)
    root = int(gen.integers(0, g.n))
    f = exact_sssp(g, None, SourceSpec.single(root))
    sep = find_separator(g, None, f)
    assert sep.balanced(), (r, c, seed, sep.max_component, sep.region_size)
    assert not sep.used_fallback
    assert balanced_tree_path_exists(g, full_mask(g), f)


def test_separate_all_quadrants():
    g = generate_grid(16, 16)
    masks = []
    for qr in range(2):
        for qc in range(2):
            m = np.zeros(g.n, dtype=bool)
            for r in range(8):
                for c in range(8):
                    m[(qr * 8 + r) * 16 + qc * 8 + c] = True
            masks.append(m)
    seps = separate_all(g, masks)
    assert len(seps) == 4
    for m, sep in zip(masks, seps):
        assert sep.balanced()
        assert all(m[v] for v in sep.vertices)


def test_separate_all_overlap_rejected():
    g = generate_grid(4, 4)
    m = full_mask(g)
    with pytest.raises(SeparatorError, match="overlap"):
        separate_all(g, [m, m])


def test_masked_region_separator():
    g = generate_triangulated_grid(8, 8, "uniform:1:4", seed=2)
    mask = np.zeros(g.n, dtype=bool)
    for r in range(8):
        for c in range(8):
            if r + c < 11:
                mask[r * 8 + c] = True
    root = int(np.flatnonzero(mask).min())
    f = exact_sssp(g, mask, SourceSpec.single(root))
    sep = find_separator(g, mask, f)
    assert sep.balanced()
    assert all(mask[v] for v in sep.vertices)
