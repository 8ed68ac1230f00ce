import itertools

import numpy as np
import pytest

import brute
from discopt.exceptions import DomainError, InfeasibleError
from discopt.matching_engine import (Matching, WeightedGraph, min_cover_with_quota,
                                     min_matching_saturating, min_weight_edge_cover,
                                     min_weight_perfect_matching)


def k4(**w):
    """K4 from keyword weights like w01=1; missing pairs get ``rest``."""
    rest = w.pop("rest", 10)
    edges = {e: rest for e in itertools.combinations(range(4), 2)}
    for key, val in w.items():
        edges[(int(key[1]), int(key[2]))] = val
    return WeightedGraph(4, edges)


def test_graph_validation():
    with pytest.raises(DomainError):
        WeightedGraph(3, {(1, 1): 1})
    with pytest.raises(DomainError):
        WeightedGraph(3, {(0, 5): 1})
    with pytest.raises(DomainError):
        WeightedGraph(3, {(0, 1): 1, (1, 0): 2})
    with pytest.raises(DomainError):
        WeightedGraph(3, {(0, 1): -1})


def test_perfect_matching_examples():
    pm = min_weight_perfect_matching(WeightedGraph(2, {(0, 1): 3}))
    assert pm.sorted_edges() == [(0, 1)] and pm.weight == 3
    g = k4(w01=1, w23=1, rest=5)
    assert brute.perfect_matching_weight(4, g.edges) == 2
    pm = min_weight_perfect_matching(g)
    assert pm.sorted_edges() == [(0, 1), (2, 3)] and pm.weight == 2
    g = k4(w01=1, w23=4, w02=2, w13=2)
    assert brute.perfect_matching_weight(4, g.edges) == 4
    pm = min_weight_perfect_matching(g)
    assert pm.sorted_edges() == [(0, 2), (1, 3)] and pm.weight == 4


def test_perfect_matching_infeasible():
    with pytest.raises(InfeasibleError):
        min_weight_perfect_matching(WeightedGraph(3, {(0, 1): 1, (1, 2): 1}))
    with pytest.raises(InfeasibleError):
        min_weight_perfect_matching(WeightedGraph(4, {(0, 1): 1, (0, 2): 1, (0, 3): 1}))


def test_perfect_matching_brute_force_sparse():
    rng = np.random.default_rng(1)
    for _ in range(150):
        n = int(rng.choice([4, 6, 8]))
        w = brute.random_weights(rng, n, density=rng.uniform(0.3, 1.0), integer=False)
        ref = brute.perfect_matching_weight(n, w)
        g = WeightedGraph(n, w)
        if ref is None:
            with pytest.raises(InfeasibleError):
                min_weight_perfect_matching(g)
            continue
        pm = min_weight_perfect_matching(g)
        assert pm.weight == pytest.approx(ref, abs=1e-9)
        assert len(pm.vertices) == n


def test_edge_cover_examples():
    path = WeightedGraph(3, {(0, 1): 1, (1, 2): 1, (0, 2): 3})
    assert brute.edge_cover_weight_subsets(3, path.edges) == 2
    c = min_weight_edge_cover(path)
    assert sorted(c.edges) == [(0, 1), (1, 2)] and c.weight == 2
    c = min_weight_edge_cover(WeightedGraph(2, {(0, 1): 7}))
    assert sorted(c.edges) == [(0, 1)] and c.weight == 7
    star = WeightedGraph(4, {e: 1 for e in itertools.combinations(range(4), 2)})
    assert brute.edge_cover_weight_subsets(4, star.edges) == 2
    assert min_weight_edge_cover(star).weight == 2


def test_edge_cover_isolated_vertex():
    with pytest.raises(InfeasibleError):
        min_weight_edge_cover(WeightedGraph(3, {(0, 1): 1}))


def test_star_forest_brute_force_agrees_with_subset_brute_force():
    rng = np.random.default_rng(2)
    for _ in range(40):
        n = int(rng.integers(2, 6))
        w = brute.random_weights(rng, n, density=0.8)
        assert brute.edge_cover_weight(n, w) == brute.edge_cover_weight_subsets(n, w)
        Q = [v for v in range(n) if rng.random() < 0.3]
        free = n - len(Q)
        if free:
            d = int(rng.integers(1, free + 1))
            assert brute.quota_cover_weight(n, w, Q, d) == \
                brute.quota_cover_weight_subsets(n, w, Q, d)


def test_quota_examples():
    g = k4(w01=3, w23=1, w02=2, w13=2, w03=4, w12=4)
    assert min_cover_with_quota(g, [], 4).weight == min_weight_edge_cover(g).weight
    path = WeightedGraph(3, {(0, 1): 1, (1, 2): 5, (0, 2): 4})
    assert brute.quota_cover_weight_subsets(3, path.edges, [0], 1) == 1
    c = min_cover_with_quota(path, {0}, 1)
    assert 1 in c.covered and c.weight == 1 and sorted(c.edges) == [(0, 1)]
    ones = k4(rest=1)
    c = min_cover_with_quota(ones, [], 2)
    assert c.weight == 1 and len(c.covered) == 2


def test_quota_errors():
    g = k4(rest=1)
    with pytest.raises(InfeasibleError):
        min_cover_with_quota(g, [0, 1], 3)
    with pytest.raises(DomainError):
        min_cover_with_quota(g, [], 0)


def test_quota_monotone_in_d():
    rng = np.random.default_rng(3)
    for _ in range(30):
        n = int(rng.integers(3, 8))
        g = WeightedGraph(n, brute.random_weights(rng, n, integer=False))
        Q = [v for v in range(n) if rng.random() < 0.3]
        weights = [min_cover_with_quota(g, Q, d).weight for d in range(1, n - len(Q) + 1)]
        assert all(a <= b + 1e-9 for a, b in zip(weights, weights[1:]))


def test_saturating_examples():
    g = k4(w01=1, w23=2, w02=10, w13=10, w03=10, w12=10)
    res = min_matching_saturating(g, Matching(frozenset({(0, 1)}), 1.0), {0, 1}, 2)
    assert set(res.edges) - {(0, 1)} == {(2, 3)} and res.weight == 2
    assert brute.saturating_weight(4, g.edges, [(0, 1)], 2) == 2
    rng = np.random.default_rng(4)
    w = brute.random_weights(rng, 6, integer=False)
    g6 = WeightedGraph(6, w)
    res = min_matching_saturating(g6, [], set(), 2)
    assert res.weight == min(w.values())
    assert len(res.edges) == 1 and g6.weight(*next(iter(res.edges))) == min(w.values())
    full = min_matching_saturating(g6, [], set(), 6)
    assert full.weight == pytest.approx(min_weight_perfect_matching(g6).weight)


def test_saturating_errors():
    g = k4(rest=1)
    with pytest.raises(DomainError):
        min_matching_saturating(g, [(0, 1)], {0, 2}, 2)
    with pytest.raises(DomainError):
        min_matching_saturating(g, [(0, 1)], {0, 1}, 1)
    with pytest.raises(DomainError):
        min_matching_saturating(g, [(0, 1)], {0, 1}, 4)


def test_edge_cover_never_exceeds_perfect_matching():
    rng = np.random.default_rng(5)
    for _ in range(60):
        n = int(rng.choice([2, 4, 6, 8]))
        g = WeightedGraph(n, brute.random_weights(rng, n, integer=False))
        assert min_weight_edge_cover(g).weight <= min_weight_perfect_matching(g).weight + 1e-9


def test_extra_zero_edges_never_hurt():
    rng = np.random.default_rng(6)
    for _ in range(40):
        n = int(rng.choice([4, 6]))
        full = brute.random_weights(rng, n, high=9)
        sparse = {e: w for e, w in full.items() if w > 0}
        zeros = dict(sparse)
        for e in full:
            if e not in zeros and rng.random() < 0.5:
                zeros[e] = 0.0
        pairs = [(WeightedGraph(n, sparse), WeightedGraph(n, zeros))]
        for base, extra in pairs:
            try:
                ref = min_weight_perfect_matching(base).weight
            except InfeasibleError:
                ref = None
            if ref is not None:
                assert min_weight_perfect_matching(extra).weight <= ref
            try:
                ref = min_weight_edge_cover(base).weight
            except InfeasibleError:
                ref = None
            if ref is not None:
                assert min_weight_edge_cover(extra).weight <= ref
            assert min_cover_with_quota(extra, [0], 2).weight <= \
                min_cover_with_quota(base, [0], 2).weight


def test_quota_infeasible_without_edges():
    with pytest.raises(InfeasibleError):
        min_cover_with_quota(WeightedGraph(2, {}), [], 1)
    with pytest.raises(InfeasibleError):
        min_cover_with_quota(WeightedGraph(4, {(0, 1): 1.0}), [0], 2)
    assert min_cover_with_quota(WeightedGraph(4, {(0, 1): 1.0}), [0], 1).weight == 1
