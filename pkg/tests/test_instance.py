import itertools
import json

import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from discopt.concave import DiscountCurve, identity_curve, validate
from discopt.exceptions import DomainError, ParseError, SolutionError
from discopt.instance import (EDGE_COVER, PERFECT_MATCHING, REVERSE_AUCTION, SHORTEST_PATH,
                              SPANNING_TREE, AgentSpec, Allocation, PotentialLedger,
                              ProblemInstance, instance_from_dict, instance_to_dict,
                              random_instance, read_allocation, read_instance, total_price,
                              validate_solution, write_allocation, write_instance)


def one_agent(n, kind, costs=None, curve=None, **kw):
    C = np.ones((n, n)) if costs is None else costs
    np.fill_diagonal(C, 0)
    return ProblemInstance(n, (AgentSpec(0, C, curve or identity_curve(10)),), kind, **kw)


def test_total_price_examples():
    inst = one_agent(4, PERFECT_MATCHING)
    assert total_price(inst, Allocation()) == 0
    assert total_price(inst, Allocation({(0, 1): 0, (2, 3): 0})) == 2
    C = np.full((4, 4), 12.5)
    flat = one_agent(4, EDGE_COVER, C, DiscountCurve([(0, 0), (10, 10)], 0.0))
    assert total_price(flat, Allocation({(0, 1): 0, (2, 3): 0})) == 10


def test_total_price_sums_agents_separately():
    C = np.full((3, 3), 4.0)
    agents = (AgentSpec(0, C, DiscountCurve([(0, 0), (5, 5)], 0.5)),
              AgentSpec(1, C * 2, identity_curve(1)))
    inst = ProblemInstance(3, agents, SPANNING_TREE)
    alloc = Allocation({(0, 1): 0, (0, 2): 0, (1, 2): 1})
    assert total_price(inst, alloc) == pytest.approx(5 + 0.5 * 3 + 8)


def test_total_price_rejects_unknown_elements():
    inst = one_agent(4, EDGE_COVER)
    with pytest.raises(SolutionError):
        total_price(inst, Allocation({(1, 0): 0}))
    with pytest.raises(SolutionError):
        total_price(inst, Allocation({(0, 1): 9}))


def test_validate_solution_examples():
    pm = one_agent(4, PERFECT_MATCHING)
    assert validate_solution(pm, Allocation({(0, 1): 0, (2, 3): 0}))
    assert not validate_solution(pm, Allocation({(0, 1): 0, (1, 2): 0}))
    tree = one_agent(4, SPANNING_TREE)
    assert validate_solution(tree, Allocation({(0, 1): 0, (1, 2): 0, (2, 3): 0}))
    assert not validate_solution(tree, Allocation({(5, 6): 0}))


def reference_check(kind, n, edges, s=0, t=None):
    """networkx-based feasibility, written independently of the package."""
    t = n - 1 if t is None else t
    G = nx.Graph()
    G.add_nodes_from(range(n))
    G.add_edges_from(edges)
    if kind == EDGE_COVER:
        return all(G.degree(v) > 0 for v in range(n))
    if kind == SPANNING_TREE:
        return nx.is_tree(G)
    if kind == PERFECT_MATCHING:
        return nx.is_perfect_matching(G, set(edges))
    H = G.edge_subgraph(edges).copy()
    if s not in H or t not in H or not nx.is_connected(H):
        return False
    return all(d == 2 for v, d in H.degree() if v not in (s, t)) and \
        H.degree(s) == 1 and H.degree(t) == 1


def sample_edge_set(rng, kind, n):
    edges = list(itertools.combinations(range(n), 2))
    mode = rng.integers(3)
    if mode == 0:
        chosen = {e for e in edges if rng.random() < rng.uniform(0.1, 0.6)}
    else:
        # near-feasible structure, sometimes perturbed
        perm = [int(x) for x in rng.permutation(n)]
        if kind == PERFECT_MATCHING:
            chosen = {tuple(sorted(perm[i:i + 2])) for i in range(0, n - 1, 2)}
        elif kind == SHORTEST_PATH:
            inner = [v for v in perm if v not in (0, n - 1)][:rng.integers(0, n - 1)]
            seq = [0] + inner + [n - 1]
            chosen = {tuple(sorted(p)) for p in zip(seq, seq[1:])}
        else:
            chosen = {tuple(sorted((perm[i], perm[int(rng.integers(i))]))) for i in range(1, n)}
        if mode == 2:
            e = edges[int(rng.integers(len(edges)))]
            chosen ^= {e}
    return sorted(chosen)


@pytest.mark.parametrize("kind", [EDGE_COVER, SPANNING_TREE, PERFECT_MATCHING, SHORTEST_PATH])
def test_validate_solution_matches_reference(kind):
    rng = np.random.default_rng(11)
    agree = positives = 0
    for _ in range(1000):
        n = int(rng.choice([2, 4, 6, 8])) if kind == PERFECT_MATCHING else int(rng.integers(2, 9))
        inst = one_agent(n, kind, **({"s": 0, "t": n - 1} if kind == SHORTEST_PATH else {}))
        edges = sample_edge_set(rng, kind, n)
        got = validate_solution(inst, Allocation({e: 0 for e in edges}))
        ref = reference_check(kind, n, edges)
        assert got == ref, (kind, n, edges)
        agree += 1
        positives += ref
    assert agree == 1000 and 50 < positives < 950


def test_validate_solution_auction_needs_every_item():
    inst = ProblemInstance(3, (AgentSpec(0, np.ones(3), identity_curve(1)),), REVERSE_AUCTION)
    assert validate_solution(inst, Allocation({0: 0, 1: 0, 2: 0}))
    assert not validate_solution(inst, Allocation({0: 0, 1: 0}))


def test_random_instance_examples():
    a = random_instance(1, 4, 1, PERFECT_MATCHING)
    b = random_instance(1, 4, 1, PERFECT_MATCHING)
    assert a == b
    with pytest.raises(DomainError):
        random_instance(1, 5, 2, PERFECT_MATCHING)
    inst = random_instance(2, 6, 3, SPANNING_TREE)
    assert all(validate(a.discount).ok for a in inst.agents)


def test_random_instance_costs_symmetric_and_in_range():
    inst = random_instance(3, 7, 2, EDGE_COVER, (2.0, 5.0), "mixed", integer_costs=True)
    for a in inst.agents:
        assert np.array_equal(a.costs, a.costs.T)
        off = a.costs[~np.eye(7, dtype=bool)]
        assert off.min() >= 2 and off.max() <= 5
        assert np.array_equal(off, np.round(off))
    assert inst.agents[0].discount.slopes() == [1.0, 1.0]


def test_instance_rejects_bad_input():
    C = np.ones((3, 3))
    with pytest.raises(DomainError):
        ProblemInstance(3, (AgentSpec(0, -C, identity_curve(1)),), EDGE_COVER)
    with pytest.raises(DomainError):
        ProblemInstance(3, (AgentSpec(0, C, identity_curve(1)),) * 2, EDGE_COVER)
    with pytest.raises(DomainError):
        ProblemInstance(3, (AgentSpec(0, C, identity_curve(1)),), SHORTEST_PATH, s=1, t=1)
    with pytest.raises(DomainError):
        ProblemInstance(3, (AgentSpec(0, C, identity_curve(1)),), "steiner_tree")


@pytest.mark.parametrize("kind", [EDGE_COVER, SPANNING_TREE, PERFECT_MATCHING, SHORTEST_PATH,
                                  REVERSE_AUCTION])
def test_round_trip(tmp_path, kind):
    inst = random_instance(5, 6, 2, kind)
    p = tmp_path / "inst.json"
    write_instance(inst, p)
    assert read_instance(p) == inst


def test_allocation_round_trip(tmp_path):
    alloc = Allocation({(0, 1): 2, (3, 4): 0})
    write_allocation(alloc, tmp_path / "a.json", price=1.5)
    assert read_allocation(tmp_path / "a.json") == alloc
    data = json.loads((tmp_path / "a.json").read_text())
    assert data == {"assignment": {"0-1": 2, "3-4": 0}, "price": 1.5}
    items = Allocation({0: 1, 2: 0})
    write_allocation(items, tmp_path / "b.json")
    assert read_allocation(tmp_path / "b.json", REVERSE_AUCTION) == items


def test_missing_cost_names_the_edge():
    data = instance_to_dict(random_instance(0, 3, 1, EDGE_COVER))
    del data["agents"][0]["costs"]["1-2"]
    with pytest.raises(ParseError, match="1-2"):
        instance_from_dict(data)


def test_unknown_kind_is_a_parse_error():
    data = instance_to_dict(random_instance(0, 3, 1, EDGE_COVER))
    data["kind"] = "steiner_tree"
    with pytest.raises(ParseError):
        instance_from_dict(data)


def test_malformed_json(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text("{\"n\": 3,\n")
    with pytest.raises(ParseError, match="line"):
        read_instance(p)


def test_from_bundles_rejects_shared_edges():
    with pytest.raises(SolutionError):
        Allocation.from_bundles({0: [(0, 1)], 1: [(0, 1)]})
    alloc = Allocation.from_bundles({0: [(0, 1)], 1: [(1, 2), (2, 3)]})
    assert alloc.bundles() == {0: [(0, 1)], 1: [(1, 2), (2, 3)]}


def test_ledger_rejects_negative_potentials():
    led = PotentialLedger()
    led.record([3, 1], 0.5, phase=1)
    assert [e.vertex for e in led.entries] == [1, 3]
    with pytest.raises(DomainError):
        led.record([2], -1.0, phase=2)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10_000), st.integers(2, 7), st.integers(1, 3))
def test_price_is_subadditive_over_bundle_merges(seed, n, k):
    """Moving every edge of one agent to another never beats the curves' subadditivity."""
    inst = random_instance(seed, n, k, EDGE_COVER)
    rng = np.random.default_rng(seed)
    edges = list(itertools.combinations(range(n), 2))
    chosen = [e for e in edges if rng.random() < 0.5] or edges[:1]
    alloc = Allocation({e: int(rng.integers(k)) for e in chosen})
    single = [total_price(inst, Allocation({e: a})) for e, a in alloc.assignment.items()]
    assert total_price(inst, alloc) <= sum(single) + 1e-9 * (1 + sum(single))
