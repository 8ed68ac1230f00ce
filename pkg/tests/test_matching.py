import itertools
import math

import numpy as np
import pytest

import brute
from discopt.concave import identity_curve
from discopt.exceptions import DomainError
from discopt.instance import (PERFECT_MATCHING, AgentSpec, ProblemInstance, random_instance,
                              total_price, validate_solution)
from discopt.matching import MatchState, best_augmentation, solve_perfect_matching_adaptive
from discopt.oracle import exact_solve


def k4_instance():
    C = np.zeros((4, 4))
    for (u, v), w in {(0, 1): 1, (2, 3): 10, (0, 2): 3, (1, 3): 3, (0, 3): 9, (1, 2): 9}.items():
        C[u, v] = C[v, u] = w
    return ProblemInstance(4, (AgentSpec(0, C, identity_curve(20)),), PERFECT_MATCHING)


def brute_best_ratio(inst, M):
    Z = sorted({v for e in M for v in e})
    outside = [v for v in range(inst.n) if v not in Z]
    best = math.inf
    for a in inst.agents:
        for t in range(2, len(outside) + 1, 2):
            for T in itertools.combinations(outside, t):
                for pm in brute.pairings(tuple(sorted(Z + list(T)))):
                    c = math.fsum(a.costs[e] for e in pm if e not in M)
                    best = min(best, a.discount(c) / t)
    return best


def test_empty_state_single_edge_candidate():
    inst = random_instance(4, 6, 1, PERFECT_MATCHING, curve_family="identity")
    C = inst.agents[0].costs
    w_min = min(C[e] for e in itertools.combinations(range(6), 2))
    aug = best_augmentation(inst, MatchState(6))
    assert aug.ratio <= w_min / 2


def test_k4_first_phase():
    inst = k4_instance()
    aug = best_augmentation(inst, MatchState(4))
    assert brute_best_ratio(inst, set()) == 0.5
    assert aug.F == {(0, 1)} and aug.t == 2 and aug.ratio == 0.5


def test_k4_rematch_phase():
    inst = k4_instance()
    state = MatchState(4, frozenset({(0, 1)}), {(0, 1): (0, 0)})
    aug = best_augmentation(inst, state)
    assert brute_best_ratio(inst, {(0, 1)}) == 3
    assert aug.F == {(0, 2), (1, 3)} and aug.linear_cost == 6 and aug.ratio == 3


def test_k4_full_trace():
    inst = k4_instance()
    alloc, ledger = solve_perfect_matching_adaptive(inst)
    assert alloc.elements() == [(0, 2), (1, 3)]
    assert [(e.vertex, e.potential, e.phase) for e in ledger.entries] == \
        [(0, 0.5, 0), (1, 0.5, 0), (2, 3.0, 1), (3, 3.0, 1)]
    assert total_price(inst, alloc) == 6 and ledger.total() == 7


def test_two_vertices():
    C = np.array([[0, 2.0], [2.0, 0]])
    inst = ProblemInstance(2, (AgentSpec(0, C, identity_curve(1)),), PERFECT_MATCHING)
    alloc, _ = solve_perfect_matching_adaptive(inst)
    assert alloc.assignment == {(0, 1): 0} and total_price(inst, alloc) == 2


def test_best_augmentation_matches_brute_force():
    rng = np.random.default_rng(8)
    for seed in range(30):
        n = int(rng.choice([4, 6]))
        inst = random_instance(seed, n, 2, PERFECT_MATCHING)
        perm = [int(x) for x in rng.permutation(n)]
        size = int(rng.integers(0, n // 2))
        M = frozenset(tuple(sorted(perm[2 * i:2 * i + 2])) for i in range(size))
        state = MatchState(n, M, {e: (0, 0) for e in M})
        aug = best_augmentation(inst, state)
        assert aug.ratio == pytest.approx(brute_best_ratio(inst, M), rel=1e-12)
        assert state.Z <= {v for e in aug.F for v in e}


def test_random_instances_within_bound():
    for seed in range(40):
        n = 2 + 2 * (seed % 4)
        inst = random_instance(seed, n, 1 + seed % 3, PERFECT_MATCHING)
        alloc, ledger = solve_perfect_matching_adaptive(inst)
        assert validate_solution(inst, alloc)
        price = total_price(inst, alloc)
        opt = exact_solve(inst)[1]
        assert opt * (1 - 1e-9) <= price <= (math.log(n) + 1) * opt * (1 + 1e-9)
        assert price <= ledger.total() * (1 + 1e-9)


def test_forbidden_edges_are_avoided():
    inst = random_instance(2, 6, 2, PERFECT_MATCHING)
    banned = {(0, 1), (2, 3), (4, 5)}
    alloc, _ = solve_perfect_matching_adaptive(inst, forbidden=banned)
    assert validate_solution(inst, alloc) and not banned & set(alloc.elements())


def test_wrong_kind():
    with pytest.raises(DomainError):
        solve_perfect_matching_adaptive(random_instance(0, 4, 1, "edge_cover"))
