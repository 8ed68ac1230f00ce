"""Greedy discounted edge cover over the implicit (agent, vertex set) system."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Sequence

from discopt.concave import DiscountCurve
from discopt.exceptions import DomainError
from discopt.instance import EDGE_COVER, Allocation, PotentialLedger, ProblemInstance
from discopt.matching_engine import Edge, WeightedGraph, min_cover_with_quota

log = logging.getLogger(__name__)

RATIO_TOL = 1e-9


@dataclass(frozen=True)
class RatioCandidate:
    """A candidate set ``(agent, S)`` priced by its cheapest cover."""

    agent: int
    vertices: frozenset[int]
    cover: frozenset[Edge]
    linear_cost: float
    cost: float
    ratio: float
    new: frozenset[int]

    def key(self):
        return (self.ratio, self.agent, sorted(self.vertices))


@dataclass(frozen=True)
class AgentGraph:
    """One agent's scalar projection of a (possibly contracted) instance."""

    agent: int
    graph: WeightedGraph
    discount: DiscountCurve


def projections(instance: ProblemInstance) -> list[AgentGraph]:
    return [AgentGraph(a.id, WeightedGraph.from_matrix(a.costs), a.discount)
            for a in sorted(instance.agents, key=lambda a: a.id)]


def best_candidate(agents: Sequence[AgentGraph], Q: frozenset[int]) -> RatioCandidate:
    """Minimum of ``d_a(cover cost) / |S - Q|`` over agents and vertex sets.

    For each agent, only the quota-optimal sets ``S_d`` need checking.  When
    ``S_d`` already overshoots to ``m`` new vertices it is also optimal for
    every quota up to ``m``, so those quotas are skipped.
    """
    n = agents[0].graph.n
    remaining = n - len(Q)
    if remaining <= 0:
        raise DomainError("every vertex is already covered")
    best: RatioCandidate | None = None
    for ag in agents:
        d = 1
        while d <= remaining:
            cov = min_cover_with_quota(ag.graph, Q, d)
            new = cov.covered - Q
            price = ag.discount(cov.weight)
            cand = RatioCandidate(ag.agent, cov.covered, cov.edges, cov.weight, price,
                                  price / len(new), frozenset(new))
            if best is None or cand.key() < best.key():
                best = cand
            d = max(d + 1, len(new) + 1)
    return best


def best_ratio_set(instance: ProblemInstance, Q=frozenset()) -> RatioCandidate:
    return best_candidate(projections(instance), frozenset(Q))


@dataclass
class GreedyCoverRun:
    phases: list[RatioCandidate]
    covered_by: dict[int, set[int]]
    ledger: PotentialLedger


def greedy_cover(agents: Sequence[AgentGraph]) -> GreedyCoverRun:
    """Run greedy set cover phases until every vertex is covered."""
    n = agents[0].graph.n
    Q: frozenset[int] = frozenset()
    phases: list[RatioCandidate] = []
    covered_by: dict[int, set[int]] = {ag.agent: set() for ag in agents}
    ledger = PotentialLedger()
    while len(Q) < n:
        cand = best_candidate(agents, Q)
        if phases and cand.ratio < phases[-1].ratio - RATIO_TOL * max(1.0, phases[-1].ratio):
            raise AssertionError(
                f"greedy ratio decreased from {phases[-1].ratio} to {cand.ratio}")
        ledger.record(cand.new, cand.ratio, len(phases))
        covered_by[cand.agent] |= cand.vertices
        phases.append(cand)
        Q = Q | cand.vertices
        log.debug("phase %d: agent %d covers %s at ratio %.6g",
                  len(phases), cand.agent, sorted(cand.new), cand.ratio)
    return GreedyCoverRun(phases, covered_by, ledger)


def recover(agents: Sequence[AgentGraph], covered_by: dict[int, set[int]]) -> dict[int, list[Edge]]:
    """Each agent's cheapest cover of the vertices assigned to her.

    An edge picked by several agents stays with the lowest agent id; dropping
    it elsewhere never raises a price.
    """
    n = agents[0].graph.n
    owner: dict[Edge, int] = {}
    for ag in agents:
        U = covered_by.get(ag.agent)
        if not U:
            continue
        rest = frozenset(range(n)) - frozenset(U)
        cov = min_cover_with_quota(ag.graph, rest, len(U))
        for e in sorted(cov.edges):
            owner.setdefault(e, ag.agent)
    bundles: dict[int, list[Edge]] = {}
    for e, a in sorted(owner.items()):
        bundles.setdefault(a, []).append(e)
    return bundles


def solve_edge_cover(instance: ProblemInstance) -> tuple[Allocation, PotentialLedger]:
    """Greedy discounted edge cover.

    Returns the allocation together with the potential of every vertex (the
    ratio of the phase that first covered it).
    """
    if instance.kind != EDGE_COVER:
        raise DomainError(f"expected an edge_cover instance, got {instance.kind}")
    agents = projections(instance)
    run = greedy_cover(agents)
    bundles = recover(agents, run.covered_by)
    return Allocation.from_bundles(bundles), run.ledger
