"""Adaptive greedy discounted perfect matching.

Each phase saturates an even number of new vertices and may rematch
vertices matched earlier: edges of the current matching are free to keep.
Matched vertices stay matched.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Collection

from discopt.edge_cover import AgentGraph, projections
from discopt.exceptions import DomainError, InfeasibleError
from discopt.instance import PERFECT_MATCHING, Allocation, PotentialLedger, ProblemInstance
from discopt.matching_engine import Edge, Matching, WeightedGraph, min_matching_saturating

log = logging.getLogger(__name__)


@dataclass
class MatchState:
    """Current matching, its vertex set and who introduced each edge (agent, phase)."""

    n: int
    M: frozenset[Edge] = frozenset()
    owner: dict[Edge, tuple[int, int]] = field(default_factory=dict)

    @property
    def Z(self) -> frozenset[int]:
        return frozenset(v for e in self.M for v in e)

    def matching(self, graph: WeightedGraph | None = None) -> Matching:
        w = graph.cost_of(self.M) if graph is not None else 0.0
        return Matching(self.M, w)


@dataclass(frozen=True)
class Augmentation:
    agent: int
    F: frozenset[Edge]
    t: int
    linear_cost: float
    cost: float
    ratio: float

    def key(self):
        return (self.ratio, self.agent, sorted(self.F))


def best_augmentation(agents: list[AgentGraph] | ProblemInstance, state: MatchState,
                      forbidden: Collection[Edge] = ()) -> Augmentation:
    """Cheapest average-cost augmentation of ``state``.

    Searches every agent and every even count ``t`` of newly saturated
    vertices; for fixed ``(a, t)`` the linear-cheapest re-matching also
    minimises the discounted price.  ``forbidden`` edges are never used.
    """
    if isinstance(agents, ProblemInstance):
        agents = projections(agents)
    if forbidden:
        forbidden = frozenset(forbidden)
        agents = [AgentGraph(ag.agent, WeightedGraph(ag.graph.n, {
            e: w for e, w in ag.graph.edges.items() if e not in forbidden}), ag.discount)
            for ag in agents]
    Z = state.Z
    free = state.n - len(Z)
    if free == 0:
        raise DomainError("every vertex is already matched")
    best: Augmentation | None = None
    for ag in agents:
        for t in range(2, free + 1, 2):
            try:
                res = min_matching_saturating(ag.graph, state.M, Z, t)
            except InfeasibleError:
                continue
            price = ag.discount(res.weight)
            cand = Augmentation(ag.agent, res.edges, t, res.weight, price, price / t)
            if best is None or cand.key() < best.key():
                best = cand
    if best is None:
        raise InfeasibleError("no agent can extend the current matching")
    return best


def solve_perfect_matching_adaptive(instance: ProblemInstance, *,
                                    forbidden: Collection[Edge] = ()
                                    ) -> tuple[Allocation, PotentialLedger]:
    """Adaptive greedy perfect matching with per-vertex potentials.

    The final allocation charges each edge of the final matching to the
    agent that most recently introduced it.
    """
    if instance.kind != PERFECT_MATCHING:
        raise DomainError(f"expected a perfect_matching instance, got {instance.kind}")
    agents = projections(instance)
    state = MatchState(instance.n)
    ledger = PotentialLedger()
    phase = 0
    while len(state.Z) < instance.n:
        aug = best_augmentation(agents, state, forbidden)
        old_Z = state.Z
        owner = {e: state.owner[e] if e in state.M else (aug.agent, phase) for e in aug.F}
        state = MatchState(instance.n, aug.F, owner)
        new = state.Z - old_Z
        if not old_Z <= state.Z or len(new) != aug.t:
            raise AssertionError("augmentation lost matched vertices or miscounted new ones")
        ledger.record(new, aug.ratio, phase)
        log.debug("phase %d: agent %d saturates %s at ratio %.6g", phase, aug.agent,
                  sorted(new), aug.ratio)
        phase += 1
    return Allocation({e: a for e, (a, _) in state.owner.items()}), ledger
