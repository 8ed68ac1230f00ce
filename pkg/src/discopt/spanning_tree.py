"""Discounted spanning tree: adaptive greedy with interleaved contraction.

The adaptive solver alternates a search step (the cheapest average-cost
cover on the current contracted graph) with contraction of that cover's
components.  The baseline runs a complete greedy edge cover per round
before contracting.
"""

from __future__ import annotations

import logging
import math
from collections import deque
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from discopt.concave import DiscountCurve
from discopt.edge_cover import AgentGraph, best_candidate, greedy_cover, recover
from discopt.exceptions import DomainError, InfeasibleError
from discopt.instance import (SPANNING_TREE, Allocation, PotentialLedger, ProblemInstance,
                              _DSU, edge_key)
from discopt.matching_engine import Edge, WeightedGraph

log = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class ContractedGraph:
    """Super-vertices over the original vertex set with per-agent crossing minima.

    Original vertices keep their own label; contracted vertices get labels
    ``n, n+1, ...`` in creation order, recorded in ``history``.
    """

    n: int
    agent_ids: tuple[int, ...]
    discounts: tuple[DiscountCurve, ...]
    base_costs: tuple[np.ndarray, ...]
    labels: tuple[int, ...]
    members: Mapping[int, frozenset[int]]
    costs: tuple[np.ndarray, ...]
    reps: tuple[dict, ...]
    history: tuple[int, ...] = ()

    @classmethod
    def initial(cls, instance: ProblemInstance) -> "ContractedGraph":
        agents = sorted(instance.agents, key=lambda a: a.id)
        n = instance.n
        return cls._build(n, tuple(a.id for a in agents), tuple(a.discount for a in agents),
                          tuple(a.costs for a in agents), tuple(range(n)),
                          {v: frozenset([v]) for v in range(n)}, ())

    @classmethod
    def _build(cls, n, agent_ids, discounts, base_costs, labels, members, history):
        m = len(labels)
        costs, reps = [], []
        groups = [sorted(members[lab]) for lab in labels]
        for C in base_costs:
            W = np.zeros((m, m))
            R: dict[tuple[int, int], Edge] = {}
            for i in range(m):
                for j in range(i + 1, m):
                    block = C[np.ix_(groups[i], groups[j])]
                    # argmin returns the first minimum: smallest original vertex pair
                    flat = int(np.argmin(block))
                    a, b = divmod(flat, block.shape[1])
                    W[i, j] = W[j, i] = block[a, b]
                    R[(i, j)] = edge_key(groups[i][a], groups[j][b])
            costs.append(W)
            reps.append(R)
        return cls(n, agent_ids, discounts, base_costs, tuple(labels), dict(members),
                   tuple(costs), tuple(reps), tuple(history))

    @property
    def size(self) -> int:
        return len(self.labels)

    def index(self, label: int) -> int:
        return self.labels.index(label)

    def agent_graphs(self) -> list[AgentGraph]:
        return [AgentGraph(a, WeightedGraph.from_matrix(W), d)
                for a, W, d in zip(self.agent_ids, self.costs, self.discounts)]

    def representative(self, agent: int, i: int, j: int) -> Edge:
        """Original edge realising the super-edge between local indices ``i`` and ``j``."""
        pos = self.agent_ids.index(agent)
        return self.reps[pos][(min(i, j), max(i, j))]

    def cost(self, agent: int, a_label: int, b_label: int) -> float:
        pos = self.agent_ids.index(agent)
        return float(self.costs[pos][self.index(a_label), self.index(b_label)])


def contract(cg: ContractedGraph, components: Iterable[Iterable[int]]) -> ContractedGraph:
    """Merge each component (a set of super-vertex labels) into one new super-vertex."""
    comps = [sorted(set(c)) for c in components]
    seen: set[int] = set()
    for c in comps:
        if len(c) < 2:
            raise DomainError(f"component {c} has fewer than two super-vertices")
        for lab in c:
            if lab not in cg.members:
                raise DomainError(f"unknown super-vertex {lab}")
            if lab in seen:
                raise DomainError(f"super-vertex {lab} appears in two components")
            seen.add(lab)
    comps.sort()
    members = {lab: cg.members[lab] for lab in cg.labels if lab not in seen}
    labels = [lab for lab in cg.labels if lab not in seen]
    history = list(cg.history)
    next_label = cg.n + len(history)
    for c in comps:
        members[next_label] = frozenset().union(*(cg.members[lab] for lab in c))
        labels.append(next_label)
        history.append(next_label)
        next_label += 1
    return ContractedGraph._build(cg.n, cg.agent_ids, cg.discounts, cg.base_costs,
                                  tuple(labels), members, tuple(history))


def _components(m: int, edges: Iterable[Edge]) -> list[list[int]]:
    dsu = _DSU(m)
    touched = set()
    for u, v in edges:
        dsu.union(u, v)
        touched.update((u, v))
    groups: dict[int, list[int]] = {}
    for v in sorted(touched):
        groups.setdefault(dsu.find(v), []).append(v)
    return [g for g in groups.values() if len(g) >= 2]


def solve_spanning_tree_adaptive(instance: ProblemInstance) -> tuple[Allocation, PotentialLedger]:
    """Adaptive greedy spanning tree.

    Each phase picks the cheapest average-cost cover ``(a, S)`` on the
    contracted graph, gives every vertex of ``S`` that ratio as potential,
    hands the cover's representative edges to ``a`` and contracts the
    cover's components.  Assigned edges are pruned to a tree at the end.
    """
    if instance.kind != SPANNING_TREE:
        raise DomainError(f"expected a spanning_tree instance, got {instance.kind}")
    cg = ContractedGraph.initial(instance)
    ledger = PotentialLedger()
    selected: dict[int, list[Edge]] = {a: [] for a in cg.agent_ids}
    phase = 0
    while cg.size > 1:
        cand = best_candidate(cg.agent_graphs(), frozenset())
        labels = [cg.labels[i] for i in sorted(cand.vertices)]
        ledger.record([x for x in labels if x < cg.n], cand.ratio, phase)
        ledger.record([x for x in labels if x >= cg.n], cand.ratio, phase, contracted=True)
        for i, j in sorted(cand.cover):
            selected[cand.agent].append(cg.representative(cand.agent, i, j))
        comps = _components(cg.size, cand.cover)
        log.debug("phase %d: agent %d, ratio %.6g, contracting %s", phase, cand.agent,
                  cand.ratio, [[cg.labels[i] for i in c] for c in comps])
        cg = contract(cg, [[cg.labels[i] for i in c] for c in comps])
        phase += 1
    ledger.contracted_total = len(cg.history)
    return prune_to_tree(instance, selected), ledger


def baseline_run(instance: ProblemInstance) -> tuple[Allocation, int]:
    """Repeated greedy edge cover plus contraction; returns the tree and round count."""
    if instance.kind != SPANNING_TREE:
        raise DomainError(f"expected a spanning_tree instance, got {instance.kind}")
    cg = ContractedGraph.initial(instance)
    selected: dict[int, list[Edge]] = {a: [] for a in cg.agent_ids}
    rounds = 0
    while cg.size > 1:
        agents = cg.agent_graphs()
        run = greedy_cover(agents)
        bundles = recover(agents, run.covered_by)
        chosen = []
        for a, edges in bundles.items():
            for i, j in edges:
                selected[a].append(cg.representative(a, i, j))
                chosen.append((i, j))
        comps = _components(cg.size, chosen)
        cg = contract(cg, [[cg.labels[i] for i in c] for c in comps])
        rounds += 1
    limit = math.ceil(math.log2(instance.n))
    if rounds > limit:
        raise AssertionError(f"baseline used {rounds} rounds, more than ceil(log2 n) = {limit}")
    return prune_to_tree(instance, selected), rounds


def solve_spanning_tree_baseline(instance: ProblemInstance) -> Allocation:
    return baseline_run(instance)[0]


def _forest_path(adj: dict[int, list[int]], src: int, dst: int) -> list[Edge]:
    prev = {src: None}
    queue = deque([src])
    while queue:
        x = queue.popleft()
        if x == dst:
            break
        for y in sorted(adj.get(x, ())):
            if y not in prev:
                prev[y] = x
                queue.append(y)
    path = []
    x = dst
    while prev[x] is not None:
        path.append(edge_key(x, prev[x]))
        x = prev[x]
    return path


def _find_cycle(edges: Sequence[Edge]) -> list[Edge] | None:
    dsu = _DSU(1 + max(v for e in edges for v in e))
    adj: dict[int, list[int]] = {}
    for u, v in sorted(edges):
        if not dsu.union(u, v):
            return sorted(_forest_path(adj, u, v) + [(u, v)])
        adj.setdefault(u, []).append(v)
        adj.setdefault(v, []).append(u)
    return None


def prune_to_tree(instance: ProblemInstance, selected: Mapping[int, Iterable[Edge]]) -> Allocation:
    """Drop edges from cycles until the selection is a spanning tree.

    From each cycle found, the edge whose removal lowers the total price the
    most is removed (smallest edge on ties).  Duplicated edges stay with
    the lowest agent id.
    """
    owner: dict[Edge, int] = {}
    for a in sorted(selected):
        for e in selected[a]:
            owner.setdefault(edge_key(*e), a)
    n = instance.n
    dsu = _DSU(n)
    for u, v in owner:
        dsu.union(u, v)
    if len({dsu.find(v) for v in range(n)}) != 1:
        raise InfeasibleError("selected edges do not connect every vertex")
    agents = {a.id: a for a in instance.agents}
    load = {a: 0.0 for a in agents}
    for e, a in owner.items():
        load[a] += agents[a].cost(e)
    while len(owner) > n - 1:
        cycle = _find_cycle(list(owner))
        best = None
        for e in cycle:
            a = agents[owner[e]]
            rest = max(load[a.id] - a.cost(e), 0.0)
            drop = a.discount(load[a.id]) - a.discount(rest)
            if best is None or drop > best[0]:
                best = (drop, e)
        e = best[1]
        a = owner.pop(e)
        load[a] = max(load[a] - agents[a].cost(e), 0.0)
    return Allocation(owner)
