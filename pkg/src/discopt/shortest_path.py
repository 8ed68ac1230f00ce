"""Discounted shortest s-t path via a cost-preserving reduction to perfect matching.

Every vertex ``v`` other than ``s`` and ``t`` is split into ``v'`` and
``v''`` joined by a free edge.  An original edge ``uv`` becomes the twin
pair ``(u', v')`` / ``(u'', v'')``; edges at ``s`` attach to ``u'`` and
edges at ``t`` attach to both copies.  A path enters each internal vertex
through one copy and leaves through the other, so s-t paths correspond to
perfect matchings of equal per-agent cost, with unused vertices matched to
their twin for free.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from discopt.exceptions import DomainError, SolutionError
from discopt.instance import (PERFECT_MATCHING, SHORTEST_PATH, AgentSpec, Allocation,
                              PotentialLedger, ProblemInstance, edge_key, is_perfect_matching,
                              total_price)
from discopt.matching import solve_perfect_matching_adaptive
from discopt.matching_engine import Edge

PRICE_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class GadgetMap:
    """Auxiliary matching instance plus the maps back to the original graph.

    ``origin`` sends each auxiliary edge to its original edge, or to ``None``
    for the free ``(v', v'')`` fillers.  ``forbidden`` lists auxiliary pairs
    that exist only to complete the graph; they carry a sentinel cost.
    """

    original: ProblemInstance
    aux: ProblemInstance
    origin: dict[Edge, Edge | None]
    split: dict[int, tuple[int, int]]
    forbidden: frozenset[Edge]
    sentinel: float

    @property
    def s(self) -> int:
        return 0

    @property
    def t(self) -> int:
        return 1

    def twin(self, aux_vertex: int) -> int:
        return aux_vertex ^ 1 if aux_vertex >= 2 else aux_vertex


def build_matching_instance(instance: ProblemInstance, s: int | None = None,
                            t: int | None = None) -> GadgetMap:
    if instance.kind != SHORTEST_PATH:
        raise DomainError(f"expected a shortest_path instance, got {instance.kind}")
    s = instance.s if s is None else s
    t = instance.t if t is None else t
    if s == t:
        raise DomainError("s and t must differ")
    if (s, t) != (instance.s, instance.t):
        instance = ProblemInstance(instance.n, instance.agents, SHORTEST_PATH, s=s, t=t)
    n = instance.n
    internal = [v for v in range(n) if v not in (s, t)]
    split = {v: (2 + 2 * i, 3 + 2 * i) for i, v in enumerate(internal)}
    N = 2 * len(internal) + 2
    top = max(float(a.costs.max()) for a in instance.agents)
    sentinel = 1.0 + n * top

    # (aux edge) -> original edge; structure fixed, costs per agent below
    structure: dict[Edge, Edge | None] = {}
    structure[(0, 1)] = edge_key(s, t)
    for v, (p, q) in split.items():
        structure[(p, q)] = None
        structure[edge_key(0, p)] = edge_key(s, v)
        structure[edge_key(p, 1)] = edge_key(v, t)
        structure[edge_key(q, 1)] = edge_key(v, t)
    for i, u in enumerate(internal):
        for v in internal[i + 1:]:
            (up, uq), (vp, vq) = split[u], split[v]
            structure[edge_key(up, vp)] = edge_key(u, v)
            structure[edge_key(uq, vq)] = edge_key(u, v)

    def stands_for(x):
        return s if x == 0 else t if x == 1 else internal[(x - 2) // 2]

    origin = dict(structure)
    forbidden = set()
    for x in range(N):
        for y in range(x + 1, N):
            if (x, y) not in structure:
                forbidden.add((x, y))
                origin[(x, y)] = edge_key(stands_for(x), stands_for(y))

    agents = []
    for a in instance.agents:
        C = np.full((N, N), sentinel)
        np.fill_diagonal(C, 0.0)
        for (x, y), e in structure.items():
            C[x, y] = C[y, x] = 0.0 if e is None else a.costs[e]
        agents.append(AgentSpec(a.id, C, a.discount))
    aux = ProblemInstance(N, tuple(agents), PERFECT_MATCHING)
    return GadgetMap(instance, aux, origin, split, frozenset(forbidden), sentinel)


def path_to_matching(gm: GadgetMap, path: Allocation) -> Allocation:
    """Perfect matching of the auxiliary graph carrying the same per-agent bundles."""
    inst = gm.original
    edges = path.elements()
    adj: dict[int, list[int]] = {}
    for u, v in edges:
        adj.setdefault(u, []).append(v)
        adj.setdefault(v, []).append(u)
    order = [inst.s]
    prev = None
    while order[-1] != inst.t:
        nxt = [w for w in adj[order[-1]] if w != prev]
        if not nxt:
            raise SolutionError("allocation is not an s-t path")
        prev = order[-1]
        order.append(nxt[0])
    filler_agent = min(a.id for a in inst.agents)
    out: dict[Edge, int] = {}
    used = set(order[1:-1])
    for v, pair in gm.split.items():
        if v not in used:
            out[pair] = filler_agent
    # Enter the first internal vertex through v', then alternate copies.
    enter = 0
    for i in range(len(order) - 1):
        u, w = order[i], order[i + 1]
        agent = path.assignment[edge_key(u, w)]
        if u == inst.s:
            a_end = 0
        else:
            a_end = gm.split[u][1 - enter]
            enter = 1 - enter
        if w == inst.t:
            b_end = 1
        else:
            b_end = gm.split[w][enter]
        out[edge_key(a_end, b_end)] = agent
    return Allocation(out)


def extract_path(gm: GadgetMap, matching: Allocation) -> Allocation:
    """Pull a perfect matching back to an s-t path; leftover circuits are dropped."""
    N = gm.aux.n
    edges = matching.elements()
    if not is_perfect_matching(N, edges):
        raise SolutionError("allocation is not a perfect matching of the auxiliary graph")
    mate = {}
    for x, y in edges:
        mate[x], mate[y] = y, x
    out: dict[Edge, int] = {}
    cur = gm.s
    steps = 0
    while True:
        nxt = mate[cur]
        e = edge_key(cur, nxt)
        orig = gm.origin[e]
        if orig is None:
            raise SolutionError(f"walk from s reached filler edge {e}")
        out[orig] = matching.assignment[e]
        if nxt == gm.t:
            break
        cur = gm.twin(nxt)
        steps += 1
        if steps > N:
            raise SolutionError("walk from s does not reach t")
    return Allocation(out)


def solve_shortest_path(instance: ProblemInstance) -> tuple[Allocation, PotentialLedger]:
    """Adaptive matching on the auxiliary graph, pulled back to a path.

    The ledger holds potentials of auxiliary vertices.
    """
    gm = build_matching_instance(instance)
    m_alloc, ledger = solve_perfect_matching_adaptive(gm.aux, forbidden=gm.forbidden)
    path = extract_path(gm, m_alloc)
    p_path, p_match = total_price(instance, path), total_price(gm.aux, m_alloc)
    if p_path > p_match + PRICE_TOL * max(1.0, p_match):
        raise AssertionError(f"path price {p_path} exceeds matching price {p_match}")
    return path, ledger
