"""Single-weight graph subroutines: matchings, edge covers and quota variants.

The blossom step is delegated to :func:`networkx.max_weight_matching`; the
edge-cover reduction and the two auxiliary-graph constructions used by the
greedy solvers are built here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping

import networkx as nx
import numpy as np

from discopt.exceptions import DomainError, InfeasibleError

Edge = tuple[int, int]


def _key(u, v) -> Edge:
    return (u, v) if u < v else (v, u)


@dataclass(frozen=True)
class WeightedGraph:
    """Undirected graph on vertices ``0..n-1`` with one weight per edge."""

    n: int
    edges: Mapping[Edge, float] = field(default_factory=dict)

    def __post_init__(self):
        clean: dict[Edge, float] = {}
        for (u, v), w in dict(self.edges).items():
            u, v = int(u), int(v)
            if u == v:
                raise DomainError(f"self-loop at vertex {u}")
            if not (0 <= u < self.n and 0 <= v < self.n):
                raise DomainError(f"edge ({u}, {v}) out of range for n={self.n}")
            k = _key(u, v)
            if k in clean:
                raise DomainError(f"duplicate edge {k}")
            w = float(w)
            if w < 0 or not math.isfinite(w):
                raise DomainError(f"edge {k} has invalid weight {w}")
            clean[k] = w
        object.__setattr__(self, "edges", clean)

    @classmethod
    def from_matrix(cls, weights: np.ndarray, allowed=None) -> "WeightedGraph":
        """Complete graph from a symmetric matrix, optionally restricted to ``allowed`` pairs."""
        n = weights.shape[0]
        iu, iv = np.triu_indices(n, 1)
        vals = weights[iu, iv]
        edges = {(int(u), int(v)): float(w) for u, v, w in zip(iu, iv, vals)}
        if allowed is not None:
            edges = {e: w for e, w in edges.items() if allowed(e)}
        return cls(n, edges)

    def weight(self, u: int, v: int) -> float:
        return self.edges[_key(u, v)]

    def neighbors(self) -> list[list[int]]:
        adj: list[list[int]] = [[] for _ in range(self.n)]
        for u, v in self.edges:
            adj[u].append(v)
            adj[v].append(u)
        return adj

    def cost_of(self, edges: Iterable[Edge]) -> float:
        return math.fsum(self.edges[_key(*e)] for e in edges)


@dataclass(frozen=True)
class Matching:
    edges: frozenset[Edge]
    weight: float

    @property
    def vertices(self) -> frozenset[int]:
        return frozenset(v for e in self.edges for v in e)

    def sorted_edges(self) -> list[Edge]:
        return sorted(self.edges)


@dataclass(frozen=True)
class Cover:
    """Result of an edge-cover computation."""

    edges: frozenset[Edge]
    weight: float
    covered: frozenset[int] = frozenset()


def _nx_graph(n: int, weighted: Iterable[tuple[int, int, float]]) -> nx.Graph:
    g = nx.Graph()
    g.add_nodes_from(range(n))
    g.add_weighted_edges_from(weighted)
    return g


def min_weight_perfect_matching(g: WeightedGraph) -> Matching:
    """Minimum-weight perfect matching.

    Raises
    ------
    InfeasibleError
        If ``g`` has no perfect matching (odd order included).
    """
    if g.n % 2:
        raise InfeasibleError(f"no perfect matching on an odd vertex count ({g.n})")
    if g.n == 0:
        return Matching(frozenset(), 0.0)
    top = max(g.edges.values(), default=0.0) + 1.0
    # Max weight among maximum-cardinality matchings of (top - w) is the
    # min-weight perfect matching whenever one exists.
    h = _nx_graph(g.n, ((u, v, top - w) for (u, v), w in g.edges.items()))
    mate = nx.max_weight_matching(h, maxcardinality=True)
    edges = frozenset(_key(u, v) for u, v in mate)
    if 2 * len(edges) != g.n:
        raise InfeasibleError("graph has no perfect matching")
    return Matching(edges, g.cost_of(edges))


def min_weight_edge_cover(g: WeightedGraph) -> Cover:
    """Minimum-weight edge cover.

    With ``mu(v)`` the cheapest edge at ``v``, the cover weight equals
    ``sum(mu) - W`` where ``W`` is a maximum-weight matching under
    ``mu(u) + mu(v) - w(uv)``.  Matched edges plus each unmatched vertex's
    cheapest edge form the cover.
    """
    if g.n == 0:
        return Cover(frozenset(), 0.0, frozenset())
    cheapest: list[tuple[float, int] | None] = [None] * g.n
    for (u, v), w in g.edges.items():
        if cheapest[u] is None or (w, v) < cheapest[u]:
            cheapest[u] = (w, v)
        if cheapest[v] is None or (w, u) < cheapest[v]:
            cheapest[v] = (w, u)
    isolated = [v for v in range(g.n) if cheapest[v] is None]
    if isolated:
        raise InfeasibleError(f"isolated vertices cannot be covered: {isolated}")
    mu = [c[0] for c in cheapest]
    gains = [(u, v, mu[u] + mu[v] - w) for (u, v), w in g.edges.items()]
    h = _nx_graph(g.n, ((u, v, x) for u, v, x in gains if x > 0))
    mate = nx.max_weight_matching(h)
    chosen = {_key(u, v) for u, v in mate}
    matched = {x for e in chosen for x in e}
    for v in range(g.n):
        if v not in matched:
            chosen.add(_key(v, cheapest[v][1]))
    edges = frozenset(chosen)
    return Cover(edges, g.cost_of(edges), frozenset(range(g.n)))


def min_cover_with_quota(g: WeightedGraph, Q: Iterable[int], d: int) -> Cover:
    """Cheapest edge set covering at least ``d`` vertices outside ``Q``.

    Vertices of ``Q`` count as already covered.  Built on an auxiliary graph:
    one zero-weight pendant per ``Q`` vertex, plus ``n - |Q| - d`` excuse
    vertices joined to every vertex outside ``Q`` at a prohibitive weight.
    A minimum edge cover there pays for exactly the excuse edges plus the
    cheapest cover meeting the quota.

    Returns the cover restricted to edges of ``g``; ``covered`` holds the
    vertices those edges touch.
    """
    Q = frozenset(int(q) for q in Q)
    n = g.n
    if any(not 0 <= q < n for q in Q):
        raise DomainError("Q contains vertices outside the graph")
    free = [v for v in range(n) if v not in Q]
    if d < 1:
        raise DomainError(f"quota must be a positive integer, got {d}")
    if d > len(free):
        raise InfeasibleError(f"quota {d} exceeds the {len(free)} vertices outside Q")
    big = 1.0 + math.fsum(g.edges.values())
    n_y = len(free) - d
    edges = dict(g.edges)
    nxt = n
    for q in sorted(Q):
        edges[(q, nxt)] = 0.0
        nxt += 1
    for _ in range(n_y):
        for v in free:
            edges[(v, nxt)] = big
        nxt += 1
    aux = WeightedGraph(nxt, edges)
    cover = min_weight_edge_cover(aux)
    real = frozenset(e for e in cover.edges if e[1] < n)
    covered = frozenset(x for e in real for x in e)
    # When some cover meets the quota, the optimum uses exactly n_y excuse
    # edges, so falling short means no cover of g meets it.
    if len(covered - Q) < d:
        raise InfeasibleError(f"no edge set covers {d} vertices outside Q")
    return Cover(real, g.cost_of(real), covered)


def min_matching_saturating(g: WeightedGraph, M: Matching | Iterable[Edge], Z: Iterable[int],
                            t: int) -> Cover:
    """Cheapest re-matching of ``Z`` that also saturates ``t`` new vertices.

    Edges of ``M`` are free.  The result is a perfect matching on ``Z`` plus
    exactly ``t`` vertices outside ``Z``; ``weight`` counts only edges not in
    ``M``.  Dummy vertices absorb the ``n - |Z| - t`` vertices left unmatched.
    """
    m_edges = frozenset(_key(*e) for e in (M.edges if isinstance(M, Matching) else M))
    Z = frozenset(int(z) for z in Z)
    if Z != frozenset(x for e in m_edges for x in e):
        raise DomainError("Z must equal the vertex set of M")
    if t < 0 or t % 2:
        raise DomainError(f"t must be a nonnegative even integer, got {t}")
    n = g.n
    outside = [v for v in range(n) if v not in Z]
    if t > len(outside):
        raise DomainError(f"t={t} exceeds the {len(outside)} unsaturated vertices")
    missing = [e for e in m_edges if e not in g.edges]
    if missing:
        raise DomainError(f"matching edges {missing} are not in the graph")
    n_dummy = len(outside) - t
    edges = {e: (0.0 if e in m_edges else w) for e, w in g.edges.items()}
    for j in range(n_dummy):
        for v in outside:
            edges[(v, n + j)] = 0.0
    aux = WeightedGraph(n + n_dummy, edges)
    pm = min_weight_perfect_matching(aux)
    real = frozenset(e for e in pm.edges if e[1] < n)
    added = math.fsum(g.edges[e] for e in real if e not in m_edges)
    return Cover(real, added, frozenset(x for e in real for x in e))
