"""Problem instances, allocations, objective evaluation and file formats.

Graph problems live on the complete graph over ``n`` vertices; each agent
supplies a dense symmetric cost matrix.  Reverse auctions replace edges with
``n`` items and each agent supplies a cost vector.
"""

from __future__ import annotations

import itertools
import json
import math
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Hashable, Iterable, Mapping, Sequence

import numpy as np

from discopt.concave import DiscountCurve, identity_curve, random_curve, validate
from discopt.exceptions import DomainError, ParseError, SolutionError

EDGE_COVER = "edge_cover"
SPANNING_TREE = "spanning_tree"
PERFECT_MATCHING = "perfect_matching"
SHORTEST_PATH = "shortest_path"
REVERSE_AUCTION = "reverse_auction"
KINDS = (EDGE_COVER, SPANNING_TREE, PERFECT_MATCHING, SHORTEST_PATH, REVERSE_AUCTION)
GRAPH_KINDS = KINDS[:4]

# Solvers are polynomial, but dense storage still grows as k * n^2.
MAX_VERTICES = 512

Edge = tuple[int, int]
Element = Hashable  # an Edge for graph kinds, an int item for auctions


def normalize_kind(kind: str) -> str:
    """Accept ``spanning-tree`` as well as ``spanning_tree``."""
    name = kind.strip().lower().replace("-", "_")
    if name not in KINDS:
        raise DomainError(f"unknown problem kind {kind!r}")
    return name


def edge_key(u: int, v: int) -> Edge:
    u, v = int(u), int(v)
    return (u, v) if u < v else (v, u)


def format_edge(e: Edge) -> str:
    return f"{e[0]}-{e[1]}"


def parse_edge(text: str) -> Edge:
    u, sep, v = text.partition("-")
    if not sep:
        raise ValueError(f"edge key {text!r} is not of the form 'u-v'")
    return edge_key(int(u), int(v))


def all_edges(n: int) -> list[Edge]:
    return list(itertools.combinations(range(n), 2))


@dataclass(frozen=True, eq=False)
class AgentSpec:
    """One agent: an edge-cost matrix (or item-cost vector) and a discount curve."""

    id: int
    costs: np.ndarray
    discount: DiscountCurve

    def cost(self, element: Element) -> float:
        if isinstance(element, tuple):
            return float(self.costs[element[0], element[1]])
        return float(self.costs[element])

    def __eq__(self, other):
        if not isinstance(other, AgentSpec):
            return NotImplemented
        return (self.id == other.id and self.discount == other.discount
                and self.costs.shape == other.costs.shape
                and bool(np.array_equal(self.costs, other.costs)))

    __hash__ = None


@dataclass(frozen=True, eq=False)
class ProblemInstance:
    n: int
    agents: tuple[AgentSpec, ...]
    kind: str
    s: int | None = None
    t: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "kind", normalize_kind(self.kind))
        object.__setattr__(self, "agents", tuple(self.agents))
        if self.n < 1:
            raise DomainError("an instance needs at least one vertex or item")
        if self.kind != REVERSE_AUCTION:
            if self.n > MAX_VERTICES:
                raise DomainError(f"n={self.n} exceeds the configured cap {MAX_VERTICES}")
            if self.n < 2:
                raise DomainError("graph problems need n >= 2")
        if not self.agents:
            raise DomainError("an instance needs at least one agent")
        ids = [a.id for a in self.agents]
        if len(set(ids)) != len(ids):
            raise DomainError("agent ids must be distinct")
        shape = (self.n,) if self.kind == REVERSE_AUCTION else (self.n, self.n)
        for a in self.agents:
            if a.costs.shape != shape:
                raise DomainError(f"agent {a.id}: cost array has shape {a.costs.shape}, expected {shape}")
            if not np.all(np.isfinite(a.costs)) or np.any(a.costs < 0):
                raise DomainError(f"agent {a.id}: costs must be finite and nonnegative")
        if self.kind == PERFECT_MATCHING and self.n % 2:
            raise DomainError("perfect matching needs an even number of vertices")
        if self.kind == SHORTEST_PATH:
            if self.s is None or self.t is None or self.s == self.t:
                raise DomainError("shortest path needs distinct endpoints s and t")
            if not (0 <= self.s < self.n and 0 <= self.t < self.n):
                raise DomainError("shortest path endpoints out of range")

    @property
    def k(self) -> int:
        return len(self.agents)

    @property
    def item_count(self) -> int:
        return self.n

    def agent(self, agent_id: int) -> AgentSpec:
        for a in self.agents:
            if a.id == agent_id:
                return a
        raise SolutionError(f"unknown agent id {agent_id}")

    def elements(self) -> list[Element]:
        if self.kind == REVERSE_AUCTION:
            return list(range(self.n))
        return all_edges(self.n)

    def kind_dict(self) -> dict | str:
        if self.kind == SHORTEST_PATH:
            return {"name": self.kind, "s": self.s, "t": self.t}
        if self.kind == REVERSE_AUCTION:
            return {"name": self.kind, "item_count": self.n}
        return self.kind

    def __eq__(self, other):
        if not isinstance(other, ProblemInstance):
            return NotImplemented
        return (self.n, self.kind, self.s, self.t, self.agents) == (
            other.n, other.kind, other.s, other.t, other.agents)

    __hash__ = None


@dataclass(frozen=True)
class Allocation:
    """Assignment of each selected element to exactly one agent."""

    assignment: Mapping[Element, int] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "assignment", dict(self.assignment))

    @classmethod
    def from_bundles(cls, bundles: Mapping[int, Iterable[Element]]) -> "Allocation":
        out: dict = {}
        for agent_id, elems in bundles.items():
            for e in elems:
                if e in out:
                    raise SolutionError(f"element {e} assigned to both {out[e]} and {agent_id}")
                out[e] = agent_id
        return cls(out)

    def bundles(self) -> dict[int, list[Element]]:
        out: dict[int, list] = defaultdict(list)
        for e in sorted(self.assignment):
            out[self.assignment[e]].append(e)
        return dict(out)

    def elements(self) -> list[Element]:
        return sorted(self.assignment)

    def __len__(self):
        return len(self.assignment)


@dataclass(frozen=True)
class LedgerEntry:
    vertex: int
    potential: float
    phase: int
    contracted: bool = False


@dataclass
class PotentialLedger:
    """Per-vertex potentials in the order vertices were first covered.

    ``contracted_total`` counts every contracted vertex created, including a
    terminal one that never receives a potential.
    """

    entries: list[LedgerEntry] = field(default_factory=list)
    contracted_total: int = 0

    def record(self, vertices: Iterable[int], potential: float, phase: int, contracted: bool = False):
        if potential < 0:
            raise DomainError("potentials are nonnegative")
        for v in sorted(vertices):
            self.entries.append(LedgerEntry(int(v), float(potential), phase, contracted))

    def original(self) -> list[LedgerEntry]:
        return [e for e in self.entries if not e.contracted]

    def contracted(self) -> list[LedgerEntry]:
        return [e for e in self.entries if e.contracted]

    def total(self) -> float:
        return math.fsum(e.potential for e in self.entries)

    def to_dict(self) -> dict:
        return {"contracted_total": self.contracted_total,
                "entries": [{"vertex": e.vertex, "potential": e.potential, "phase": e.phase,
                             "contracted": e.contracted} for e in self.entries]}


def _check_element(instance: ProblemInstance, e) -> None:
    if instance.kind == REVERSE_AUCTION:
        if not isinstance(e, (int, np.integer)) or not 0 <= e < instance.n:
            raise SolutionError(f"unknown item {e!r}")
        return
    if (not isinstance(e, tuple) or len(e) != 2 or not e[0] < e[1]
            or not 0 <= e[0] or not e[1] < instance.n):
        raise SolutionError(f"unknown edge {e!r}")


def bundle_costs(instance: ProblemInstance, alloc: Allocation) -> dict[int, float]:
    """Linear cost of each agent's bundle."""
    ids = {a.id: a for a in instance.agents}
    sums: dict[int, list[float]] = {a.id: [] for a in instance.agents}
    for e, agent_id in alloc.assignment.items():
        _check_element(instance, e)
        if agent_id not in ids:
            raise SolutionError(f"unknown agent id {agent_id}")
        sums[agent_id].append(ids[agent_id].cost(e))
    return {a: math.fsum(v) for a, v in sums.items()}


def total_price(instance: ProblemInstance, alloc: Allocation) -> float:
    """Sum of discounted bundle prices."""
    costs = bundle_costs(instance, alloc)
    return math.fsum(instance.agent(a).discount(c) for a, c in costs.items())


class _DSU:
    def __init__(self, n):
        self.parent = list(range(n))

    def find(self, x):
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, a, b) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        self.parent[max(ra, rb)] = min(ra, rb)
        return True


def is_edge_cover(n: int, edges: Iterable[Edge]) -> bool:
    seen = set()
    for u, v in edges:
        seen.add(u)
        seen.add(v)
    return len(seen) == n


def is_spanning_tree(n: int, edges: Sequence[Edge]) -> bool:
    if len(edges) != n - 1:
        return False
    dsu = _DSU(n)
    return all(dsu.union(u, v) for u, v in edges)


def is_perfect_matching(n: int, edges: Iterable[Edge]) -> bool:
    deg = [0] * n
    for u, v in edges:
        deg[u] += 1
        deg[v] += 1
    return all(d == 1 for d in deg)


def is_st_path(n: int, edges: Sequence[Edge], s: int, t: int) -> bool:
    if not edges:
        return False
    adj: dict[int, list[int]] = defaultdict(list)
    for u, v in edges:
        adj[u].append(v)
        adj[v].append(u)
    if len(adj.get(s, ())) != 1 or len(adj.get(t, ())) != 1:
        return False
    if any(len(nb) != 2 for v, nb in adj.items() if v not in (s, t)):
        return False
    # Walk from s; a simple path visits every touched vertex exactly once.
    prev, cur, steps = None, s, 0
    while cur != t:
        nxt = [w for w in adj[cur] if w != prev]
        if not nxt or steps > len(edges):
            return False
        prev, cur = cur, nxt[0]
        steps += 1
    return steps == len(edges)


def validate_solution(instance: ProblemInstance, alloc: Allocation) -> bool:
    """True iff the allocated elements form a member of the feasible family."""
    try:
        for e, a in alloc.assignment.items():
            _check_element(instance, e)
            instance.agent(a)
    except SolutionError:
        return False
    kind, n = instance.kind, instance.n
    if kind == REVERSE_AUCTION:
        return set(alloc.assignment) == set(range(n))
    edges = alloc.elements()
    if kind == EDGE_COVER:
        return is_edge_cover(n, edges)
    if kind == SPANNING_TREE:
        return is_spanning_tree(n, edges)
    if kind == PERFECT_MATCHING:
        return is_perfect_matching(n, edges)
    return is_st_path(n, edges, instance.s, instance.t)


def random_instance(seed: int, n: int, k: int, kind: str,
                    cost_range: tuple[float, float] = (1.0, 10.0),
                    curve_family: str = "concave", *, s: int | None = None,
                    t: int | None = None, integer_costs: bool = False) -> ProblemInstance:
    """Draw a reproducible random instance.

    ``curve_family`` is one of ``identity``, ``concave`` or ``mixed`` (agent 0
    linear, the rest concave).  Shortest-path endpoints default to ``0`` and
    ``n - 1``.
    """
    kind = normalize_kind(kind)
    if n < 2 or k < 1:
        raise DomainError("random instances need n >= 2 and k >= 1")
    if kind == PERFECT_MATCHING and n % 2:
        raise DomainError("perfect matching needs an even number of vertices")
    lo, hi = map(float, cost_range)
    if not 0 <= lo <= hi:
        raise DomainError(f"invalid cost range {cost_range}")
    if curve_family not in ("identity", "concave", "mixed"):
        raise DomainError(f"unknown curve family {curve_family!r}")
    rng = np.random.default_rng(seed)
    scale = max(hi, 1.0) * n / 2
    agents = []
    for a in range(k):
        if kind == REVERSE_AUCTION:
            costs = rng.uniform(lo, hi, size=n)
        else:
            upper = rng.uniform(lo, hi, size=(n, n))
            costs = np.triu(upper, 1)
            costs = costs + costs.T
        if integer_costs:
            costs = np.round(costs)
        if curve_family == "identity" or (curve_family == "mixed" and a == 0):
            curve = identity_curve(scale)
        else:
            curve = random_curve(rng, scale=scale)
        assert validate(curve).ok
        agents.append(AgentSpec(a, costs, curve))
    if kind == SHORTEST_PATH:
        s = 0 if s is None else s
        t = n - 1 if t is None else t
    return ProblemInstance(n, tuple(agents), kind, s=s, t=t)


# ---------------------------------------------------------------- file formats

def instance_to_dict(instance: ProblemInstance) -> dict:
    agents = []
    for a in instance.agents:
        if instance.kind == REVERSE_AUCTION:
            costs = {str(i): float(a.costs[i]) for i in range(instance.n)}
        else:
            costs = {format_edge(e): float(a.costs[e]) for e in all_edges(instance.n)}
        agents.append({"id": a.id, "discount": a.discount.to_dict(), "costs": costs})
    return {"n": instance.n, "kind": instance.kind_dict(), "agents": agents}


def instance_from_dict(data: Mapping) -> ProblemInstance:
    try:
        n = int(data["n"])
        raw_kind = data["kind"]
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"instance: missing or invalid field {exc}") from None
    params = {}
    if isinstance(raw_kind, Mapping):
        params = dict(raw_kind)
        raw_kind = params.pop("name", None)
    if not isinstance(raw_kind, str):
        raise ParseError(f"instance: kind must be a string or object with 'name', got {raw_kind!r}")
    try:
        kind = normalize_kind(raw_kind)
    except DomainError as exc:
        raise ParseError(f"instance: {exc}") from None
    if kind == REVERSE_AUCTION and "item_count" in params and int(params["item_count"]) != n:
        raise ParseError("instance: item_count disagrees with n")
    agents = []
    for idx, entry in enumerate(data.get("agents", [])):
        where = f"agents[{idx}]"
        try:
            agent_id = int(entry["id"])
            curve = DiscountCurve.from_dict(entry["discount"])
            raw_costs = entry["costs"]
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"{where}: missing or invalid field {exc}") from None
        if kind == REVERSE_AUCTION:
            costs = np.zeros(n)
            keys = [str(i) for i in range(n)]
            for i, key in enumerate(keys):
                if key not in raw_costs:
                    raise ParseError(f"{where}.costs: missing cost for item {key}")
                costs[i] = _parse_cost(raw_costs[key], f"{where}.costs[{key}]")
            extra = set(raw_costs) - set(keys)
        else:
            costs = np.zeros((n, n))
            keys = [format_edge(e) for e in all_edges(n)]
            for key in keys:
                if key not in raw_costs:
                    raise ParseError(f"{where}.costs: missing cost for edge {key}")
                u, v = parse_edge(key)
                costs[u, v] = costs[v, u] = _parse_cost(raw_costs[key], f"{where}.costs[{key}]")
            extra = set(raw_costs) - set(keys)
        if extra:
            raise ParseError(f"{where}.costs: unexpected keys {sorted(extra)}")
        agents.append(AgentSpec(agent_id, costs, curve))
    try:
        return ProblemInstance(n, tuple(agents), kind, s=params.get("s"), t=params.get("t"))
    except DomainError as exc:
        raise ParseError(f"instance: {exc}") from None


def _parse_cost(value, where: str) -> float:
    try:
        return float(value)
    except (TypeError, ValueError):
        raise ParseError(f"{where}: cost {value!r} is not a number") from None


def allocation_to_dict(alloc: Allocation, price: float | None = None) -> dict:
    def key(e):
        return format_edge(e) if isinstance(e, tuple) else str(e)

    out = {"assignment": {key(e): alloc.assignment[e] for e in alloc.elements()}}
    if price is not None:
        out["price"] = price
    return out


def allocation_from_dict(data: Mapping, kind: str | None = None) -> Allocation:
    raw = data.get("assignment") if isinstance(data, Mapping) else None
    if not isinstance(raw, Mapping):
        raise ParseError("allocation: missing 'assignment' object")
    auction = kind is not None and normalize_kind(kind) == REVERSE_AUCTION
    out = {}
    for key, agent_id in raw.items():
        try:
            elem = int(key) if auction or "-" not in key else parse_edge(key)
            out[elem] = int(agent_id)
        except (ValueError, TypeError):
            raise ParseError(f"allocation: bad entry {key!r}: {agent_id!r}") from None
    return Allocation(out)


def _dump(obj, path) -> None:
    text = json.dumps(obj, indent=1, sort_keys=False)
    Path(path).write_text(text + "\n", encoding="utf-8")


def _load(path):
    text = Path(path).read_text(encoding="utf-8")
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None


def write_instance(instance: ProblemInstance, path) -> None:
    _dump(instance_to_dict(instance), path)


def read_instance(path) -> ProblemInstance:
    return instance_from_dict(_load(path))


def write_allocation(alloc: Allocation, path, price: float | None = None) -> None:
    _dump(allocation_to_dict(alloc, price), path)


def read_allocation(path, kind: str | None = None) -> Allocation:
    return allocation_from_dict(_load(path), kind)
