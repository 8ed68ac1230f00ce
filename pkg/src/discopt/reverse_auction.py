"""Discounted reverse auctions and the set-cover reduction into them."""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from discopt.concave import DiscountCurve, identity_curve
from discopt.exceptions import DomainError, InfeasibleError, ParseError
from discopt.instance import REVERSE_AUCTION, AgentSpec, Allocation, ProblemInstance

DEFAULT_EPS = 1e-6


@dataclass(frozen=True)
class SetCoverInstance:
    universe: int
    sets: tuple[tuple[frozenset[int], float], ...]

    def __post_init__(self):
        sets = tuple((frozenset(int(x) for x in s), float(w)) for s, w in self.sets)
        object.__setattr__(self, "sets", sets)
        for s, w in sets:
            if w < 0 or not math.isfinite(w):
                raise DomainError(f"set weights must be finite and nonnegative, got {w}")
            if any(not 0 <= x < self.universe for x in s):
                raise DomainError(f"set {sorted(s)} has elements outside the universe")

    @property
    def feasible(self) -> bool:
        return frozenset().union(*(s for s, _ in self.sets)) == frozenset(range(self.universe))

    def weight(self, chosen) -> float:
        return math.fsum(self.sets[i][1] for i in chosen)

    def to_dict(self) -> dict:
        return {"universe": self.universe,
                "sets": [{"elements": sorted(s), "weight": w} for s, w in self.sets]}

    @classmethod
    def from_dict(cls, data) -> "SetCoverInstance":
        try:
            return cls(int(data["universe"]),
                       tuple((entry["elements"], entry["weight"]) for entry in data["sets"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"set cover: missing or invalid field {exc}") from None


def read_set_cover(path) -> SetCoverInstance:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: line {exc.lineno}: {exc.msg}") from None
    return SetCoverInstance.from_dict(data)


def default_big_m(sc: SetCoverInstance, eps: float) -> float:
    total = math.fsum(w for _, w in sc.sets)
    return 2.0 * (total + 1.0) / eps


def generate_from_set_cover(sc: SetCoverInstance, eps: float = DEFAULT_EPS,
                            bigM: float | None = None) -> ProblemInstance:
    """Auction with one agent per set.

    Agent ``a_S`` charges ``w(S)`` for each item of ``S`` and ``bigM`` for any
    other item.  Her curve is the identity up to ``w(S)`` and has slope
    ``eps`` afterwards, so once she sells one item the rest of ``S`` is
    nearly free.
    """
    if not 0 < eps < 1:
        raise DomainError(f"eps must lie in (0, 1), got {eps}")
    total = math.fsum(w for _, w in sc.sets)
    if bigM is None:
        bigM = default_big_m(sc, eps)
    if not bigM > total / eps:
        raise DomainError(f"bigM={bigM} must exceed total weight / eps = {total / eps}")
    if not sc.sets:
        raise DomainError("set cover instance has no sets")
    agents = []
    for idx, (members, w) in enumerate(sc.sets):
        costs = np.full(sc.universe, float(bigM))
        costs[sorted(members)] = w
        curve = DiscountCurve([(0.0, 0.0), (w, w)], eps) if w > 0 else identity_curve(1.0)
        agents.append(AgentSpec(idx, costs, curve))
    return ProblemInstance(sc.universe, tuple(agents), REVERSE_AUCTION)


def greedy_set_cover(sc: SetCoverInstance) -> tuple[list[int], float]:
    """Classical greedy: repeatedly take the set with least weight per new element."""
    if not sc.feasible:
        raise InfeasibleError("the sets do not cover the universe")
    covered: set[int] = set()
    chosen: list[int] = []
    while len(covered) < sc.universe:
        best = None
        for i, (s, w) in enumerate(sc.sets):
            gain = len(s - covered)
            if gain and (best is None or w / gain < best[0]):
                best = (w / gain, i)
        chosen.append(best[1])
        covered |= sc.sets[best[1]][0]
    return chosen, sc.weight(chosen)


def exact_set_cover(sc: SetCoverInstance) -> tuple[list[int], float]:
    """Exhaustive minimum-weight set cover (small instances only)."""
    if not sc.feasible:
        raise InfeasibleError("the sets do not cover the universe")
    full = frozenset(range(sc.universe))
    best: tuple[float, list[int]] | None = None
    m = len(sc.sets)
    for r in range(m + 1):
        for combo in itertools.combinations(range(m), r):
            if frozenset().union(*(sc.sets[i][0] for i in combo)) == full:
                w = sc.weight(combo)
                if best is None or w < best[0]:
                    best = (w, list(combo))
    return best[1], best[0]


def harmonic_family(n: int, delta: float = 0.01) -> SetCoverInstance:
    """Singletons ``{i}`` of weight ``1/(i+1)`` plus the whole universe at ``1 + delta``.

    Greedy pays the harmonic number ``H_n``; the optimum is ``1 + delta``.
    """
    sets = [(frozenset([i]), 1.0 / (i + 1)) for i in range(n)]
    sets.append((frozenset(range(n)), 1.0 + delta))
    return SetCoverInstance(n, tuple(sets))


def solve_reverse_auction_greedy(ai: ProblemInstance) -> Allocation:
    """Greedy over (agent, item subset) ratios.

    For a fixed agent and subset size, the cheapest subset of uncovered
    items is a prefix of those items sorted by her cost, so each phase scans
    ``k * n`` prefixes.
    """
    if ai.kind != REVERSE_AUCTION:
        raise DomainError(f"expected a reverse_auction instance, got {ai.kind}")
    uncovered = set(range(ai.n))
    out: dict[int, int] = {}
    agents = sorted(ai.agents, key=lambda a: a.id)
    while uncovered:
        best = None
        for a in agents:
            items = sorted(uncovered, key=lambda i: (a.costs[i], i))
            prefix = np.cumsum(a.costs[items])
            for j in range(1, len(items) + 1):
                ratio = a.discount(float(prefix[j - 1])) / j
                key = (ratio, a.id, sorted(items[:j]))
                if best is None or key < best:
                    best = key
        _, agent_id, chosen = best
        for i in chosen:
            out[i] = agent_id
        uncovered -= set(chosen)
    return Allocation(out)
