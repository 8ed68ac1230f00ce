"""Exhaustive exact solvers and approximation-ratio reports.

Every feasible structure is enumerated (inclusion-minimal ones for edge
covers, since dropping an edge never raises a price).  The best split of a
structure among agents is found exactly without trying all ``k^|S|``
assignments: a concave piecewise-linear curve is the minimum of its segment
lines, so for each choice of one line per agent the price is linear and each
element simply goes to the agent whose chosen line makes it cheapest.
"""

from __future__ import annotations

import functools
import itertools
import math
import os
from dataclasses import dataclass

import numpy as np

from discopt.exceptions import OracleRefusal
from discopt.instance import (EDGE_COVER, PERFECT_MATCHING, REVERSE_AUCTION, SHORTEST_PATH,
                              SPANNING_TREE, Allocation, PotentialLedger, ProblemInstance,
                              all_edges, total_price)

DEFAULT_CAP = 8
PATH_AUX_CAP = 12
AGENT_CAP = 3
LINE_CHOICE_CAP = 1 << 16
RATIO_TOL = 1e-9


def oracle_cap() -> int:
    return int(os.environ.get("DISCOPT_ORACLE_CAP", DEFAULT_CAP))


# ------------------------------------------------------------ structure lists

@functools.lru_cache(maxsize=None)
def _edge_index(n: int) -> dict[tuple[int, int], int]:
    return {e: i for i, e in enumerate(all_edges(n))}


def perfect_matchings(n: int) -> list[list[tuple[int, int]]]:
    def rec(rest):
        if not rest:
            yield []
            return
        u = rest[0]
        for j in range(1, len(rest)):
            v = rest[j]
            for tail in rec(rest[1:j] + rest[j + 1:]):
                yield [(u, v)] + tail

    return list(rec(tuple(range(n))))


def spanning_trees(n: int) -> np.ndarray:
    """All ``n^(n-2)`` labelled trees as an ``(N, n-1, 2)`` array, decoded from Pruefer codes."""
    if n == 2:
        return np.array([[[0, 1]]])
    codes = np.array(list(itertools.product(range(n), repeat=n - 2)), dtype=np.int64)
    N = codes.shape[0]
    rows = np.arange(N)
    deg = np.ones((N, n), dtype=np.int64)
    np.add.at(deg, (np.repeat(rows, n - 2), codes.ravel()), 1)
    edges = np.empty((N, n - 1, 2), dtype=np.int64)
    for i in range(n - 2):
        leaf = np.argmax(deg == 1, axis=1)
        edges[:, i, 0] = leaf
        edges[:, i, 1] = codes[:, i]
        deg[rows, leaf] = 0
        deg[rows, codes[:, i]] -= 1
    last = np.argsort(deg != 1, axis=1, kind="stable")[:, :2]
    edges[:, n - 2, 0] = last[:, 0]
    edges[:, n - 2, 1] = last[:, 1]
    return np.sort(edges, axis=2)


def minimal_edge_covers(n: int) -> list[list[tuple[int, int]]]:
    """Inclusion-minimal edge covers: spanning forests of stars with at least one edge each."""
    out = []

    def rec(rest, acc):
        if not rest:
            out.append(sorted(acc))
            return
        u, others = rest[0], rest[1:]
        for size in range(1, len(others) + 1):
            for block in itertools.combinations(others, size):
                left = tuple(x for x in others if x not in block)
                members = (u,) + block
                if size == 1:
                    rec(left, acc + [tuple(sorted(members))])
                    continue
                for centre in members:
                    star = [tuple(sorted((centre, x))) for x in members if x != centre]
                    rec(left, acc + star)

    rec(tuple(range(n)), [])
    return out


def st_paths(n: int, s: int, t: int) -> list[list[tuple[int, int]]]:
    inner = [v for v in range(n) if v not in (s, t)]
    out = []
    for r in range(len(inner) + 1):
        for mid in itertools.permutations(inner, r):
            seq = (s,) + mid + (t,)
            out.append([tuple(sorted(p)) for p in zip(seq, seq[1:])])
    return out


@functools.lru_cache(maxsize=32)
def _structures(kind: str, n: int, s=None, t=None) -> np.ndarray:
    """Padded element-index matrix; padding points at index ``E`` (cost 0)."""
    idx = _edge_index(n)
    E = len(idx)
    if kind == SPANNING_TREE:
        trees = spanning_trees(n)
        flat = trees[:, :, 0] * n + trees[:, :, 1]
        lookup = np.full(n * n, -1, dtype=np.int64)
        for (u, v), i in idx.items():
            lookup[u * n + v] = i
        return lookup[flat]
    if kind == PERFECT_MATCHING:
        lists = perfect_matchings(n)
    elif kind == EDGE_COVER:
        lists = minimal_edge_covers(n)
    elif kind == SHORTEST_PATH:
        lists = st_paths(n, s, t)
    else:
        raise ValueError(kind)
    width = max(len(x) for x in lists)
    mat = np.full((len(lists), width), E, dtype=np.int64)
    for r, edges in enumerate(lists):
        mat[r, :len(edges)] = [idx[e] for e in edges]
    return mat


# ------------------------------------------------------------------ solvers

def _check_caps(instance: ProblemInstance, cap: int | None) -> None:
    cap = oracle_cap() if cap is None else cap
    kind, n, k = instance.kind, instance.n, instance.k
    if kind == SHORTEST_PATH:
        aux = 2 * (n - 2) + 2
        if aux > PATH_AUX_CAP or n > cap:
            raise OracleRefusal(
                f"shortest path with n={n} (auxiliary graph {aux} vertices) exceeds the oracle "
                f"caps n<={cap}, auxiliary<={PATH_AUX_CAP}")
    elif kind != REVERSE_AUCTION and n > cap:
        raise OracleRefusal(f"{kind} with n={n} exceeds the oracle cap n<={cap}")
    if kind != REVERSE_AUCTION and k > AGENT_CAP:
        raise OracleRefusal(f"{kind} with k={k} agents exceeds the oracle cap k<={AGENT_CAP}")
    choices = math.prod(len(a.discount.lines()) for a in instance.agents)
    if choices > LINE_CHOICE_CAP:
        raise OracleRefusal(f"{choices} segment combinations exceed the oracle cap {LINE_CHOICE_CAP}")


def _element_costs(instance: ProblemInstance) -> np.ndarray:
    """``(k, E)`` cost matrix in element order, agents sorted by id."""
    agents = sorted(instance.agents, key=lambda a: a.id)
    if instance.kind == REVERSE_AUCTION:
        return np.array([a.costs for a in agents], dtype=float)
    iu, iv = np.triu_indices(instance.n, 1)
    return np.array([a.costs[iu, iv] for a in agents], dtype=float)


def exact_solve(instance: ProblemInstance, cap: int | None = None) -> tuple[Allocation, float]:
    """Exact optimum by enumeration.

    Raises
    ------
    OracleRefusal
        If the instance exceeds the configured size caps.
    """
    _check_caps(instance, cap)
    agents = sorted(instance.agents, key=lambda a: a.id)
    ids = [a.id for a in agents]
    costs = _element_costs(instance)
    k, E = costs.shape
    if instance.kind == REVERSE_AUCTION:
        structs = np.arange(E)[None, :]
    else:
        structs = _structures(instance.kind, instance.n, instance.s, instance.t)
    line_sets = [a.discount.lines() for a in agents]
    best = None
    for choice in itertools.product(*(range(len(ls)) for ls in line_sets)):
        slopes = np.array([line_sets[a][c][0] for a, c in enumerate(choice)])
        offset = math.fsum(line_sets[a][c][1] for a, c in enumerate(choice))
        scaled = slopes[:, None] * costs
        owner = np.argmin(scaled, axis=0)
        w = np.append(scaled[owner, np.arange(E)], 0.0)
        totals = w[structs].sum(axis=1)
        r = int(np.argmin(totals))
        value = float(totals[r]) + offset
        if best is None or value < best[0]:
            best = (value, r, owner)
    _, r, owner = best
    elements = instance.elements()
    chosen = [int(i) for i in structs[r] if i < E]
    alloc = Allocation({elements[i]: ids[int(owner[i])] for i in chosen})
    return alloc, total_price(instance, alloc)


def structures(instance: ProblemInstance) -> list[list]:
    """Every enumerated structure of the instance as element lists."""
    elements = instance.elements()
    if instance.kind == REVERSE_AUCTION:
        return [elements]
    mat = _structures(instance.kind, instance.n, instance.s, instance.t)
    E = len(elements)
    return [[elements[i] for i in row if i < E] for row in mat]


def best_partition_naive(instance: ProblemInstance, elements) -> tuple[Allocation, float]:
    """Try all ``k^|S|`` agent assignments of one structure."""
    ids = sorted(a.id for a in instance.agents)
    best = None
    for combo in itertools.product(ids, repeat=len(elements)):
        alloc = Allocation(dict(zip(elements, combo)))
        price = total_price(instance, alloc)
        if best is None or price < best[1]:
            best = (alloc, price)
    return best


def exact_solve_naive(instance: ProblemInstance) -> tuple[Allocation, float]:
    """Reference oracle trying every structure and every agent partition; tiny inputs only."""
    best = None
    for elems in structures(instance):
        cand = best_partition_naive(instance, elems)
        if best is None or cand[1] < best[1]:
            best = cand
    return best


# ------------------------------------------------------------------ reports

@dataclass(frozen=True)
class RatioReport:
    alg: float
    opt: float
    ratio: float
    bound: float
    passed: bool

    def to_dict(self) -> dict:
        return {"alg": self.alg, "opt": self.opt, "ratio": self.ratio, "bound": self.bound,
                "pass": self.passed}


def ratio_report(instance: ProblemInstance, alloc: Allocation,
                 opt: float | None = None) -> RatioReport:
    """Compare a solver's price with the exact optimum against ``ln n + 1``."""
    alg = total_price(instance, alloc)
    if opt is None:
        opt = exact_solve(instance)[1]
    if opt > 0:
        ratio = alg / opt
    else:
        ratio = 1.0 if alg <= RATIO_TOL else math.inf
    bound = math.log(instance.n) + 1.0
    passed = (1.0 - RATIO_TOL) <= ratio <= bound * (1.0 + RATIO_TOL)
    return RatioReport(alg, opt, ratio, bound, passed)


def potential_violations(ledger: PotentialLedger, opt: float, n: int) -> list[str]:
    """Entries breaking ``p(v_i) <= OPT/(n-i+1)`` or ``p(z_j) <= OPT/(n'-j)`` for ``j < n'``."""
    out = []
    slack = RATIO_TOL * max(1.0, opt)
    for i, e in enumerate(ledger.original(), start=1):
        limit = opt / (n - i + 1)
        if e.potential > limit + slack:
            out.append(f"p(v_{i}={e.vertex})={e.potential:.6g} > OPT/{n - i + 1}={limit:.6g}")
    n_c = ledger.contracted_total
    for j, e in enumerate(ledger.contracted(), start=1):
        if j >= n_c:
            continue
        limit = opt / (n_c - j)
        if e.potential > limit + slack:
            out.append(f"p(z_{j}={e.vertex})={e.potential:.6g} > OPT/{n_c - j}={limit:.6g}")
    return out
