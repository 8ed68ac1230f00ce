"""Command-line entry point: generation, solving, oracle checks and benchmarks."""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from pathlib import Path

from discopt.exceptions import DiscoptError
from discopt.instance import (EDGE_COVER, PERFECT_MATCHING, REVERSE_AUCTION, SHORTEST_PATH,
                              SPANNING_TREE, PotentialLedger, ProblemInstance,
                              normalize_kind, random_instance, read_allocation, read_instance,
                              total_price, validate_solution, write_allocation, write_instance)

log = logging.getLogger("discopt")

KIND_CHOICES = ["edge-cover", "spanning-tree", "perfect-matching", "shortest-path",
                "reverse-auction"]


class UsageError(Exception):
    pass


def solve(instance: ProblemInstance, baseline: bool = False):
    """Dispatch to the solver for ``instance.kind``; returns (allocation, ledger or None)."""
    from discopt.edge_cover import solve_edge_cover
    from discopt.matching import solve_perfect_matching_adaptive
    from discopt.reverse_auction import solve_reverse_auction_greedy
    from discopt.shortest_path import solve_shortest_path
    from discopt.spanning_tree import solve_spanning_tree_adaptive, solve_spanning_tree_baseline

    kind = instance.kind
    if baseline and kind != SPANNING_TREE:
        raise UsageError("--baseline only applies to spanning-tree")
    if kind == EDGE_COVER:
        return solve_edge_cover(instance)
    if kind == SPANNING_TREE:
        if baseline:
            return solve_spanning_tree_baseline(instance), None
        return solve_spanning_tree_adaptive(instance)
    if kind == PERFECT_MATCHING:
        return solve_perfect_matching_adaptive(instance)
    if kind == SHORTEST_PATH:
        return solve_shortest_path(instance)
    return solve_reverse_auction_greedy(instance), None


def _write_json(obj, path) -> None:
    Path(path).write_text(json.dumps(obj, indent=1) + "\n", encoding="utf-8")


def _load_checked(path: str, kind: str | None) -> ProblemInstance:
    instance = read_instance(path)
    if kind is not None and normalize_kind(kind) != instance.kind:
        raise UsageError(f"--kind {kind} does not match the instance kind {instance.kind}")
    return instance


def cmd_solve(args) -> int:
    instance = _load_checked(args.inp, args.kind)
    alloc, ledger = solve(instance, baseline=args.baseline)
    price = total_price(instance, alloc)
    valid = validate_solution(instance, alloc)
    write_allocation(alloc, args.out, price)
    if args.ledger:
        _write_json((ledger or PotentialLedger()).to_dict(), args.ledger)
    print(f"kind={instance.kind} n={instance.n} k={instance.k} price={price:.10g} valid={valid}")
    return 0 if valid else 1


def cmd_oracle(args) -> int:
    from discopt.oracle import exact_solve

    instance = read_instance(args.inp)
    alloc, price = exact_solve(instance)
    if args.out:
        write_allocation(alloc, args.out, price)
    print(f"kind={instance.kind} n={instance.n} k={instance.k} optimum={price:.10g}")
    return 0


def cmd_gen(args) -> int:
    if args.source == "random":
        kind = args.kind
        if kind is None:
            raise UsageError("gen random requires --kind")
        instance = random_instance(args.seed, args.n, args.k, kind,
                                   (args.cost_lo, args.cost_hi), args.curves,
                                   s=args.s, t=args.t, integer_costs=args.integer_costs)
    else:
        from discopt.reverse_auction import generate_from_set_cover, read_set_cover

        if not args.inp:
            raise UsageError("gen set-cover requires --in")
        instance = generate_from_set_cover(read_set_cover(args.inp), args.eps, args.big_m)
    if args.out:
        write_instance(instance, args.out)
    else:
        from discopt.instance import instance_to_dict

        sys.stdout.write(json.dumps(instance_to_dict(instance), indent=1) + "\n")
    return 0


def cmd_validate(args) -> int:
    instance = read_instance(args.inp)
    alloc = read_allocation(args.alloc, instance.kind)
    ok = validate_solution(instance, alloc)
    msg = f"valid={ok}"
    if ok:
        msg += f" price={total_price(instance, alloc):.10g}"
    print(msg)
    return 0 if ok else 1


def bench_instance(instance: ProblemInstance, baseline: bool = False) -> dict:
    from discopt.oracle import exact_solve, potential_violations, ratio_report
    from discopt.shortest_path import build_matching_instance

    alloc, ledger = solve(instance, baseline=baseline)
    _, opt = exact_solve(instance)
    rep = ratio_report(instance, alloc, opt)
    row = {"kind": instance.kind, "n": instance.n, "k": instance.k,
           "valid": validate_solution(instance, alloc), **rep.to_dict()}
    if ledger is not None:
        n = instance.n
        if instance.kind == SHORTEST_PATH:
            n = build_matching_instance(instance).aux.n
        row["potential_sum"] = ledger.total()
        row["potential_violations"] = potential_violations(ledger, opt, n)
    return row


def cmd_bench(args) -> int:
    corpus = Path(args.corpus)
    files = sorted(corpus.glob("*.json"))
    if not files:
        raise UsageError(f"no *.json instances in {corpus}")
    rows = {}
    for f in files:
        rows[f.name] = bench_instance(read_instance(f), baseline=args.baseline)
        log.info("%s: ratio %.4f", f.name, rows[f.name]["ratio"])
    summary = {}
    for row in rows.values():
        agg = summary.setdefault(row["kind"], {"count": 0, "max_ratio": 0.0, "ratios": [],
                                               "failures": 0})
        agg["count"] += 1
        agg["ratios"].append(row["ratio"])
        agg["max_ratio"] = max(agg["max_ratio"], row["ratio"])
        agg["failures"] += int(not (row["pass"] and row["valid"]))
    for agg in summary.values():
        agg["mean_ratio"] = math.fsum(agg.pop("ratios")) / agg["count"]
    report = {"instances": rows, "summary": summary}
    if args.out:
        _write_json(report, args.out)
    for kind in sorted(summary):
        agg = summary[kind]
        print(f"{kind:18s} count={agg['count']:4d} mean={agg['mean_ratio']:.4f} "
              f"max={agg['max_ratio']:.4f} failures={agg['failures']}")
    return 0 if all(a["failures"] == 0 for a in summary.values()) else 1


def cmd_debug(args) -> int:
    from discopt.matching_engine import WeightedGraph, min_weight_edge_cover, min_weight_perfect_matching

    instance = read_instance(args.inp)
    if instance.kind == REVERSE_AUCTION:
        raise UsageError("debug needs a graph instance")
    g = WeightedGraph.from_matrix(instance.agent(args.agent).costs)
    res = min_weight_perfect_matching(g) if args.routine == "perfect-matching" else min_weight_edge_cover(g)
    edges = " ".join(f"{u}-{v}" for u, v in sorted(res.edges))
    print(f"weight={res.weight:.10g} edges={edges}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="discopt", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true", help="debug logging to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", help="run the approximation algorithm for an instance")
    s.add_argument("--kind", choices=KIND_CHOICES)
    s.add_argument("--baseline", action="store_true", help="spanning tree: O(log^2 n) baseline")
    s.add_argument("--in", dest="inp", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--ledger", help="write vertex potentials as JSON")
    s.set_defaults(func=cmd_solve)

    o = sub.add_parser("oracle", help="exact optimum by enumeration (small instances)")
    o.add_argument("--in", dest="inp", required=True)
    o.add_argument("--out")
    o.set_defaults(func=cmd_oracle)

    g = sub.add_parser("gen", help="generate an instance")
    g.add_argument("source", choices=["random", "set-cover"])
    g.add_argument("--kind", choices=KIND_CHOICES)
    g.add_argument("--n", type=int, default=6)
    g.add_argument("--k", type=int, default=2)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--cost-lo", type=float, default=1.0)
    g.add_argument("--cost-hi", type=float, default=10.0)
    g.add_argument("--curves", choices=["identity", "concave", "mixed"], default="concave")
    g.add_argument("--s", type=int)
    g.add_argument("--t", type=int)
    g.add_argument("--integer-costs", action="store_true")
    g.add_argument("--in", dest="inp", help="set cover JSON for 'set-cover'")
    g.add_argument("--eps", type=float, default=1e-6)
    g.add_argument("--big-m", type=float)
    g.add_argument("--out")
    g.set_defaults(func=cmd_gen)

    b = sub.add_parser("bench", help="solver vs oracle ratios over a corpus directory")
    b.add_argument("--corpus", required=True)
    b.add_argument("--out")
    b.add_argument("--baseline", action="store_true")
    b.set_defaults(func=cmd_bench)

    v = sub.add_parser("validate", help="check an allocation against its instance")
    v.add_argument("--in", dest="inp", required=True)
    v.add_argument("--alloc", required=True)
    v.set_defaults(func=cmd_validate)

    d = sub.add_parser("debug", help="run a matching-engine routine on one agent's costs")
    d.add_argument("routine", choices=["perfect-matching", "edge-cover"])
    d.add_argument("--in", dest="inp", required=True)
    d.add_argument("--agent", type=int, default=0)
    d.set_defaults(func=cmd_debug)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"discopt: error: {exc}", file=sys.stderr)
        return 2
    except (DiscoptError, OSError) as exc:
        print(f"discopt: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
