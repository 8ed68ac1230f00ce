"""Approximation algorithms for multi-agent combinatorial problems under discounted prices.

Agents quote per-edge (or per-item) costs and a concave discount curve; the
price of an agent's bundle is the curve applied to its linear cost.  The
package provides greedy O(log n) solvers for edge cover, spanning tree,
perfect matching and s-t path, a reverse-auction generator built from set
cover, and an exhaustive oracle for checking all of them on small inputs.
"""

from discopt.concave import DiscountCurve, evaluate, identity_curve, validate
from discopt.edge_cover import best_ratio_set, solve_edge_cover
from discopt.exceptions import (DiscoptError, DomainError, InfeasibleError, OracleRefusal,
                                ParseError, SolutionError)
from discopt.instance import (AgentSpec, Allocation, PotentialLedger, ProblemInstance,
                              random_instance, read_allocation, read_instance, total_price,
                              validate_solution, write_allocation, write_instance)
from discopt.matching import best_augmentation, solve_perfect_matching_adaptive
from discopt.matching_engine import (Matching, WeightedGraph, min_cover_with_quota,
                                     min_matching_saturating, min_weight_edge_cover,
                                     min_weight_perfect_matching)
from discopt.oracle import exact_solve, ratio_report
from discopt.reverse_auction import (SetCoverInstance, generate_from_set_cover, greedy_set_cover,
                                     solve_reverse_auction_greedy)
from discopt.shortest_path import build_matching_instance, extract_path, solve_shortest_path
from discopt.spanning_tree import (contract, prune_to_tree, solve_spanning_tree_adaptive,
                                   solve_spanning_tree_baseline)

__version__ = "0.1.0"
