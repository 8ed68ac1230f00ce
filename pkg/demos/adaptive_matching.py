"""
Rematching in the adaptive greedy
=================================

Four vertices, one linear agent. The first phase grabs the cheap edge 01.
The second phase would have to pay 10 for 23, so it rematches 0 and 1
through 02 and 13 instead.
"""

import numpy as np

from discopt import AgentSpec, ProblemInstance, identity_curve, total_price
from discopt.matching import MatchState, best_augmentation, solve_perfect_matching_adaptive

C = np.zeros((4, 4))
for (u, v), w in {(0, 1): 1, (2, 3): 10, (0, 2): 3, (1, 3): 3, (0, 3): 9, (1, 2): 9}.items():
    C[u, v] = C[v, u] = w
inst = ProblemInstance(4, (AgentSpec(0, C, identity_curve(20)),), "perfect_matching")

first = best_augmentation(inst, MatchState(4))
print("phase 0:", sorted(first.F), "ratio", first.ratio)

state = MatchState(4, first.F, {e: (0, 0) for e in first.F})
second = best_augmentation(inst, state)
# edges already in M are free, so 02 + 13 costs 6 for two new vertices
print("phase 1:", sorted(second.F), "ratio", second.ratio)

alloc, ledger = solve_perfect_matching_adaptive(inst)
print("final:", alloc.elements(), "price", total_price(inst, alloc),
      "sum of potentials", ledger.total())
