"""
Discount curves and the greedy edge cover
=========================================

Three agents quote prices on the same six vertices. Each one also has a
concave discount curve, so large bundles get cheaper per unit.
"""

import numpy as np

from discopt import exact_solve, random_instance, solve_edge_cover, total_price

inst = random_instance(seed=4, n=6, k=3, kind="edge_cover", curve_family="mixed")

# agent 0 is linear, the others flatten out
for a in inst.agents:
    print(a.id, [round(a.discount(x), 2) for x in (0.0, 5.0, 20.0, 60.0)])

alloc, ledger = solve_edge_cover(inst)
print("bundles:", alloc.bundles())

# every vertex carries the ratio of the phase that covered it
for e in ledger.entries:
    print(f"  v{e.vertex}  phase {e.phase}  p = {e.potential:.3f}")

price = total_price(inst, alloc)
_, opt = exact_solve(inst)
print(f"greedy {price:.3f}  optimum {opt:.3f}  ratio {price / opt:.3f}  "
      f"bound ln n + 1 = {np.log(inst.n) + 1:.3f}")
