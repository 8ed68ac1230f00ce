"""
From s-t paths to perfect matchings
===================================

Each inner vertex is split in two. A path enters through one copy and
leaves through the other, and vertices off the path pair with their twin
at no cost.
"""

from discopt import Allocation, random_instance, total_price
from discopt.instance import bundle_costs
from discopt.shortest_path import build_matching_instance, extract_path, path_to_matching

inst = random_instance(seed=2, n=5, k=2, kind="shortest_path")
gm = build_matching_instance(inst)
print("original vertices", inst.n, "-> auxiliary vertices", gm.aux.n)
print("split:", gm.split)

# s=0 -> 2 -> 3 -> t=4, the middle edge sold by agent 1
path = Allocation({(0, 2): 0, (2, 3): 1, (3, 4): 0})
m = path_to_matching(gm, path)
print("matching:", m.assignment)
print("bundle costs", bundle_costs(inst, path), "==", bundle_costs(gm.aux, m))
print("back again:", extract_path(gm, m).assignment)
print("price", total_price(inst, path), total_price(gm.aux, m))
