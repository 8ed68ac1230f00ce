"""
The harmonic gap of greedy set cover
====================================

Singletons priced 1/(i+1) against one set holding everything at 1.01.
Greedy keeps taking singletons and pays H_n. Feeding the same sets
through the auction generator shows the same gap.
"""

import math

from discopt import generate_from_set_cover, greedy_set_cover, solve_reverse_auction_greedy
from discopt import Allocation, total_price
from discopt.reverse_auction import harmonic_family

for n in (4, 16, 64, 128):
    sc = harmonic_family(n)
    _, weight = greedy_set_cover(sc)
    ai = generate_from_set_cover(sc)
    price = total_price(ai, solve_reverse_auction_greedy(ai))
    # selling everything to the big-set agent is feasible
    upper = total_price(ai, Allocation({i: n for i in range(n)}))
    print(f"n={n:4d}  greedy {weight:.3f}  opt {sc.sets[-1][1]:.2f}  "
          f"auction ratio >= {price / upper:.3f}  ln n = {math.log(n):.3f}")
