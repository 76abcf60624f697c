"""Round one random bi-point solution every way the library knows how.

Synthesizes a planar instance, then compares star rounding (which may open a
few extra facilities) against the partition-hierarchy algorithms (which open
exactly k), reporting each candidate's cost relative to the fractional cost.
"""

import random

from bipoint.algfamily import best_of
from bipoint.instances import connection_cost_float, synthesize_random_bipoint
from bipoint.rounding import fractional_budget, sr_cost_bound, star_round


def main():
    eps = 0.1
    sol = synthesize_random_bipoint(
        n_clients=40, n_f1=4, n_f2=12, k=7, seed=11)
    frac = float(sol.cost)
    print(f"instance: 40 clients, |F1|=4, |F2|=12, k=7, "
          f"b = {float(sol.b):.4f}")
    print(f"fractional bi-point cost a*D1 + b*D2 = {frac:.6f}\n")

    rng = random.Random(0)
    t = fractional_budget(eps)
    open_set = star_round(sol, eps, rng)
    cost = connection_cost_float(sol.instance, open_set.facilities)
    print(f"star rounding (eps={eps}, t={t}): opened {len(open_set)} "
          f"facilities (cap k+2t = {sol.instance.k + 2 * t})")
    print(f"  cost = {cost:.6f}  ratio = {cost / frac:.4f}  "
          f"expected-cost bound = {float(sr_cost_bound(sol, eps)) / frac:.4f}")

    res = best_of(sol, eps, rng)
    print(f"\nbest of {len(res.records)} candidates: {res.label} "
          f"with {len(res.open_set)} facilities")
    print(f"  cost = {res.cost:.6f}  ratio = {res.cost / frac:.4f}")
    print("\nper-candidate results (label, cost, facilities):")
    for label, cost, n_open in sorted(res.records, key=lambda r: r[1])[:8]:
        print(f"  {label:<14} {cost:.6f}  {n_open}")


if __name__ == "__main__":
    main()
