"""Anatomy of the partition hierarchy on a small instance.

Shows the star forest (primary and secondary centers for each F1 facility),
the g-value split of F1 into levels, the derived size fractions, and every
parameter vector that is simultaneously valid at this point.
"""

import random
from fractions import Fraction

from bipoint.algfamily import (
    G_M2,
    derive_gamma_env,
    enumerate_algm,
    execute,
    param_env,
)
from bipoint.instances import synthesize_random_bipoint
from bipoint.partition import build_partition, build_stars, g_value


def main():
    sol = synthesize_random_bipoint(n_clients=25, n_f1=4, n_f2=10, k=6,
                                    seed=21)
    forest = build_stars(sol)
    print(f"F1 = {sorted(sol.F1)}, F2 = {sorted(sol.F2)}, "
          f"b = {float(sol.b):.4f}")
    for i in sorted(sol.F1):
        g = g_value(sol.instance, i, forest)
        print(f"  facility {i}: primary {forest.sigmaB[i]}, "
              f"secondary {forest.sigmaC[i]}, g = {float(g):.4f}")

    part = build_partition(sol, forest, G_M2)
    print(f"\nlevels (threshold g_1 = {float(G_M2[0])}):")
    for t in range(part.m):
        print(f"  A_{t + 1} = {sorted(part.A[t])}  "
              f"B_{t + 1} = {sorted(part.B[t])}  "
              f"C_{t + 1} = {sorted(part.C[t])}")

    env = param_env(sol, part)
    print("\nsize fractions:",
          {k: f"{float(v):.4f}" for k, v in env.items()})

    specs = enumerate_algm(part.m, env)
    print(f"\n{len(specs)} valid parameter vectors at this point:")
    rng = random.Random(0)
    for vals in specs:
        res = execute(vals, part, rng)
        shown = {W: str(v) for W, v in vals.items()}
        print(f"  {shown} -> opened {sum(res.counts.values())} "
              f"of k={sol.instance.k}")


if __name__ == "__main__":
    main()
