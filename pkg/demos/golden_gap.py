"""Tour of the golden-ratio gap family.

Builds the instance for a small k, checks the bi-point validity identities
exactly, enumerates the vertices of the cost polytope with exact constants,
and confirms by brute force that no k-subset of facilities beats the bound.
"""

import math
from fractions import Fraction

from bipoint import golden

PHI = (1 + math.sqrt(5)) / 2


def main():
    k = 8
    c = golden.golden_constants(k)
    print(f"k = {k}: |F1| = {c.t_B}, |F2| = {c.t_B + c.t_C}, "
          f"b = {c.b_q} = {float(c.b_q):.6f}")

    summary = golden.gap_summary(k)
    print("validity identities:", summary["checks"])
    print(f"fractional cost = {summary['cost_exact']} "
          f"= {summary['cost']:.6f} (unit in the large-k limit)")

    print("\ncost polytope vertices (exact constants):")
    for v in golden.extreme_points():
        print(f"  x_A={float(v.x_A):.6f} x_B={float(v.x_B):.6f} "
              f"x_C={float(v.x_C):.6f}  f={float(v.value):.12f}")
    print(f"sqrt(phi) = {math.sqrt(PHI):.12f}; four vertices tie there, "
          f"the fifth sits at 3/phi + 2/sqrt(phi) - 2 = "
          f"{3 / PHI + 2 / math.sqrt(PHI) - 2:.12f}")

    sol = golden.build_golden(k)
    opt_set, opt = golden.brute_force_opt(sol.instance)
    bound = golden.rational_vertex_bound(c)
    print(f"\nexplicit instance: {len(sol.instance.facilities)} facilities, "
          f"{len(sol.instance.clients)} clients")
    print(f"brute-force optimum over all k-subsets: {float(opt):.9f}")
    print(f"vertex bound from the same rational constants: "
          f"{float(bound):.9f}")
    print("optimum >= bound:", opt >= bound,
          "(equality here: the bound is tight)" if opt == bound else "")

    identities = golden.verify_gap_identities()
    print("\n50-digit check that the gap value is sqrt(phi):")
    print(" ", identities["min_value_50_digits"])


if __name__ == "__main__":
    main()
