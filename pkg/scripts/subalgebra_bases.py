"""Filtered bases of the built-in PDE systems: counts per degree, growth and C.

    python3 scripts/subalgebra_bases.py --degree 12 --dmax 6
"""
import argparse

from liechart import builtins as B
from liechart.factorization import FilteredBasis
from liechart.prolongation import MalgrangeConfig, build_filtered_basis, estimate_C, majorant_seeds, strong_boundedness_check


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--degree", type=int, default=12)
    ap.add_argument("--dmax", type=int, default=6)
    args = ap.parse_args()

    for name in ("cauchy_riemann", "divergence_free", "weighted_divergence_free", "gaussian_ode"):
        sysm = B.system(name)
        sols = build_filtered_basis(sysm, args.dmax, args.degree)
        counts = {}
        for s in sols:
            counts[s.leading_degree] = counts.get(s.leading_degree, 0) + 1
        cfg = MalgrangeConfig.for_system(sysm)
        cfg = cfg.with_C(estimate_C(sysm, sols, cfg.r0).C)
        K = cfg.growth_constant(sysm.q)
        worst = max(strong_boundedness_check(s, K).K_star for s in sols)
        print(f"{name}: elements per degree {counts}")
        print(f"  C = {cfg.C}  K = {K}  worst observed K* = {worst:.4f}")
        if sysm.q == sysm.p and name != "gaussian_ode":
            basis = FilteredBasis.from_solutions(sols, truncation=args.degree)
            print(f"  vector-field basis: {len(basis.elements)} elements, growth rate {basis.growth_rate():.4f}")
        seeds = majorant_seeds(sols[0], K)
        print(f"  majorant seeds of the first element: { {j: float(x) for j, x in list(seeds.items())[:4]} }\n")


if __name__ == "__main__":
    main()
