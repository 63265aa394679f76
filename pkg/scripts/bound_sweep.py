"""Measured norms of iterated brackets against the closed-form power bound.

For the canonical field of order n the k-th power is computed exactly and its
norm at sigma compared with the bound; the ratio should stay below 1.
"""
import argparse
import math

from liechart.estimates import power_bound_B, q_ratio
from liechart.formal_algebra import banach_norm, canonical_field, radial_power_apply
from liechart.rational import Q


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--nu", type=int, default=2)
    ap.add_argument("--kmax", type=int, default=6)
    args = ap.parse_args()

    print(f"{'n':>2} {'sigma':>6} {'M':>5} {'q':>7}  ratios k = 1..{args.kmax}")
    for n in (2, 3, 4):
        for sigma in (1.5, 2.0, 3.0):
            for M in (Q(1, 2), Q(1)):
                q = q_ratio(args.nu, n, float(M), sigma)
                N = args.kmax * n + n + 3
                X = canonical_field(M, 1, n, N, args.nu)
                power, ratios = X, []
                for k in range(1, args.kmax + 1):
                    power = radial_power_apply(X, power, 1)
                    got = banach_norm(power.scale(Q(k, math.factorial(k + 1))), sigma)
                    ratios.append(got / power_bound_B(n, k, sigma, float(M), args.nu))
                print(f"{n:>2} {sigma:>6} {float(M):>5} {q:>7.3f}  " + " ".join(f"{r:.3f}" for r in ratios))


if __name__ == "__main__":
    main()
