"""Doubling/rescaling schedule: sigma_i, M_i, rho_i and the extrapolated radius loss.

    python3 scripts/schedule_table.py --nu 1 2 3 --steps 30
"""
import argparse
import math

from liechart.estimates import schedule


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n0", type=int, default=4)
    ap.add_argument("--M0", type=float, default=1.0)
    ap.add_argument("--nu", type=int, nargs="+", default=[1, 2])
    ap.add_argument("--steps", type=int, default=30)
    ap.add_argument("--literal", action="store_true")
    args = ap.parse_args()

    for nu in args.nu:
        res = schedule(args.n0, 1.0, args.M0, nu, args.steps, literal=args.literal)
        print(f"# nu = {nu}  n0 = {args.n0}  M0 = {args.M0}")
        print(f"{'i':>3} {'n':>12} {'sigma-1':>12} {'M_i':>12} {'(5/2)^i':>12} {'ln rho_i+1':>12}")
        for s in res.states[:12]:
            print(f"{s.i:>3} {s.n:>12} {s.sigma - 1:>12.4e} {s.M:>12.4e} {2.5**s.i:>12.4e} {s.partial_log_sum:>12.6f}")
        tail = [a / b for a, b in zip([s.log_sigma for s in res.states], [s.log_sigma for s in res.states[1:]])]
        print(f"ln sigma ratio at the end: {tail[-1]:.5f}")
        print(f"ln(rho_inf/rho_0) ~ {res.log_rho_limit:.6f}  rho_inf/rho_0 ~ {math.exp(res.log_rho_limit):.4f}\n")


if __name__ == "__main__":
    main()
