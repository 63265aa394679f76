"""Acceptance gate: one check per criterion, each printing a PASS/FAIL line.

Run with pytest (lines appear in the terminal summary) or directly:
``python3 tests/test_acceptance.py``.
"""
import math
import random
import sys
import time
from pathlib import Path

import pytest
import sympy as sp

sys.path.insert(0, str(Path(__file__).parent))
from conftest import ACCEPTANCE_LINES, graded_field, random_field  # noqa: E402

from liechart import builtins as B  # noqa: E402
from liechart.estimates import (  # noqa: E402
    SLACK,
    integer_power_max,
    lambert_w,
    lemma3_bound,
    power_bound_B,
    q_ratio,
    schedule,
    sigma_for_target,
    tail_sum_bound,
)
from liechart.factorization import FilteredBasis, FlatBasis, decompose, factorize, reconstruct, verify_split_bounds  # noqa: E402
from liechart.flows import FormalDiffeo, one_minus_then_exp, one_minus_then_exp_series  # noqa: E402
from liechart.formal_algebra import (  # noqa: E402
    FormalVectorField,
    banach_norm,
    canonical_field,
    iterated_majorant,
    radial_dominated,
    radial_geometric,
    radial_power_apply,
)
from liechart.linalg import rref  # noqa: E402
from liechart.multiindex import monomials  # noqa: E402
from liechart.prolongation import (  # noqa: E402
    MalgrangeConfig,
    build_filtered_basis,
    check_residual,
    estimate_C,
    homogeneous_kernel,
    majorant_seeds,
    phi_sequence,
    strong_boundedness_check,
)
from liechart.rational import Q  # noqa: E402

SEED = 1729


def criterion_1():
    rng = random.Random(SEED)
    t0 = time.perf_counter()
    bad = 0
    for j in range(20):
        nu = 1 + j % 3
        X = graded_field(rng, nu, 12, lo=2)
        bad += one_minus_then_exp(X) != one_minus_then_exp_series(X)
    dt = time.perf_counter() - t0
    return bad == 0 and dt < 60, f"{20 - bad}/20 exact matches in {dt:.2f}s"


def criterion_2():
    checked = bad = 0
    for M, N, rho in ((Q(1), Q(1), Q(1)), (Q(3, 2), Q(2, 3), Q(1, 2))):
        for n in range(2, 6):
            for r in range(1, 5):
                for alpha in (1, 2):
                    for nu in (1, 2):
                        X = radial_geometric(M * rho**n, n + 1, rho, 1, nu, 30)
                        Y = radial_geometric(N * rho**r, r + 1, rho, alpha, nu, 30)
                        for k in range(1, 6):
                            P = iterated_majorant(M, N, rho, n, r, alpha, k, nu, 30)
                            bad += not radial_dominated(P, radial_power_apply(X, Y, k))
                            checked += 1
    return bad == 0, f"{checked - bad}/{checked} exact dominations to degree 30"


def _power_terms(M, n, nu, N):
    X = canonical_field(M, 1, n, N, nu)
    out, power = [], X
    for k in range(1, N):
        power = radial_power_apply(X, power, 1)
        if not power.coeffs:
            break
        out.append((k, power))
    return out


def criterion_3():
    checked = bad = 0
    for nu in (1, 2, 3):
        for M in (Q(1, 2), Q(1), Q(2)):
            for sigma in (1.5, 2.0, 3.0):
                for n in range(2, 6):
                    q = q_ratio(nu, n, float(M), sigma)
                    if q >= 1:
                        continue
                    N = 7 * n + 25
                    terms = _power_terms(M, n, nu, N)
                    tail_a = tail_b = None
                    for k, Pk in terms:
                        a = Pk.scale(Q(k, math.factorial(k + 1)))
                        b = Pk.scale(Q(1, math.factorial(k)))
                        tail_a = a if tail_a is None else tail_a + a
                        tail_b = b if tail_b is None else tail_b + b
                        if k <= 6:
                            checked += 1
                            bad += banach_norm(a, sigma) > power_bound_B(n, k, sigma, float(M), nu) * (1 + SLACK)
                    bound = tail_sum_bound(float(M), n, sigma, nu)
                    checked += 2
                    bad += banach_norm(tail_a, sigma) > bound * (1 + SLACK)
                    bad += banach_norm(tail_b, sigma) > bound * (1 + SLACK)
    return bad == 0, f"{checked - bad}/{checked} bounds hold (q < 1 cases)"


def criterion_4():
    checked = bad = 0
    for alpha in [a / 2 for a in range(1, 25)]:
        for sigma in (1.1, 1.5, 2.0, math.e, 5.0):
            checked += 1
            bad += lemma3_bound(alpha, sigma) < integer_power_max(alpha, sigma)[0] * (1 - SLACK)
    best, _ = integer_power_max(2, math.e)
    exact = abs(best - 4 * math.exp(-2)) <= 1e-12
    return bad == 0 and exact, f"{checked - bad}/{checked} dominations; max m^2 e^-m = {best!r}"


def criterion_5():
    grid = [-1 / math.e + 10 ** (-12 + 12 * j / 499) for j in range(500)]
    grid = [z for z in grid if z < 0] + [10 ** (-10 + 20 * j / 499) for j in range(1000 - len([z for z in grid if z < 0]))]
    worst = max(abs(lambert_w(z) * math.exp(lambert_w(z)) - z) / max(1.0, abs(z)) for z in grid)
    specials = lambert_w(0) == 0 and abs(lambert_w(math.e) - 1) <= 1e-14
    q_err = 0.0
    for p in range(3, 65):
        for M in (1e-4, 0.5, 2.5, 100.0):
            for nu in (1, 2, 3):
                q_err = max(q_err, abs(q_ratio(nu, p, M, sigma_for_target(p, M, nu)) - 0.5))
    ok = len(grid) == 1000 and worst <= 1e-12 and specials and q_err <= 1e-10
    return ok, f"{len(grid)} points, worst residual {worst:.2e}; sigma round trip error {q_err:.2e}"


def criterion_6():
    t0 = time.perf_counter()
    res = schedule(4, 1.0, 1.0, 1, 30)
    dt = time.perf_counter() - t0
    states = res.states
    sig = all(s.sigma > 1 for s in states)
    mb = all(s.M <= 2.5**s.i for s in states)
    diffs = [s.log_sigma for s in states]
    ratios = [diffs[i] / diffs[i + 1] for i in range(10, len(diffs) - 1)]
    ok = sig and mb and min(ratios) >= 1.5 and dt < 1
    return ok, f"min ratio from step 10: {min(ratios):.4f}; ln(rho_inf/rho0) ~ {res.log_rho_limit:.6f}; {dt * 1e3:.1f} ms"


def _one_d(N, coeffs):
    return FormalVectorField(1, N, [{(n + 1,): c for n, c in coeffs.items()}])


def _nz(rng):
    return Q(rng.choice([-1, 1]) * rng.randint(1, 9), rng.randint(1, 9))


def _closed_forms_1d(rng):
    """Both one-dimensional closed forms, compared through sympy expressions."""
    s = sp.Rational
    bad = 0
    for _ in range(10):
        N = 10
        a = {n: _nz(rng) for n in range(2, N)}
        b = {n: _nz(rng) for n in range(2, N)}
        c = {n: _nz(rng) for n in range(3, N)}
        e3, e4 = _one_d(N, b), _one_d(N, c)
        res = decompose(_one_d(N, a), FilteredBasis(1, [e3, e4]), 2)
        A = {n: s(int(v.numerator), int(v.denominator)) for n, v in a.items()}
        Bs = {n: s(int(v.numerator), int(v.denominator)) for n, v in b.items()}
        Cs = {n: s(int(v.numerator), int(v.denominator)) for n, v in c.items()}
        k3 = A[2] / Bs[2]
        k4 = (A[3] - A[2] / Bs[2] * Bs[3]) / Cs[3]
        X_want = {n: k3 * Bs[n] + (k4 * Cs[n] if n in Cs else 0) for n in (2, 3)}
        Y_want = {n: A[n] - A[2] * Bs[n] / Bs[2] - A[3] * Cs[n] / Cs[3] + A[2] * Bs[3] * Cs[n] / (Bs[2] * Cs[3]) for n in range(4, N)}
        got_X = {n: res.X.components[0].get((n + 1,), 0) for n in (2, 3)}
        got_Y = {n: res.Y.components[0].get((n + 1,), 0) for n in range(4, N)}
        bad += any(sp.Rational(str(got_X[n])) != X_want[n] for n in X_want)
        bad += any(sp.Rational(str(got_Y[n])) != Y_want[n] for n in Y_want)
        bad += res.X != e3.scale(a[2] / b[2]) + e4.scale((a[3] - a[2] / b[2] * b[3]) / c[3])
    for _ in range(10):
        N = 12
        a = {n: _nz(rng) for n in range(3, N)}
        c = {n: _nz(rng) for n in range(3, N)}
        d = {n: _nz(rng) for n in range(4, N)}
        f = {n: _nz(rng) for n in range(5, N)}
        e4, e5, e6 = _one_d(N, c), _one_d(N, d), _one_d(N, f)
        res = decompose(_one_d(N, a), FilteredBasis(1, [e4, e5, e6]), 3)
        A, Cs, D, F = ({n: s(int(v.numerator), int(v.denominator)) for n, v in m.items()} for m in (a, c, d, f))
        k4 = A[3] / Cs[3]
        k5 = (A[4] - A[3] / Cs[3] * Cs[4]) / D[4]
        k6 = (A[5] - A[3] / Cs[3] * Cs[5] - (A[4] - A[3] / Cs[3] * Cs[4]) * D[5] / D[4]) / F[5]
        Y_want = {
            n: A[n] - A[3] / Cs[3] * Cs[n] - (A[4] - A[3] / Cs[3] * Cs[4]) * D[n] / D[4]
            - (A[5] - A[3] / Cs[3] * Cs[5] - (A[4] - A[3] / Cs[3] * Cs[4]) * D[5] / D[4]) * F[n] / F[5]
            for n in range(6, N)
        }
        X_want = {n: k4 * Cs[n] + (k5 * D[n] if n in D else 0) + (k6 * F[n] if n in F else 0) for n in range(3, N)}
        got_X = {n: res.X.components[0].get((n + 1,), 0) for n in range(3, N)}
        got_Y = {n: res.Y.components[0].get((n + 1,), 0) for n in range(6, N)}
        bad += any(sp.Rational(str(got_X[n])) != X_want[n] for n in X_want)
        bad += any(sp.Rational(str(got_Y[n])) != Y_want[n] for n in Y_want)
    return bad


def criterion_7():
    rng = random.Random(SEED + 7)
    rho = Q(4)
    bad = 0
    worst_x = worst_y = Q(0)
    for j in range(100):
        nu = 1 + j % 3
        N = 12 if nu < 3 else 9
        if j % 4 == 0:
            # signed canonical-like field saturating the norm at every degree
            n = rng.randint(1, 3)
            C = canonical_field(1, rho, n, N, nu).expand()
            Z = FormalVectorField(nu, N, [{a: c * rng.choice([-1, 1]) for a, c in comp.items()} for comp in C.components])
        else:
            Z = graded_field(rng, nu, N, lo=rng.randint(2, 4))
        M = banach_norm(Z, rho)
        res = decompose(Z, FlatBasis(nu, N))
        cert = verify_split_bounds(res, rho, M)
        exact = res.X + res.Y == Z
        bad += not (exact and cert.holds)
        worst_x = max(worst_x, cert.x_norm / M)
        worst_y = max(worst_y, cert.y_norm / M)
    closed = _closed_forms_1d(random.Random(SEED + 70))
    ok = bad == 0 and closed == 0
    return ok, (f"{100 - bad}/100 splits certified (max ||X||/M = {float(worst_x):.3g}, "
                f"max ||Y||/M = {float(worst_y):.3g}); 1D closed forms (p = 2, 3; 10 each): {closed} mismatches")


def criterion_8():
    rng = random.Random(SEED + 8)
    t0 = time.perf_counter()
    N = 16
    bad = 0
    for j in range(20):
        nu = 1 + j % 2
        Z = graded_field(rng, nu, N, lo=2, per_degree=3)
        phi = FormalDiffeo.id_minus(Z)
        bad += reconstruct(factorize(phi, FlatBasis(nu, N)).v, N, nu) != phi
    mobius = FormalDiffeo(1, N, [{(k,): 1 for k in range(1, N + 1)}])
    v0 = factorize(mobius, FlatBasis(1, N)).v[0]
    lead = v0.homogeneous(v0.leading_degree) == FormalVectorField(1, N, [{(2,): 1}])
    dt = time.perf_counter() - t0
    return bad == 0 and lead and dt < 300, f"{20 - bad}/20 exact round trips, x/(1-x) leading factor x^2 d_x: {lead}; {dt:.2f}s"


def _cr_oracle_rows(d):
    x, y = sp.symbols("x y", real=True)
    w = sp.expand((x + sp.I * y) ** d)
    re, im = sp.re(w), sp.im(w)
    rows = []
    for u, v in ((re, im), (-im, re)):
        pu, pv = sp.Poly(u, x, y), sp.Poly(v, x, y)
        row = []
        for a in monomials(2, d):
            m = x ** a[0] * y ** a[1]
            row += [Q(str(pu.coeff_monomial(m))), Q(str(pv.coeff_monomial(m)))]
        rows.append(row)
    return [list(r) for r in rref(rows, len(rows[0])).rows]


def criterion_9():
    cr = B.cauchy_riemann()
    sols = build_filtered_basis(cr, 8, 12)
    bad = []
    for d in range(9):
        els = [s for s in sols if s.leading_degree == d]
        if len(els) != 2:
            bad.append(f"count at {d}")
            continue
        if any(check_residual(cr, s) for s in els):
            bad.append(f"residual at {d}")
        got = [[c for a in monomials(2, d) for c in s.coeffs.get(a, (Q(0), Q(0)))] for s in els]
        if got != _cr_oracle_rows(d):
            bad.append(f"oracle at {d}")
    dims = [len(homogeneous_kernel(B.divergence_free(), l)) for l in range(9)]
    ok = not bad and dims == [l + 2 for l in range(9)]
    return ok, f"CR: {len(sols)} elements, issues {bad or 'none'}; div-free dims {dims}"


def criterion_10():
    g = B.gaussian_ode()
    L = 20
    (sol,) = build_filtered_basis(g, 0, L)
    cfg = MalgrangeConfig.for_system(g)
    est = estimate_C(g, [sol], cfg.r0)
    cfg = cfg.with_C(est.C)
    q = g.q
    K = cfg.growth_constant(q)
    K_formula = cfg.rho0 + cfg.C * cfg.M * q / cfg.r0 + cfg.C * cfg.M * q * cfg.rho0 / cfg.r0
    phi = phi_sequence(cfg, majorant_seeds(sol, K), L, q)
    dominates = all(sol.norm(l) <= phi[l] for l in range(L + 1))
    steps = all(phi[l + 1] <= K * phi[l] for l in range(L))
    d = sol.leading_degree
    sb = strong_boundedness_check(sol, K, d)
    geometric = all(sol.norm(d + k) <= K**k * sol.norm(d) for k in range(19))
    ok = K == K_formula and dominates and steps and sb.holds and geometric
    return ok, f"C = {est.C}, K = {K}, K* = {sb.K_star:.4f}; phi dominates: {dominates}; phi steps <= K: {steps}"


CRITERIA = {i: globals()[f"criterion_{i}"] for i in range(1, 11)}


def _record(i):
    ok, detail = CRITERIA[i]()
    line = f"criterion {i}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok, line


@pytest.mark.parametrize("i", range(1, 11))
def test_criterion(i):
    ok, line = _record(i)
    assert ok, line


if __name__ == "__main__":
    results = [_record(i)[0] for i in CRITERIA]
    sys.exit(0 if all(results) else 1)
