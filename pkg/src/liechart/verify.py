"""Invariant suite over the built-in examples (``liechart verify --suite builtin``)."""
import math
import random
from dataclasses import dataclass

from . import builtins as B
from .estimates import integer_power_max, lambert_w, schedule
from .factorization import FlatBasis, factorize, reconstruct
from .flows import FormalDiffeo, one_minus_then_exp, one_minus_then_exp_series
from .formal_algebra import FormalVectorField
from .multiindex import monomials
from .prolongation import (
    MalgrangeConfig,
    build_filtered_basis,
    check_residual,
    estimate_C,
    homogeneous_kernel,
    majorant_seeds,
    phi_sequence,
    strong_boundedness_check,
)
from .rational import Q


@dataclass
class Check:
    name: str
    ok: bool
    detail: str = ""

    def to_dict(self):
        return {"name": self.name, "ok": self.ok, "detail": self.detail}


def _random_field(rng, nu, N, lo=2, density=0.25):
    comps = [{} for _ in range(nu)]
    for d in range(lo, N + 1):
        for a in monomials(nu, d):
            for i in range(nu):
                if rng.random() < density:
                    comps[i][a] = Q(rng.randint(-4, 4), rng.randint(1, 3))
    return FormalVectorField(nu, N, comps)


def check_identity(seed=0):
    rng = random.Random(seed)
    bad = 0
    for nu in (1, 2):
        for _ in range(3):
            X = _random_field(rng, nu, 7, density=0.3)
            bad += one_minus_then_exp(X) != one_minus_then_exp_series(X)
    return Check("flows: (id - X) o Exp X series identity", bad == 0, f"{bad} mismatches")


def check_cr(d_max=4, N=8):
    sols = build_filtered_basis(B.cauchy_riemann(), d_max, N)
    counts = {}
    for s in sols:
        counts[s.leading_degree] = counts.get(s.leading_degree, 0) + 1
    residual_bad = sum(bool(check_residual(B.cauchy_riemann(), s)) for s in sols)
    ok = all(counts.get(d) == 2 for d in range(d_max + 1)) and not residual_bad
    return Check("prolongation: Cauchy-Riemann basis", ok, f"counts {counts}, residual failures {residual_bad}")


def check_divergence_free(L=6):
    dims = [len(homogeneous_kernel(B.divergence_free(), l)) for l in range(L + 1)]
    return Check("prolongation: divergence-free kernel dims", dims == [l + 2 for l in range(L + 1)], str(dims))


def check_gaussian(N=14):
    g = B.gaussian_ode()
    sols = build_filtered_basis(g, 0, N)
    cfg = MalgrangeConfig.for_system(g)
    cfg = cfg.with_C(estimate_C(g, sols, cfg.r0).C)
    K = cfg.growth_constant(g.q)
    ok = True
    for s in sols:
        phi = phi_sequence(cfg, majorant_seeds(s, K), N, g.q)
        ok &= all(s.norm(l) <= phi[l] for l in range(N + 1))
        ok &= all(phi[l + 1] <= K * phi[l] for l in range(s.leading_degree, N))
        ok &= strong_boundedness_check(s, K).holds
    return Check("prolongation: y' = zy strong boundedness", ok, f"K = {K}")


def check_flat_factorization(N=12):
    phi = FormalDiffeo(1, N, [{(k,): Q(1) for k in range(1, N + 1)}])
    res = factorize(phi, FlatBasis(1, N))
    lead_ok = res.v[0].homogeneous(2) == FormalVectorField(1, N, [{(2,): 1}])
    ok = lead_ok and reconstruct(res.v, N, 1) == phi
    return Check("factorization: x/(1-x) round trip", ok, f"{len(res.v)} factors")


def check_random_factorization(seed=0, N=10):
    rng = random.Random(seed)
    bad = 0
    for nu in (1, 2):
        for _ in range(3):
            Z = _random_field(rng, nu, N, density=0.3)
            phi = FormalDiffeo.id_minus(Z)
            bad += reconstruct(factorize(phi, FlatBasis(nu, N)).v, N, nu) != phi
    return Check("factorization: random round trips", bad == 0, f"{bad} mismatches")


def check_schedule():
    res = schedule(4, 1.0, 1.0, 1, 30)
    ok = all(s.sigma > 1 for s in res.states) and all(s.M <= 2.5**s.i for s in res.states)
    return Check("estimates: schedule sigma > 1, M_i <= (5/2)^i", ok, f"ln(rho_inf/rho_0) ~ {res.log_rho_limit:.6g}")


def check_power_max():
    best, _ = integer_power_max(2, math.e)
    ok = abs(best - 4 * math.exp(-2)) <= 1e-12
    return Check("estimates: max m^2 e^-m = 4 e^-2", ok, repr(best))


def check_lambert():
    worst = 0.0
    for k in range(200):
        z = -1 / math.e + 1e-9 + k * 0.37
        w = lambert_w(z)
        worst = max(worst, abs(w * math.exp(w) - z) / max(1.0, abs(z)))
    return Check("estimates: Lambert W round trip", worst <= 1e-12, f"worst {worst:.3g}")


SUITES = {
    "builtin": [
        check_identity,
        check_cr,
        check_divergence_free,
        check_gaussian,
        check_flat_factorization,
        check_random_factorization,
        check_schedule,
        check_power_max,
        check_lambert,
    ],
}


def run_suite(name="builtin"):
    if name not in SUITES:
        raise KeyError(f"unknown suite {name!r}; known: {sorted(SUITES)}")
    return [fn() for fn in SUITES[name]]
