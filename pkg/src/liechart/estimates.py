"""Closed-form majorant bounds and the doubling/rescaling convergence schedule.

Everything here is binary64. The exact series side lives in
:mod:`liechart.formal_algebra`; tests compare the two with a relative slack
of ``SLACK`` applied in the bound's favour.
"""
import math
from dataclasses import asdict, dataclass, field

SLACK = 1e-9

#: 5/(3 sqrt(pi)), the contraction constant of the schedule at q = 1/2.
CONTRACTION = 5.0 / (3.0 * math.sqrt(math.pi))


class DomainError(ValueError):
    pass


@dataclass(frozen=True)
class BoundParams:
    M: float
    rho: float
    n: int
    sigma: float
    nu: int = 1

    def __post_init__(self):
        if self.M <= 0 or self.rho <= 0:
            raise DomainError("M and rho must be positive")
        if self.n < 2:
            raise DomainError("the majorant bounds need n >= 2")
        if not self.sigma > 1:
            raise DomainError("sigma must be > 1")
        if self.nu < 1:
            raise DomainError("nu must be >= 1")


def _check_sigma(sigma):
    if not sigma > 1:
        raise DomainError(f"sigma must be > 1, got {sigma}")


def lemma3_bound(alpha, sigma):
    """(alpha/ln sigma)^alpha e^-alpha >= sup_m m^alpha sigma^-m."""
    _check_sigma(sigma)
    if alpha <= 0:
        raise DomainError("alpha must be positive")
    return math.exp(alpha * (math.log(alpha / math.log(sigma)) - 1.0))


def integer_power_max(alpha, sigma, m_max=None):
    """max over integers m >= 0 of m^alpha sigma^-m, by enumeration."""
    _check_sigma(sigma)
    if m_max is None:
        # the sequence decreases past alpha/ln(sigma)
        m_max = int(math.ceil(alpha / math.log(sigma))) + 2
    best, arg = 0.0, 0
    for m in range(1, m_max + 1):
        v = math.exp(alpha * math.log(m) - m * math.log(sigma))
        if v > best:
            best, arg = v, m
    return best, arg


def q_ratio(nu, n, M, sigma):
    """sqrt(nu (n+1) M) / (sigma^((n-2)/2) ln sigma)."""
    _check_sigma(sigma)
    return math.sqrt(nu * (n + 1) * M) / (sigma ** ((n - 2) / 2) * math.log(sigma))


def power_bound_B(n, k, sigma, M, nu=1):
    """Upper bound for the (sigma*rho)-norm of (k/(k+1)!) X^(k+1), X canonical."""
    _check_sigma(sigma)
    if n < 2 or k < 1:
        raise DomainError("need n >= 2 and k >= 1")
    base = math.sqrt(nu * (n + 1) * M / sigma ** (n - 2)) * 2 * k / (math.e * math.log(sigma))
    log_b = math.log(M) - n * math.log(sigma) + 2 * k * math.log(base) - math.lgamma(2 * k + 1)
    return math.exp(log_b)


def stirling_relaxed(n, k, sigma, M, nu=1):
    """(M/sigma^n) q^(2k) / sqrt(k pi), which dominates power_bound_B."""
    q = q_ratio(nu, n, M, sigma)
    return M / sigma**n * q ** (2 * k) / math.sqrt(k * math.pi)


def tail_sum_bound(M, n, sigma, nu=1):
    """M/(sqrt(pi) sigma^n) q^2/(1-q^2); valid only when q < 1."""
    q = q_ratio(nu, n, M, sigma)
    if q >= 1:
        raise DomainError(f"q = {q} >= 1: tail bound invalid")
    return M / (math.sqrt(math.pi) * sigma**n) * q * q / (1 - q * q)


# Lambert W (principal branch)

_BRANCH = -1.0 / math.e


def lambert_w(z, tol=1e-16, max_iter=100):
    """Principal branch of w e^w = z by Halley iteration."""
    z = float(z)
    if math.isnan(z) or z < _BRANCH - 1e-16:
        raise DomainError(f"lambert_w needs z >= -1/e, got {z}")
    if z == 0.0:
        return 0.0
    if math.isinf(z):
        return math.inf
    if z <= _BRANCH:
        return -1.0
    if z < -0.25:
        # branch-point series in p = sqrt(2(ez + 1))
        p = math.sqrt(max(0.0, 2.0 * (math.e * z + 1.0)))
        w = -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p**3
    elif z < 3.0:
        w = math.log1p(z) * (1.0 - math.log1p(math.log1p(z)) / (2.0 + math.log1p(z)))
    else:
        lz = math.log(z)
        w = lz - math.log(lz)
    for _ in range(max_iter):
        ew = math.exp(w)
        f = w * ew - z
        wp1 = w + 1.0
        if wp1 == 0.0:
            break
        denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1)
        step = f / denom
        w_new = w - step
        if abs(step) <= tol * (1.0 + abs(w_new)):
            w = w_new
            break
        w = w_new
    return w


def sigma_for_target(p, M, nu=1, q_target=0.5, literal=False):
    """sigma > 1 solving sigma^((p-2)/2) ln sigma = sqrt(nu (p+1) M) / q_target.

    ``literal=True`` drops nu from the right side (the schedule's printed
    form, which agrees with the derivation only for nu = 1).
    """
    if p < 2:
        raise DomainError("sigma_for_target needs p >= 2")
    rhs_nu = 1 if literal else nu
    if M <= 0 or q_target <= 0:
        raise DomainError("right-hand side must be positive")
    b = math.sqrt(rhs_nu * (p + 1) * M) / q_target
    if p == 2:
        return math.exp(b)
    a = (p - 2) / 2
    # x^a ln x = b  <=>  x = exp(W(a b) / a)
    return math.exp(lambert_w(a * b) / a)


def log_sigma_for_target(p, M, nu=1, q_target=0.5, literal=False):
    """ln of :func:`sigma_for_target`, without rounding through exp."""
    if p == 2:
        return math.log(sigma_for_target(p, M, nu, q_target, literal))
    rhs_nu = 1 if literal else nu
    b = math.sqrt(rhs_nu * (p + 1) * M) / q_target
    a = (p - 2) / 2
    return lambert_w(a * b) / a


@dataclass
class ScheduleState:
    i: int
    n: int
    rho: float
    M: float
    sigma: float
    log_sigma: float
    certified: bool
    partial_log_sum: float  # ln(rho_{i+1}/rho_0)

    def to_dict(self):
        return asdict(self)


@dataclass
class ScheduleResult:
    states: list
    converged: bool
    log_rho_limit: float  # extrapolated ln(rho_inf/rho_0)
    rho_limit: float
    ratios: list = field(default_factory=list)

    def to_dict(self):
        return {
            "states": [s.to_dict() for s in self.states],
            "converged": self.converged,
            "log_rho_limit": self.log_rho_limit,
            "rho_limit": self.rho_limit,
            "ratios": self.ratios,
        }


def schedule(n0, rho0, M0, nu=1, steps=30, literal=False):
    """Iterate n -> 2n, rho -> sigma rho, M -> (M/sigma^n)(5/(3 sqrt pi) + 3/(2 sigma^n)).

    sigma_i is chosen so that q = 1/2 for X's bound (5/2) M_i. Steps with
    n_i < 3 are not covered by the bounds: they keep sigma = 1 and M and are
    marked ``certified=False``.
    """
    if n0 < 1 or rho0 <= 0 or M0 <= 0 or steps < 1:
        raise DomainError("schedule needs n0 >= 1, rho0 > 0, M0 > 0, steps >= 1")
    states = []
    n, rho, M = n0, float(rho0), float(M0)
    log_sum = 0.0
    for i in range(steps):
        if n < 3:
            ls, certified, M_next = 0.0, False, M
        else:
            ls = log_sigma_for_target(n, 2.5 * M, nu, 0.5, literal)
            certified = True
            inv = math.exp(-n * ls)  # sigma^-n
            M_next = M * inv * (CONTRACTION + 1.5 * inv)
        log_sum += ls
        states.append(ScheduleState(i, n, rho, M, math.exp(ls), ls, certified, log_sum))
        n, rho, M = 2 * n, rho * math.exp(ls), M_next

    diffs = [s.log_sigma for s in states if s.certified]
    ratios = [a / b for a, b in zip(diffs, diffs[1:]) if b > 0]
    converged = len(ratios) >= 2 and ratios[-1] > 1 and ratios[-2] > 1
    if converged:
        r = 1.0 / ratios[-1]
        limit = log_sum + diffs[-1] * r / (1 - r)
    else:
        limit = math.inf
    return ScheduleResult(states, converged, limit, rho0 * math.exp(limit), ratios)
