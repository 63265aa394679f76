"""Degree-by-degree formal solutions of linear first-order PDE systems.

The system ``A(z) y + sum_i B^i(z) y_i = 0`` has ``p`` independent
variables, ``q`` dependent variables and ``r`` equations; ``A`` and each
``B^i`` are polynomial matrix series ``sum_alpha M_alpha z^alpha`` with
``r x q`` blocks. A formal solution ``F = sum_gamma f_gamma z^gamma`` is
stored as a map from exponent tuples to length-``q`` tuples.

Unknowns of a given degree are ordered by :func:`liechart.multiindex.monomials`
and then by dependent-variable index; all row reductions pivot in that
order, so particular solutions and kernel bases are reproducible.
"""
import math
from dataclasses import dataclass, field

from .formal_algebra import FormalVectorField
from .linalg import Inconsistent, nullspace, rref, solve
from .multiindex import mi_factorial, monomials, unit
from .rational import Q, as_rational


class Obstruction(Exception):
    """The order-``order`` equation has no solution: the jet does not extend.

    ``rows`` lists the failing equations as ``(beta, equation_index)``.
    """

    def __init__(self, order, rows):
        super().__init__(f"prolongation obstructed at order {order}: equations {rows}")
        self.order = order
        self.rows = rows


def _matrix(m, r, q):
    out = [[as_rational(x) for x in row] for row in m]
    if len(out) != r or any(len(row) != q for row in out):
        raise ValueError(f"matrix block must be {r}x{q}")
    return out


@dataclass(frozen=True, eq=False)
class PDESystem:
    p: int
    q: int
    r: int
    A: dict  # alpha -> r x q matrix
    B: tuple  # p maps alpha -> r x q matrix
    name: str = ""

    def __post_init__(self):
        if len(self.B) != self.p:
            raise ValueError(f"need {self.p} B-series, got {len(self.B)}")
        for series in (self.A, *self.B):
            for alpha in series:
                if len(alpha) != self.p:
                    raise ValueError(f"multi-index {alpha} has wrong length (p={self.p})")

    @classmethod
    def build(cls, p, q, r, A=None, B=None, name=""):
        """Normalize literal input: ``A``/``B[i]`` map exponent sequences to nested lists."""
        A = {tuple(a): _matrix(m, r, q) for a, m in (A or {}).items()}
        B = tuple({tuple(a): _matrix(m, r, q) for a, m in (Bi or {}).items()} for Bi in (B or [{}] * p))
        return cls(p, q, r, A, B, name)

    def block_norms(self):
        """s -> (||A_s||_s, sum_i ||B^i_s||_s) for every stored degree s."""
        degrees = {sum(a) for a in self.A}
        for Bi in self.B:
            degrees |= {sum(a) for a in Bi}
        out = {}
        for s in sorted(degrees):
            a = malgrange_norm({k: v for k, v in self.A.items() if sum(k) == s}, degree=s)
            b = sum(
                (malgrange_norm({k: v for k, v in Bi.items() if sum(k) == s}, degree=s) for Bi in self.B),
                Q(0),
            )
            out[s] = (a, b)
        return out


@dataclass(eq=False)
class FormalSolution:
    """Truncated formal solution; ``seed_degree`` is the top degree fixed by hand
    (everything above it was produced by prolongation)."""

    p: int
    q: int
    coeffs: dict
    max_degree: int
    seed_degree: int = 0
    kernel_dims: dict = field(default_factory=dict)

    @property
    def leading_degree(self):
        degs = [sum(g) for g, v in self.coeffs.items() if any(v)]
        return min(degs) if degs else None

    def part(self, l):
        return {g: v for g, v in self.coeffs.items() if sum(g) == l}

    def norm(self, l):
        return malgrange_norm(self.part(l), degree=l)

    def norms(self):
        return [self.norm(l) for l in range(self.max_degree + 1)]

    def derivative_part(self, i, t):
        """Degree-t part of dF/dz_i: coefficients (gamma_i + 1) f_{gamma + e_i}."""
        out = {}
        for g, v in self.coeffs.items():
            if sum(g) == t + 1 and g[i] > 0:
                gg = g[:i] + (g[i] - 1,) + g[i + 1:]
                out[gg] = tuple(x * g[i] for x in v)
        return out

    def __eq__(self, other):
        if not isinstance(other, FormalSolution):
            return NotImplemented
        strip = lambda c: {g: v for g, v in c.items() if any(v)}  # noqa: E731
        return (self.p, self.q, self.max_degree) == (other.p, other.q, other.max_degree) and strip(
            self.coeffs
        ) == strip(other.coeffs)

    __hash__ = None


@dataclass(frozen=True)
class MalgrangeConfig:
    """Constants of the a-priori growth estimate.

    ``C`` is the constant of the order-by-order inequality, ``r0`` the
    polydisc radius, and ``M, rho0`` bound the coefficient blocks:
    ``||A_s||_s, sum_i ||B^i_s||_s <= M rho0^s``.
    """

    C: object
    r0: object
    M: object
    rho0: object

    def __post_init__(self):
        for name in ("C", "r0", "M", "rho0"):
            val = as_rational(getattr(self, name))
            if val <= 0:
                raise ValueError(f"{name} must be positive")
            object.__setattr__(self, name, val)

    @classmethod
    def for_system(cls, system, C=1, rho0=1, r0=None):
        """Smallest M compatible with ``rho0`` for this system's stored blocks."""
        rho0 = as_rational(rho0)
        M = max(
            (max(a, b) / rho0**s for s, (a, b) in system.block_norms().items()),
            default=Q(0),
        )
        if M == 0:
            M = Q(1)
        return cls(C=C, r0=Q(1) / (2 * rho0) if r0 is None else r0, M=M, rho0=rho0)

    def with_C(self, C):
        return MalgrangeConfig(C=C, r0=self.r0, M=self.M, rho0=self.rho0)

    def coefficient_violations(self, system):
        """Degrees s at which the block norms exceed M rho0^s."""
        return [
            s
            for s, (a, b) in system.block_norms().items()
            if a > self.M * self.rho0**s or b > self.M * self.rho0**s
        ]

    def growth_constant(self, q_dep):
        """K = rho0 + CMq/r0 + CMq rho0/r0."""
        c = self.C * self.M * q_dep / self.r0
        return self.rho0 + c + c * self.rho0


def _sup(value):
    """Sup norm of a scalar, vector or matrix."""
    if isinstance(value, (list, tuple)):
        if value and isinstance(value[0], (list, tuple)):
            return max((abs(Q(x)) for row in value for x in row), default=Q(0))
        return max((abs(Q(x)) for x in value), default=Q(0))
    return abs(Q(value))


def malgrange_norm(H, degree=None):
    """max_{|beta| = l} (beta!/l!) |h_beta| for a degree-l homogeneous polynomial.

    ``H`` maps exponent tuples to scalars, vectors or matrices.
    """
    degs = {sum(b) for b in H}
    if len(degs) > 1:
        raise ValueError(f"polynomial is not homogeneous (degrees {sorted(degs)})")
    if not H:
        return Q(0)
    l = degs.pop()
    if degree is not None and degree != l:
        raise ValueError(f"expected degree {degree}, got {l}")
    lf = math.factorial(l)
    return max(Q(mi_factorial(b), lf) * _sup(h) for b, h in H.items())


def poly_matvec(Apoly, Ypoly):
    """Product of a matrix-valued and a vector-valued polynomial."""
    out = {}
    for a, m in Apoly.items():
        for b, y in Ypoly.items():
            key = tuple(x + z for x, z in zip(a, b))
            v = [sum((row[j] * y[j] for j in range(len(y))), Q(0)) for row in m]
            if key in out:
                out[key] = [x + z for x, z in zip(out[key], v)]
            else:
                out[key] = v
    return out


def _columns(p, q, degree):
    return {(g, j): idx for idx, (g, j) in enumerate((g, j) for g in monomials(p, degree) for j in range(q))}


def lhs_matrix(system, l):
    """Matrix of the order-l equations in the degree-(l+1) unknowns (uses B^i_0)."""
    p, q, r = system.p, system.q, system.r
    cols = _columns(p, q, l + 1)
    zero = (0,) * p
    rows = []
    for beta in monomials(p, l):
        block = [[Q(0)] * len(cols) for _ in range(r)]
        for i in range(p):
            b0 = system.B[i].get(zero)
            if b0 is None:
                continue
            target = beta[:i] + (beta[i] + 1,) + beta[i + 1:]
            w = beta[i] + 1
            for k in range(r):
                for j in range(q):
                    if b0[k][j]:
                        block[k][cols[(target, j)]] += b0[k][j] * w
        rows.extend(block)
    return rows, len(cols)


def _order_terms(system, coeffs, l, include_leading):
    """Order-l coefficient of A F + sum_i B^i F_i, per beta (length-r lists)."""
    p, q, r = system.p, system.q, system.r
    zero = (0,) * p
    out = {}
    for beta in monomials(p, l):
        acc = [Q(0)] * r
        for alpha, m in system.A.items():
            g = tuple(b - a for b, a in zip(beta, alpha))
            if min(g) < 0:
                continue
            f = coeffs.get(g)
            if f is None:
                continue
            for k in range(r):
                acc[k] += sum((m[k][j] * f[j] for j in range(q)), Q(0))
        for i in range(p):
            for alpha, m in system.B[i].items():
                if alpha == zero and not include_leading:
                    continue
                g = tuple(b - a for b, a in zip(beta, alpha))
                if min(g) < 0:
                    continue
                f = coeffs.get(g[:i] + (g[i] + 1,) + g[i + 1:])
                if f is None:
                    continue
                w = g[i] + 1
                for k in range(r):
                    acc[k] += w * sum((m[k][j] * f[j] for j in range(q)), Q(0))
        out[beta] = acc
    return out


def rhs_polynomial(system, coeffs, l):
    """G_l: minus the order-l terms that involve only coefficients of degree <= l."""
    return {b: [-x for x in v] for b, v in _order_terms(system, coeffs, l, False).items()}


def residual(system, coeffs, l):
    """Full order-l residual of the system at the given coefficients."""
    return _order_terms(system, coeffs, l, True)


def _unpack(vector, p, q, degree):
    out = {}
    for idx, g in enumerate(monomials(p, degree)):
        v = tuple(vector[idx * q:(idx + 1) * q])
        if any(v):
            out[g] = v
    return out


def canonical_rows(vectors, ncols):
    """Reduced echelon form of a spanning set: leading entries 1, pinned order."""
    if not vectors:
        return []
    return [list(r) for r in rref(vectors, ncols).rows]


@dataclass
class StepResult:
    degree: int
    particular: dict
    kernel: list
    rhs_norm: object


def prolong_step(system, coeffs, l):
    """Solve the order-l equation for the degree-(l+1) coefficients.

    Returns a particular solution (free variables zeroed) and a canonical
    kernel basis; raises :class:`Obstruction` if the right side is not in
    the image.
    """
    p, q = system.p, system.q
    mat, ncols = lhs_matrix(system, l)
    G = rhs_polynomial(system, coeffs, l)
    rhs = [x for beta in monomials(p, l) for x in G[beta]]
    try:
        x, kernel = solve(mat, rhs, ncols)
    except Inconsistent as exc:
        betas = list(monomials(p, l))
        rows = [(betas[i // system.r], i % system.r) for i in exc.rows]
        raise Obstruction(l, rows) from None
    gnorm = malgrange_norm({b: v for b, v in G.items()}, degree=l) if G else Q(0)
    kernel = canonical_rows(kernel, ncols)
    return StepResult(
        l + 1,
        _unpack(x, p, q, l + 1),
        [_unpack(v, p, q, l + 1) for v in kernel],
        gnorm,
    )


def prolong(system, seed, N, seed_degree=None):
    """Extend the jet ``seed`` (coefficients up to ``seed_degree``) to degree N."""
    coeffs = {g: tuple(Q(x) for x in v) for g, v in seed.items() if any(v)}
    if seed_degree is None:
        seed_degree = max((sum(g) for g in coeffs), default=0)
    dims = {}
    for l in range(seed_degree, N):
        step = prolong_step(system, coeffs, l)
        coeffs.update(step.particular)
        dims[l + 1] = len(step.kernel)
    return FormalSolution(system.p, system.q, coeffs, N, seed_degree, dims)


def solve_order_zero(system):
    """Kernel basis of (f_0, f_e1, ..., f_ep) -> A_0 f_0 + sum_i B^i_0 f_ei.

    Returned as jets (maps exponent -> vector) in canonical echelon form with
    the f_0 block first.
    """
    p, q, r = system.p, system.q, system.r
    zero = (0,) * p
    ncols = (1 + p) * q
    a0 = system.A.get(zero)
    rows = []
    for k in range(r):
        row = [Q(0)] * ncols
        if a0 is not None:
            for j in range(q):
                row[j] = a0[k][j]
        for i in range(p):
            b0 = system.B[i].get(zero)
            if b0 is not None:
                for j in range(q):
                    row[(1 + i) * q + j] = b0[k][j]
        rows.append(row)
    kern = canonical_rows(nullspace(rows, ncols), ncols)
    jets = []
    for v in kern:
        jet = {}
        if any(v[:q]):
            jet[zero] = tuple(v[:q])
        for i in range(p):
            blk = tuple(v[(1 + i) * q:(2 + i) * q])
            if any(blk):
                jet[unit(p, i)] = blk
        jets.append(jet)
    return jets


def homogeneous_kernel(system, d):
    """Canonical basis of degree-d homogeneous coefficient blocks that solve
    the order-(d-1) equation with all lower coefficients zero."""
    p, q = system.p, system.q
    if d == 0:
        return [{(0,) * p: tuple(Q(int(j == k)) for j in range(q))} for k in range(q)]
    mat, ncols = lhs_matrix(system, d - 1)
    kern = canonical_rows(nullspace(mat, ncols), ncols)
    return [_unpack(v, p, q, d) for v in kern]


def build_filtered_basis(system, d_max, N):
    """Prolonged basis grouped by leading degree 0..d_max, each to degree N.

    Leading degree 0 comes from the order-zero jets with a nonzero constant
    block; degree d >= 1 from the homogeneous kernel at order d-1.
    """
    if d_max > N:
        raise ValueError("d_max must not exceed N")
    out = []
    zero = (0,) * system.p
    for jet in solve_order_zero(system):
        if zero in jet:
            out.append(prolong(system, jet, N, seed_degree=1 if N >= 1 else 0))
    for d in range(1, d_max + 1):
        for seed in homogeneous_kernel(system, d):
            out.append(prolong(system, seed, N, seed_degree=d))
    return out


def check_residual(system, sol):
    """Orders l <= N-1 at which the residual is nonzero (empty means exact)."""
    bad = []
    for l in range(sol.max_degree):
        res = residual(system, sol.coeffs, l)
        if any(any(v) for v in res.values()):
            bad.append(l)
    return bad


# growth control


def phi_sequence(cfg, seeds, L, q_dep):
    """phi_0..phi_L from the convolution recursion.

    ``seeds`` maps indices 0..d to given values (missing = 0); for l >= d
    phi_{l+1} = c/(l+1) [sum_{j<=l} rho0^(l-j) phi_j + sum_{s=1}^{l} rho0^s (l-s+1) phi_{l-s+1}]
    with c = C M q_dep / r0.
    """
    d = max(seeds) if seeds else 0
    phi = [Q(seeds.get(j, 0)) for j in range(d + 1)]
    c = cfg.C * cfg.M * q_dep / cfg.r0
    rho = cfg.rho0
    for l in range(d, L):
        first = sum((rho ** (l - j) * phi[j] for j in range(l + 1)), Q(0))
        second = sum((rho**s * (l - s + 1) * phi[l - s + 1] for s in range(1, l + 1)), Q(0))
        phi.append(c / (l + 1) * (first + second))
    return phi[: L + 1]


def phi_factor(cfg, l, q_dep):
    """l/(l+1) rho0 + c (1 + rho0 l)/(l+1)."""
    c = cfg.C * cfg.M * q_dep / cfg.r0
    return Q(l, l + 1) * cfg.rho0 + c * (1 + cfg.rho0 * l) / (l + 1)


def phi_sequence_telescoped(cfg, seeds, L, q_dep):
    """Same seeds, advanced by the one-term factor from the top seed onward."""
    d = max(seeds) if seeds else 0
    phi = [Q(seeds.get(j, 0)) for j in range(d + 1)]
    for l in range(d, L):
        phi.append(phi_factor(cfg, l, q_dep) * phi[l])
    return phi[: L + 1]


def solution_seeds(sol):
    """phi seeds of a basis solution: its norms up to the seed degree."""
    return {l: sol.norm(l) for l in range(sol.seed_degree + 1)}


def majorant_seeds(sol, K):
    """Seeds phi_j = max(||F||_j, K^(j-d) ||F||_d) for d <= j <= seed degree.

    Raw norms can vanish at an intermediate seed order (phi_1 = 0 for
    y' = zy), which breaks phi_{l+1} <= K phi_l right at the seed; any
    larger seeds still dominate the solution because the recursion is
    monotone in its inputs.
    """
    K = as_rational(K)
    d = sol.leading_degree
    if d is None:
        return {}
    base = sol.norm(d)
    return {j: max(sol.norm(j), K ** (j - d) * base) for j in range(d, max(d, sol.seed_degree) + 1)}


@dataclass
class CEstimate:
    C: object
    C_min: object
    r0: object
    excluded: list  # (sample index, order l)
    ratios: list  # (sample index, l, ratio)


def estimate_C(system, samples, r0):
    """Least C with ||F||_{l+1} <= C/(r0 (l+1)) ||G_l||_l over all prolonged orders.

    Orders where G_l = 0 but the new block is nonzero are excluded and
    listed. A zero fit is floored at 1 in ``C`` (``C_min`` keeps the fit).
    """
    r0 = as_rational(r0)
    best = Q(0)
    excluded, ratios = [], []
    for idx, sol in enumerate(samples):
        for l in range(sol.seed_degree, sol.max_degree):
            fn = sol.norm(l + 1)
            gn = malgrange_norm(rhs_polynomial(system, sol.coeffs, l), degree=l)
            if gn == 0:
                if fn != 0:
                    excluded.append((idx, l))
                continue
            ratio = r0 * (l + 1) * fn / gn
            ratios.append((idx, l, ratio))
            best = max(best, ratio)
    return CEstimate(best if best > 0 else Q(1), best, r0, excluded, ratios)


def growth_violations(sol, cfg, q_dep):
    """Orders l (>= seed degree) where the one-step growth inequality fails."""
    norms = sol.norms()
    c = cfg.C * cfg.M * q_dep / cfg.r0
    rho = cfg.rho0
    bad = []
    for l in range(max(sol.seed_degree, 1), sol.max_degree):
        first = sum((rho ** (l - t) * norms[t] for t in range(l + 1)), Q(0))
        second = sum((rho**s * (l - s + 1) * norms[l - s + 1] for s in range(1, l + 1)), Q(0))
        if norms[l + 1] > c / (l + 1) * (first + second):
            bad.append(l)
    return bad


def rhs_bound_violations(system, sol):
    """Orders where ||G_l|| exceeds q [sum ||A_s|| ||F_t|| + sum_{s>0} sum_i ||B^i_s|| ||F_i||_t]."""
    bn = system.block_norms()
    bad = []
    for l in range(sol.max_degree):
        g = malgrange_norm(rhs_polynomial(system, sol.coeffs, l), degree=l)
        bound = Q(0)
        for s in range(l + 1):
            t = l - s
            a, _ = bn.get(s, (Q(0), Q(0)))
            bound += a * sol.norm(t)
            if s > 0:
                for i in range(system.p):
                    bis = malgrange_norm(
                        {k: v for k, v in system.B[i].items() if sum(k) == s}, degree=s
                    )
                    bound += bis * malgrange_norm(sol.derivative_part(i, t), degree=t)
        if g > system.q * bound:
            bad.append(l)
    return bad


@dataclass
class BoundednessReport:
    d: int
    K: object
    K_star: float
    norms: list
    violations: list

    @property
    def holds(self):
        return not self.violations

    def to_dict(self):
        from .rational import format_rational

        return {
            "d": self.d,
            "K": format_rational(self.K),
            "K_star": self.K_star,
            "norms": [format_rational(x) for x in self.norms],
            "violations": self.violations,
            "holds": self.holds,
        }


def strong_boundedness_check(sol, K, d=None):
    """Check ||F||_{d+k} <= K^k ||F||_d and report the empirical K*."""
    K = as_rational(K)
    d = sol.leading_degree if d is None else d
    if d is None:
        return BoundednessReport(0, K, 0.0, [], [])
    base = sol.norm(d)
    norms = [sol.norm(d + k) for k in range(sol.max_degree - d + 1)]
    viol = [k for k, n in enumerate(norms) if n > K**k * base]
    k_star = 0.0
    for k in range(1, len(norms)):
        if norms[k]:
            k_star = max(k_star, math.exp(math.log(float(norms[k] / base)) / k))
    return BoundednessReport(d, K, k_star, norms, viol)


def fit_analytic_bounds(norms):
    """(M, rho) with norms[l] <= M rho^l for all l, from a log-linear fit."""
    pts = [(l, math.log(float(n))) for l, n in enumerate(norms) if n > 0]
    if not pts:
        return 0.0, 1.0
    if len(pts) == 1:
        rho = 1.0
    else:
        ml = sum(l for l, _ in pts) / len(pts)
        my = sum(y for _, y in pts) / len(pts)
        var = sum((l - ml) ** 2 for l, _ in pts)
        slope = sum((l - ml) * (y - my) for l, y in pts) / var
        rho = max(math.exp(slope), 1e-300)
    M = max(float(n) / rho**l for l, n in enumerate(norms) if n > 0)
    return M * (1 + 1e-12), rho


def solution_to_field(sol, truncation=None):
    """Read a solution with p = q = nu as the vector field sum_i f^i d_i."""
    if sol.p != sol.q:
        raise ValueError("a vector-field solution needs p == q")
    n = sol.max_degree if truncation is None else truncation
    comps = [{} for _ in range(sol.q)]
    for g, v in sol.coeffs.items():
        for i, c in enumerate(v):
            if c:
                comps[i][g] = c
    return FormalVectorField(sol.q, n, comps)
