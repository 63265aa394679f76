"""Factorization of an isotropy diffeomorphism into a product of exponentials.

Given ``Phi = id - Z`` with identity linear part, step ``i`` (order
``p_i = 2**i``) splits ``Z = X + Y`` against a filtered basis: ``X`` is the
lift through the basis of the parts of degree ``p_i+1 .. 2 p_i`` and ``Y``
vanishes below degree ``2 p_i + 1``. Then ``Phi <- Phi o Exp X`` and the
order of the new ``Z`` at least doubles. Collecting ``v_i = -X_i`` gives

    Phi = ... o Exp v_2 o Exp v_1 o Exp v_0     (up to the truncation).
"""
from dataclasses import dataclass, field

from . import series as S
from .estimates import schedule
from .flows import FormalDiffeo, pull_back
from .formal_algebra import (
    FormalVectorField,
    banach_norm,
    degree_norms,
    dilation_conjugate,
    weighted_basis_field,
)
from .linalg import Inconsistent, rank, solve
from .multiindex import monomials
from .rational import Q, as_rational, format_rational


class NotInAlgebra(ValueError):
    """A homogeneous residue is not in the span of the basis leading parts."""

    def __init__(self, degree, step=None):
        self.degree = degree
        self.step = step
        super().__init__(self._message())

    def _message(self):
        where = f" at step {self.step}" if self.step is not None else ""
        return f"degree-{self.degree} residue leaves the algebra{where}"

    def at_step(self, step):
        self.step = step
        self.args = (self._message(),)
        return self


def _coords(V):
    """(i, alpha) -> coefficient over all components."""
    return {(i, a): c for i, comp in enumerate(V.components) for a, c in comp.items()}


class FilteredBasis:
    """Basis of an algebra of fields, grouped by leading degree.

    Elements of each leading degree must have linearly independent leading
    parts. The lift of a homogeneous degree-d field is the unique
    combination of degree-d elements whose leading parts reproduce it.
    """

    flat = False

    def __init__(self, nu, elements, truncation=None):
        self.nu = nu
        self.truncation = (
            min(e.truncation for e in elements) if truncation is None else truncation
        )
        self.by_degree = {}
        for e in elements:
            if e.nu != nu:
                raise ValueError("basis element has wrong nu")
            d = e.leading_degree
            if d is None:
                raise ValueError("zero field in basis")
            self.by_degree.setdefault(d, []).append(e.with_truncation(min(e.truncation, self.truncation)))
        for d, elems in self.by_degree.items():
            lead = [_coords(e.homogeneous(d)) for e in elems]
            keys = sorted({k for row in lead for k in row})
            mat = [[row.get(k, Q(0)) for k in keys] for row in lead]
            if rank(mat, len(keys)) != len(elems):
                raise ValueError(f"leading parts of degree {d} are linearly dependent")

    @property
    def elements(self):
        return [e for d in sorted(self.by_degree) for e in self.by_degree[d]]

    def degree_elements(self, d):
        return self.by_degree.get(d, [])

    def lift(self, residue, d):
        """Coefficients and lifted field for a homogeneous degree-d residue."""
        elems = self.by_degree.get(d, [])
        target = _coords(residue)
        lead = [_coords(e.homogeneous(d)) for e in elems]
        keys = sorted(set(target) | {k for row in lead for k in row})
        mat = [[row.get(k, Q(0)) for row in lead] for k in keys]
        rhs = [target.get(k, Q(0)) for k in keys]
        if not elems:
            raise NotInAlgebra(d)
        try:
            coeffs, _ = solve(mat, rhs, len(elems))
        except Inconsistent:
            raise NotInAlgebra(d) from None
        n = min(residue.truncation, self.truncation)
        comps = [{} for _ in range(self.nu)]
        for c, e in zip(coeffs, elems):
            if c:
                for acc, comp in zip(comps, e.components):
                    S.add_into(acc, S.truncate(comp, n), c)
        return coeffs, FormalVectorField._raw(self.nu, n, comps)

    def growth_rate(self):
        """max over elements and k of (||e_{d+k}|| / ||e_d||)^(1/k)."""
        best = 0.0
        for e in self.elements:
            norms = degree_norms(e)
            d = e.leading_degree
            base = float(norms[d])
            for k, w in norms.items():
                if k > d:
                    best = max(best, (float(w) / base) ** (1.0 / (k - d)))
        return best

    def is_bounded(self, rho0=1):
        """||e_{d+k}|| <= rho0^k ||e_d|| for every element (exact)."""
        rho0 = as_rational(rho0)
        for e in self.elements:
            norms = degree_norms(e)
            d = e.leading_degree
            if any(w > rho0 ** (k - d) * norms[d] for k, w in norms.items()):
                return False
        return True

    def normalized(self):
        """Unit leading norms and, if needed, a dilation making the basis bounded
        with rho0 = 1. Returns (basis, lam); lam = 1 means no dilation."""
        rate = self.growth_rate()
        lam = Q(1)
        if rate > 1:
            # rational lam <= 1/rate
            lam = 1 / Q(int(rate * 1024) + 1, 1024)
        elems = []
        for e in self.elements:
            e = dilation_conjugate(e, lam) if lam != 1 else e
            lead = degree_norms(e)[e.leading_degree]
            elems.append(e.scale(1 / lead))
        return FilteredBasis(self.nu, elems, self.truncation), lam

    def restricted(self, min_degree):
        return FilteredBasis(
            self.nu,
            [e for e in self.elements if e.leading_degree >= min_degree],
            self.truncation,
        )

    @classmethod
    def from_solutions(cls, solutions, min_degree=2, truncation=None):
        """Basis of vector fields from prolongation solutions with p = q = nu."""
        from .prolongation import solution_to_field

        fields = [solution_to_field(s, truncation) for s in solutions]
        fields = [f for f in fields if f.leading_degree is not None and f.leading_degree >= min_degree]
        if not fields:
            raise ValueError("no basis elements at the requested degrees")
        return cls(fields[0].nu, fields, truncation)


class FlatBasis(FilteredBasis):
    """All weighted monomials (|alpha|!/alpha!) x^alpha d_i: lifts have no tails."""

    flat = True

    def __init__(self, nu, truncation, min_degree=2):
        self.nu = nu
        self.truncation = truncation
        self.min_degree = min_degree
        self._cache = {}

    @property
    def by_degree(self):
        return {d: self.degree_elements(d) for d in range(self.min_degree, self.truncation + 1)}

    def degree_elements(self, d):
        if d < self.min_degree or d > self.truncation:
            return []
        if d not in self._cache:
            self._cache[d] = [
                weighted_basis_field(self.nu, self.truncation, i, alpha)
                for alpha in monomials(self.nu, d)
                for i in range(self.nu)
            ]
        return self._cache[d]

    def lift(self, residue, d):
        if d < self.min_degree:
            raise NotInAlgebra(d)
        from .multiindex import multinomial

        coeffs = [
            residue.components[i].get(alpha, Q(0)) / multinomial(alpha)
            for alpha in monomials(self.nu, d)
            for i in range(self.nu)
        ]
        n = min(residue.truncation, self.truncation)
        return coeffs, residue.with_truncation(n) if n < residue.truncation else residue

    def growth_rate(self):
        return 0.0

    def is_bounded(self, rho0=1):
        return True

    def normalized(self):
        return self, Q(1)


@dataclass
class DecompositionResult:
    X: FormalVectorField
    Y: FormalVectorField
    p: int
    coefficients: dict  # degree -> list of basis coefficients

    def check_exact(self, Z):
        return self.X + self.Y == Z.with_truncation(self.X.truncation)


def decompose(Z, basis, p=None):
    """Split Z (filtration order >= p) into a free part X and a remainder Y.

    For l = 1..p the degree-(p+l) residue is lifted through the basis and
    the full lift (tail included) is subtracted.
    """
    p = Z.filtration_order if p is None else p
    if p < 1:
        raise ValueError("decomposition needs p >= 1")
    if not Z.is_zero() and Z.filtration_order < p:
        raise ValueError(f"Z has filtration order {Z.filtration_order} < p = {p}")
    n = min(Z.truncation, basis.truncation)
    rest = Z.with_truncation(n)
    X = FormalVectorField.zero(Z.nu, n)
    coefficients = {}
    for d in range(p + 1, min(2 * p, n) + 1):
        residue = rest.homogeneous(d)
        if residue.is_zero():
            continue
        coeffs, lifted = basis.lift(residue, d)
        coefficients[d] = coeffs
        X = X + lifted
        rest = rest - lifted
    return DecompositionResult(X, rest, p, coefficients)


@dataclass
class SplitCertificate:
    rho: object
    M: object
    x_norm: object
    y_norm: object
    x_bound: object
    y_bound: object
    x_violations: list
    y_violations: list
    y_order_ok: bool

    @property
    def holds(self):
        return not self.x_violations and not self.y_violations and self.y_order_ok

    def to_dict(self):
        return {
            "rho": format_rational(self.rho),
            "M": format_rational(self.M),
            "x_norm": format_rational(self.x_norm),
            "y_norm": format_rational(self.y_norm),
            "x_bound": format_rational(self.x_bound),
            "y_bound": format_rational(self.y_bound),
            "x_violations": self.x_violations,
            "y_violations": self.y_violations,
            "y_order_ok": self.y_order_ok,
            "holds": self.holds,
        }


def verify_split_bounds(res, rho, M):
    """Check ||X||_rho <= 5/2 M and ||Y||_rho <= 3/2 M (offset 1, stored degrees)."""
    rho, M = as_rational(rho), as_rational(M)
    if rho < 4:
        raise ValueError("split bounds are certified for rho >= 4 only")
    xb, yb = Q(5, 2) * M, Q(3, 2) * M

    def offenders(V, bound):
        return sorted(k for k, w in degree_norms(V).items() if w / rho ** (k - 1) > bound)

    y_ok = res.Y.is_zero() or res.Y.filtration_order >= 2 * res.p
    return SplitCertificate(
        rho, M,
        banach_norm(res.X, rho), banach_norm(res.Y, rho),
        xb, yb,
        offenders(res.X, xb), offenders(res.Y, yb),
        y_ok,
    )


@dataclass
class StepOutcome:
    X: FormalVectorField
    phi_next: FormalDiffeo
    decomposition: DecompositionResult


def iterate_step(phi, basis, p):
    """x - Z  ->  (x - Z) o Exp X = x - W with W of order >= 2p."""
    Z = phi.id_minus_self()
    res = decompose(Z, basis, p)
    nxt = pull_back(phi, res.X)
    W = nxt.id_minus_self()
    if not W.is_zero() and W.filtration_order < 2 * p:
        raise ArithmeticError(
            f"order did not double: W has order {W.filtration_order} < {2 * p}"
        )
    return StepOutcome(res.X, nxt, res)


@dataclass
class StepDiagnostics:
    index: int
    p: int
    degrees: tuple  # leading-degree window (p+1, 2p)
    residue_order: int  # filtration order of Z at the start of the step
    v_terms: int

    def to_dict(self):
        return {
            "index": self.index,
            "p": self.p,
            "degrees": list(self.degrees),
            "residue_order": self.residue_order,
            "v_terms": self.v_terms,
        }


@dataclass
class FactorizationResult:
    v: list
    residual: FormalDiffeo
    diagnostics: list
    residues: list = field(default_factory=list)  # Z_i at the start of each step
    nu: int = 1
    truncation: int = 0


def factorize(phi, basis, N=None):
    """Factors v_0, v_1, ... with phi = ... o Exp v_1 o Exp v_0 up to degree N."""
    if not phi.has_identity_linear_part:
        raise ValueError("factorization needs identity linear part")
    N = phi.truncation if N is None else N
    phi = phi.with_truncation(min(N, phi.truncation))
    N = phi.truncation
    v, diags, residues = [], [], []
    p, i = 1, 0
    while p < N:
        Z = phi.id_minus_self()
        if Z.is_zero():
            break
        try:
            step = iterate_step(phi, basis, p)
        except NotInAlgebra as exc:
            raise exc.at_step(i) from None
        residues.append(Z)
        v.append(-step.X)
        diags.append(
            StepDiagnostics(i, p, (p + 1, 2 * p), Z.filtration_order, sum(len(c) for c in step.X.components))
        )
        phi = step.phi_next
        p, i = 2 * p, i + 1
    return FactorizationResult(v, phi, diags, residues, phi.nu, N)


def reconstruct(v, N, nu=None):
    """Exp v_n o ... o Exp v_1 o Exp v_0, truncated at N."""
    if nu is None:
        if not v:
            raise ValueError("nu is required for an empty factor list")
        nu = v[0].nu
    psi = FormalDiffeo.identity(nu, N)
    for factor in reversed(v):
        psi = pull_back(psi, factor.with_truncation(min(N, factor.truncation)))
    return psi


def dilation_conjugate_diffeo(phi, lam):
    """x -> phi(lam x)/lam: degree-k terms scaled by lam^(k-1)."""
    lam = as_rational(lam)
    return FormalDiffeo._raw(
        phi.nu,
        phi.truncation,
        [{a: c * lam ** (sum(a) - 1) for a, c in comp.items()} for comp in phi.components],
    )


@dataclass
class ReportRow:
    index: int
    p: int
    rho: float
    scheduled_M: float
    z_norm: float
    v_norm: float
    z_ok: bool
    v_ok: bool

    def to_dict(self):
        return dict(self.__dict__)


@dataclass
class ConvergenceReport:
    rows: list
    rho_limit: float
    log_rho_limit: float
    seed_index: int

    @property
    def all_within(self):
        return all(r.z_ok and r.v_ok for r in self.rows)

    def to_dict(self):
        return {
            "rows": [r.to_dict() for r in self.rows],
            "rho_limit": self.rho_limit,
            "log_rho_limit": self.log_rho_limit,
            "seed_index": self.seed_index,
            "all_within": self.all_within,
        }


def convergence_report(result, rho0, M0=None, nu=None, steps=30, literal=False):
    """Compare measured step norms with the doubling schedule.

    The schedule is seeded at the first step with p >= 3 (earlier steps are
    finite exact computations and carry no bound), with rho = rho0 and
    M = M0 (default: the measured norm of Z at that step).
    """
    nu = result.nu if nu is None else nu
    seed = next((k for k, d in enumerate(result.diagnostics) if d.p >= 3), None)
    if seed is None:
        return ConvergenceReport([], float(rho0), 0.0, -1)
    if M0 is None:
        M0 = float(banach_norm(result.residues[seed], as_rational(rho0)))
        if M0 == 0:
            M0 = 1e-300
    sched = schedule(result.diagnostics[seed].p, float(rho0), float(M0), nu, steps, literal)
    rows = []
    for j, state in enumerate(sched.states):
        k = seed + j
        if k >= len(result.v):
            break
        rho = as_rational(state.rho)
        z = float(banach_norm(result.residues[k], rho))
        vn = float(banach_norm(result.v[k], rho))
        tol = 1e-12
        rows.append(
            ReportRow(k, result.diagnostics[k].p, state.rho, state.M, z, vn,
                      z <= state.M * (1 + tol), vn <= 2.5 * state.M * (1 + tol))
        )
    return ConvergenceReport(rows, sched.rho_limit, sched.log_rho_limit, seed)
