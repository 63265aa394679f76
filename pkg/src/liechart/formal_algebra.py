"""Truncated formal vector fields, their norms, and the radial majorant algebra.

A field ``V = sum_i sum_alpha v^i_alpha x^alpha d_i`` is stored as ``nu``
sparse coefficient maps (one per component ``i``, 0-based). The degree of
the term ``x^alpha d_i`` is ``|alpha|``. Every field carries a truncation
``N``: coefficients of degree > N are unknown and never stored.
"""
from dataclasses import dataclass, field
from math import comb

from . import series as S
from .multiindex import monomials, multinomial
from .rational import Q, as_rational


@dataclass(frozen=True, eq=False)
class HomogeneousVectorField:
    """Degree-k homogeneous part: coeffs maps (i, alpha) -> v^i_alpha."""

    degree: int
    nu: int
    coeffs: dict = field(default_factory=dict)

    def __post_init__(self):
        for (i, alpha), c in self.coeffs.items():
            if not 0 <= i < self.nu or len(alpha) != self.nu:
                raise ValueError(f"bad index ({i}, {alpha}) for nu={self.nu}")
            if sum(alpha) != self.degree:
                raise ValueError(f"|{alpha}| != {self.degree}")

    def weighted(self):
        """Coefficients V^i_{k,alpha} = v^i_alpha * alpha!/k! in the basis
        {k!/alpha! x^alpha d_i}."""
        return {key: c / multinomial(key[1]) for key, c in self.coeffs.items()}

    def __eq__(self, other):
        if not isinstance(other, HomogeneousVectorField):
            return NotImplemented
        return (self.degree, self.nu) == (other.degree, other.nu) and {
            k: c for k, c in self.coeffs.items() if c
        } == {k: c for k, c in other.coeffs.items() if c}

    __hash__ = None


class FormalVectorField:
    """Formal vector field truncated at degree ``truncation``."""

    __slots__ = ("nu", "truncation", "components")

    def __init__(self, nu, truncation, components=None):
        if nu < 1:
            raise ValueError("nu must be >= 1")
        if truncation < 0:
            raise ValueError("truncation must be >= 0")
        if components is None:
            components = [{} for _ in range(nu)]
        if len(components) != nu:
            raise ValueError(f"expected {nu} components, got {len(components)}")
        comps = []
        for comp in components:
            clean = {}
            for alpha, c in comp.items():
                alpha = tuple(alpha)
                if len(alpha) != nu:
                    raise ValueError(f"multi-index {alpha} has wrong length")
                if sum(alpha) <= truncation and c:
                    clean[alpha] = Q(c)
            comps.append(clean)
        self.nu = nu
        self.truncation = truncation
        self.components = tuple(comps)

    @classmethod
    def _raw(cls, nu, truncation, components):
        # trusted constructor: components already clean and truncated
        obj = cls.__new__(cls)
        obj.nu = nu
        obj.truncation = truncation
        obj.components = tuple(components)
        return obj

    @classmethod
    def zero(cls, nu, truncation):
        return cls._raw(nu, truncation, [{} for _ in range(nu)])

    @classmethod
    def from_terms(cls, nu, truncation, terms):
        """Build from ``(i, alpha, c)`` triples (i 0-based); repeated keys add up."""
        comps = [{} for _ in range(nu)]
        for i, alpha, c in terms:
            S.add_into(comps[i], {tuple(alpha): as_rational(c)})
        return cls(nu, truncation, comps)

    @classmethod
    def from_parts(cls, nu, truncation, parts):
        comps = [{} for _ in range(nu)]
        for part in parts:
            for (i, alpha), c in part.coeffs.items():
                S.add_into(comps[i], {alpha: Q(c)})
        return cls(nu, truncation, comps)

    def terms(self):
        """Sorted ``(i, alpha, c)`` triples."""
        out = []
        for i, comp in enumerate(self.components):
            for alpha in sorted(comp, key=lambda a: (sum(a), tuple(-x for x in a))):
                out.append((i, alpha, comp[alpha]))
        return out

    def degrees(self):
        return sorted({sum(a) for comp in self.components for a in comp})

    def part(self, k):
        coeffs = {}
        for i, comp in enumerate(self.components):
            for alpha, c in comp.items():
                if sum(alpha) == k:
                    coeffs[(i, alpha)] = c
        return HomogeneousVectorField(k, self.nu, coeffs)

    @property
    def parts(self):
        return {k: self.part(k) for k in self.degrees()}

    def homogeneous(self, k):
        """Degree-k part as a FormalVectorField with the same truncation."""
        return FormalVectorField._raw(
            self.nu, self.truncation, [S.homogeneous_part(c, k) for c in self.components]
        )

    def degree_range(self, lo, hi):
        """Parts with lo <= degree <= hi."""
        return FormalVectorField._raw(
            self.nu,
            self.truncation,
            [{a: c for a, c in comp.items() if lo <= sum(a) <= hi} for comp in self.components],
        )

    @property
    def leading_degree(self):
        """Smallest degree with a nonzero part; None for the zero field."""
        degs = [S.order(c) for c in self.components if c]
        return min(degs) if degs else None

    @property
    def filtration_order(self):
        """Largest q with V in chi_q, i.e. leading degree minus one.

        The zero field is reported at the truncation order: within the stored
        window it vanishes to every order we can see.
        """
        d = self.leading_degree
        return self.truncation if d is None else d - 1

    @property
    def is_positive(self):
        return all(c >= 0 for comp in self.components for c in comp.values())

    def is_zero(self):
        return not any(self.components)

    def with_truncation(self, n):
        if n > self.truncation:
            raise ValueError("cannot raise the truncation of stored data")
        return FormalVectorField._raw(
            self.nu, n, [S.truncate(c, n) for c in self.components]
        )

    def _check(self, other):
        if not isinstance(other, FormalVectorField):
            raise TypeError(f"expected FormalVectorField, got {type(other).__name__}")
        if other.nu != self.nu:
            raise ValueError(f"mismatched nu: {self.nu} vs {other.nu}")
        return min(self.truncation, other.truncation)

    def __add__(self, other):
        n = self._check(other)
        return FormalVectorField._raw(
            self.nu,
            n,
            [S.truncate(S.add(a, b), n) for a, b in zip(self.components, other.components)],
        )

    def __sub__(self, other):
        return self + (-other)

    def __neg__(self):
        return FormalVectorField._raw(self.nu, self.truncation, [S.neg(c) for c in self.components])

    def scale(self, c):
        return FormalVectorField._raw(
            self.nu, self.truncation, [S.scale(comp, as_rational(c)) for comp in self.components]
        )

    def __rmul__(self, c):
        return self.scale(c)

    def __eq__(self, other):
        if not isinstance(other, FormalVectorField):
            return NotImplemented
        return (
            self.nu == other.nu
            and self.truncation == other.truncation
            and self.components == other.components
        )

    __hash__ = None

    def __repr__(self):
        shown = ", ".join(f"{c}*x^{list(a)}d{i + 1}" for i, a, c in self.terms()[:6])
        more = " ..." if sum(len(c) for c in self.components) > 6 else ""
        return f"FormalVectorField(nu={self.nu}, N={self.truncation}, [{shown}{more}])"


class RadialField:
    """sum_m c_m xhat^m d_xhat with xhat = x^1 + ... + x^nu, truncated at N."""

    __slots__ = ("nu", "truncation", "coeffs")

    def __init__(self, nu, truncation, coeffs=None):
        self.nu = nu
        self.truncation = truncation
        self.coeffs = {
            int(m): Q(c) for m, c in (coeffs or {}).items() if c and 0 <= int(m) <= truncation
        }

    def __eq__(self, other):
        if not isinstance(other, RadialField):
            return NotImplemented
        return (self.nu, self.truncation, self.coeffs) == (
            other.nu,
            other.truncation,
            other.coeffs,
        )

    __hash__ = None

    def __repr__(self):
        return f"RadialField(nu={self.nu}, N={self.truncation}, {dict(sorted(self.coeffs.items()))})"

    @property
    def is_positive(self):
        return all(c >= 0 for c in self.coeffs.values())

    def scale(self, c):
        c = Q(c)
        return RadialField(self.nu, self.truncation, {m: v * c for m, v in self.coeffs.items()})

    def __add__(self, other):
        n = min(self.truncation, other.truncation)
        out = dict(self.coeffs)
        for m, c in other.coeffs.items():
            out[m] = out.get(m, 0) + c
        return RadialField(self.nu, n, out)

    def expand(self, truncation=None):
        """Multivariate representative: v^i_alpha = c_m m!/alpha! for |alpha| = m."""
        n = self.truncation if truncation is None else min(truncation, self.truncation)
        comp = {}
        for m, c in self.coeffs.items():
            if m > n:
                continue
            for alpha in monomials(self.nu, m):
                comp[alpha] = c * multinomial(alpha)
        return FormalVectorField._raw(self.nu, n, [dict(comp) for _ in range(self.nu)])


def radial_geometric(coeff, shift, rho, power, nu, truncation):
    """coeff * xhat^shift / (1 - rho*xhat)^power as a RadialField."""
    coeff, rho = as_rational(coeff), as_rational(rho)
    if power < 0:
        raise ValueError("power must be >= 0")
    if power == 0:
        return RadialField(nu, truncation, {shift: coeff})
    out = {shift + j: coeff * comb(j + power - 1, power - 1) * rho**j
           for j in range(truncation - shift + 1)}
    return RadialField(nu, truncation, out)


def canonical_field(M, rho, n, N, nu=1):
    """Truncated expansion of M rho^n xhat^{n+1} / (1 - rho xhat) d_xhat."""
    M, rho = as_rational(M), as_rational(rho)
    if M <= 0 or rho <= 0 or n < 0:
        raise ValueError("canonical_field needs M > 0, rho > 0, n >= 0")
    return RadialField(nu, N, {n + 1 + j: M * rho ** (n + j) for j in range(max(0, N - n))})


def graded_norm(part):
    """Sup norm of a homogeneous field in the weighted basis {k!/alpha! x^alpha d_i}."""
    if isinstance(part, FormalVectorField):
        degs = part.degrees()
        if len(degs) > 1:
            raise ValueError(f"field is not homogeneous (degrees {degs})")
        return max(degree_norms(part).values(), default=Q(0))
    return max((abs(c) for c in part.weighted().values()), default=Q(0))


def degree_norms(V):
    """Map degree k -> ||V_k||_k for every stored degree."""
    if isinstance(V, RadialField):
        return {m: abs(c) for m, c in V.coeffs.items()}
    out = {}
    for comp in V.components:
        for alpha, c in comp.items():
            k = sum(alpha)
            w = abs(c) / multinomial(alpha)
            if w > out.get(k, 0):
                out[k] = w
    return out


def banach_norm(V, rho, offset=1):
    """sup_k ||V_k||_k / rho^(k - offset) over the stored degrees.

    For polynomial fields this is exact; for truncated analytic fields it is
    a lower bound of the true norm. Rational ``rho`` gives an exact ``mpq``;
    a float ``rho`` evaluates in floating point.
    """
    if offset not in (0, 1):
        raise ValueError("offset must be 0 or 1")
    if rho <= 0:
        raise ValueError("rho must be positive")
    norms = degree_norms(V)
    if isinstance(rho, float):
        return max((float(w) / rho ** (k - offset) for k, w in norms.items()), default=0.0)
    rho = as_rational(rho)
    return max((w / rho ** (k - offset) for k, w in norms.items()), default=Q(0))


def apply(X, Y):
    """The field whose i-th coefficient is X (as a derivation) applied to Y^i."""
    n = X._check(Y)
    if X.is_zero() or Y.is_zero():
        return FormalVectorField.zero(X.nu, n)
    xc = [S.truncate(c, n) for c in X.components]
    return FormalVectorField._raw(X.nu, n, [S.derive(xc, yc, n) for yc in Y.components])


def bracket(X, Y):
    """[X, Y] = XY - YX."""
    return apply(X, Y) - apply(Y, X)


def radial_apply(X, Y, nu=None):
    """(f d_xhat)(g d_xhat) = nu f g' d_xhat."""
    nu = X.nu if nu is None else nu
    n = min(X.truncation, Y.truncation)
    out = {}
    for m, g in Y.coeffs.items():
        if m == 0:
            continue
        dg = g * m  # coefficient of xhat^{m-1}
        for j, f in X.coeffs.items():
            d = j + m - 1
            if d <= n:
                out[d] = out.get(d, 0) + nu * f * dg
    return RadialField(nu, n, out)


def radial_power_apply(X, Y, k):
    """X^k Y = X(X(...(X Y))) in the radial algebra."""
    out = Y
    for _ in range(k):
        out = radial_apply(X, out)
    return out


def iterated_majorant(M, N, rho, n, r, alpha, k, nu, truncation):
    """Closed-form majorant of X^k Y for X = M rho^n xhat^(n+1)/(1-rho xhat) and
    Y = N rho^r xhat^(r+1)/(1-rho xhat)^alpha:

        (nu M)^k N rho^(kn+r) (r+1)(n+r+1)...((k-1)n+r+1) xhat^(kn+r+1) / (1-rho xhat)^(alpha+2k)
    """
    M, N, rho = as_rational(M), as_rational(N), as_rational(rho)
    c = (nu * M) ** k * N * rho ** (k * n + r)
    for j in range(k):
        c *= j * n + r + 1
    return radial_geometric(c, k * n + r + 1, rho, alpha + 2 * k, nu, truncation)


def radial_dominated(P, V):
    """|v_m| <= p_m for every stored degree of two radial fields."""
    n = min(P.truncation, V.truncation)
    return all(abs(c) <= P.coeffs.get(m, 0) for m, c in V.coeffs.items() if m <= n)


def majorizes(P, V):
    """True iff |v^i_alpha| <= p^i_alpha for all stored terms up to the common truncation.

    ``P`` is a positive RadialField or a positive FormalVectorField.
    """
    if not P.is_positive:
        raise ValueError("majorant must have non-negative coefficients")
    if P.nu != V.nu:
        raise ValueError(f"mismatched nu: {P.nu} vs {V.nu}")
    n = min(P.truncation, V.truncation)
    if isinstance(P, RadialField):
        for comp in V.components:
            for alpha, c in comp.items():
                m = sum(alpha)
                if m <= n and abs(c) > P.coeffs.get(m, 0) * multinomial(alpha):
                    return False
        return True
    for comp, pcomp in zip(V.components, P.components):
        for alpha, c in comp.items():
            if sum(alpha) <= n and abs(c) > pcomp.get(alpha, 0):
                return False
    return True


def dilation_conjugate(V, lam):
    """Conjugate V by x -> lam*x: the degree-k part is scaled by lam^(k-1).

    Scales norms as ||result||_{lam*rho} = ||V||_rho (offset 1).
    """
    lam = as_rational(lam)
    if lam <= 0:
        raise ValueError("lambda must be positive")
    return FormalVectorField._raw(
        V.nu,
        V.truncation,
        [{a: c * lam ** (sum(a) - 1) for a, c in comp.items()} for comp in V.components],
    )


def weighted_basis_field(nu, truncation, i, alpha, c=1):
    """c * (|alpha|!/alpha!) x^alpha d_i, the unit-norm weighted basis element."""
    alpha = tuple(alpha)
    return FormalVectorField(
        nu, truncation, [({alpha: Q(c) * multinomial(alpha)} if j == i else {}) for j in range(nu)]
    )

