"""Formal diffeomorphisms fixing the origin and Lie-series exponentials.

A :class:`FormalDiffeo` stores the coordinate series ``Phi^i(x)`` directly,
linear part included. ``Exp X`` is the time-one flow of ``X`` and is
computed by the Lie series ``sum_k X^k(x)/k!`` (``X^k`` = k-fold derivation
applied to the coordinate functions); no ODE integration is involved.
"""
from math import factorial

from . import series as S
from .formal_algebra import FormalVectorField, apply
from .linalg import inverse as matrix_inverse
from .multiindex import unit
from .rational import Q


class FormalDiffeo:
    """``nu`` truncated series with zero constant term."""

    __slots__ = ("nu", "truncation", "components")

    def __init__(self, nu, truncation, components):
        if len(components) != nu:
            raise ValueError(f"expected {nu} components, got {len(components)}")
        comps = []
        for comp in components:
            clean = {}
            for alpha, c in comp.items():
                alpha = tuple(alpha)
                if len(alpha) != nu:
                    raise ValueError(f"multi-index {alpha} has wrong length")
                if not any(alpha) and c:
                    raise ValueError("a diffeo fixing the origin has no constant term")
                if sum(alpha) <= truncation and c:
                    clean[alpha] = Q(c)
            comps.append(clean)
        self.nu = nu
        self.truncation = truncation
        self.components = tuple(comps)

    @classmethod
    def _raw(cls, nu, truncation, components):
        obj = cls.__new__(cls)
        obj.nu = nu
        obj.truncation = truncation
        obj.components = tuple(components)
        return obj

    @classmethod
    def identity(cls, nu, truncation):
        return cls._raw(nu, truncation, [{unit(nu, i): Q(1)} for i in range(nu)])

    @classmethod
    def from_field(cls, V):
        """Read the coordinate series of a map off a field's components."""
        return cls(V.nu, V.truncation, V.components)

    @classmethod
    def id_minus(cls, Z):
        """The map x -> x - Z(x)."""
        return cls.from_field(_identity_field(Z.nu, Z.truncation) - Z)

    def as_field(self):
        return FormalVectorField._raw(self.nu, self.truncation, self.components)

    def id_minus_self(self):
        """Z with self = id - Z."""
        return _identity_field(self.nu, self.truncation) - self.as_field()

    @property
    def linear_part(self):
        return [
            [self.components[i].get(unit(self.nu, j), Q(0)) for j in range(self.nu)]
            for i in range(self.nu)
        ]

    @property
    def has_identity_linear_part(self):
        lin = self.linear_part
        return all(lin[i][j] == (i == j) for i in range(self.nu) for j in range(self.nu))

    def with_truncation(self, n):
        if n > self.truncation:
            raise ValueError("cannot raise the truncation of stored data")
        return FormalDiffeo._raw(self.nu, n, [S.truncate(c, n) for c in self.components])

    def is_identity(self):
        return self == FormalDiffeo.identity(self.nu, self.truncation)

    def __eq__(self, other):
        if not isinstance(other, FormalDiffeo):
            return NotImplemented
        return (self.nu, self.truncation, self.components) == (
            other.nu,
            other.truncation,
            other.components,
        )

    __hash__ = None

    def __call__(self, other):
        return compose(self, other)

    def __repr__(self):
        return f"FormalDiffeo(nu={self.nu}, N={self.truncation}, {list(self.components)})"


def _identity_field(nu, n):
    return FormalVectorField._raw(nu, n, [{unit(nu, i): Q(1)} for i in range(nu)])


def _require_isotropic(X):
    if not X.is_zero() and X.filtration_order < 1:
        raise ValueError(
            f"exponential needs filtration order >= 1, field has {X.filtration_order}"
        )


def compose(phi, psi):
    """(phi o psi)(x) = phi(psi(x)), truncated at the smaller truncation."""
    if phi.nu != psi.nu:
        raise ValueError(f"mismatched nu: {phi.nu} vs {psi.nu}")
    n = min(phi.truncation, psi.truncation)
    inner = [S.truncate(c, n) for c in psi.components]
    cache = {}
    comps = [S.substitute(f, inner, n, cache) for f in phi.components]
    return FormalDiffeo._raw(phi.nu, n, comps)


def inverse(phi):
    """Formal inverse by degree-by-degree fixed point; needs invertible linear part."""
    nu, n = phi.nu, phi.truncation
    linv = matrix_inverse(phi.linear_part)
    # phi = L x + H(x); psi = L^{-1}(x - H(psi))
    higher = [{a: c for a, c in comp.items() if sum(a) >= 2} for comp in phi.components]
    psi = [
        {unit(nu, j): linv[i][j] for j in range(nu) if linv[i][j]} for i in range(nu)
    ]
    for d in range(2, n + 1):
        cache = {}
        h = [S.substitute(f, psi, d, cache) for f in higher]
        new = []
        for i in range(nu):
            comp = {unit(nu, j): linv[i][j] for j in range(nu) if linv[i][j]}
            for j in range(nu):
                if linv[i][j]:
                    S.add_into(comp, h[j], -linv[i][j])
            new.append(comp)
        psi = new
    return FormalDiffeo._raw(nu, n, psi)


def pull_back(phi, X, n=None):
    """phi o Exp X, via the Lie series sum_k X^k(phi^i)/k!."""
    _require_isotropic(X)
    n = min(phi.truncation, X.truncation) if n is None else n
    xc = [S.truncate(c, n) for c in X.components]
    comps = []
    for f in phi.components:
        term = S.truncate(f, n)
        total = dict(term)
        k = 1
        while term:
            term = S.scale(S.derive(xc, term, n), Q(1, k))
            S.add_into(total, term)
            k += 1
        comps.append(total)
    return FormalDiffeo._raw(phi.nu, n, comps)


def exp_field(X, N=None):
    """Exp X = sum_k X^k(x)/k! truncated at N (default: X's truncation)."""
    n = X.truncation if N is None else min(N, X.truncation)
    return pull_back(FormalDiffeo.identity(X.nu, n), X, n)


def field_power(X, k):
    """X^k(x) as a field: X^1 = X, X^(k+1) = X(X^k)."""
    if k < 1:
        raise ValueError("k must be >= 1")
    out = X
    for _ in range(k - 1):
        out = apply(X, out)
    return out


def _power_series(X, weight):
    """sum_{k>=1} weight(k) X^(k+1) until the powers leave the window."""
    _require_isotropic(X)
    total = FormalVectorField.zero(X.nu, X.truncation)
    if X.is_zero():
        return total
    power = X
    k = 1
    while True:
        power = apply(X, power)
        if power.is_zero():
            return total
        total = total + power.scale(weight(k))
        k += 1


def one_minus_then_exp(X):
    """(id - X) o Exp X, computed by explicit composition."""
    _require_isotropic(X)
    return compose(FormalDiffeo.id_minus(X), exp_field(X))


def one_minus_then_exp_series(X):
    """id - sum_{k>=1} k/(k+1)! X^(k+1), built from iterated derivations only."""
    tail = _power_series(X, lambda k: Q(k, factorial(k + 1)))
    return FormalDiffeo.id_minus(tail)


def apply_series_tail(X, N=None):
    """sum_{k>=1} X^(k+1)/k!, i.e. the part of X o Exp X beyond X."""
    if N is not None:
        X = X.with_truncation(min(N, X.truncation))
    return _power_series(X, lambda k: Q(1, factorial(k)))
