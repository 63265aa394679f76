"""Multi-index combinatorics.

Multi-indices are plain tuples of non-negative ints everywhere in the hot
paths; :class:`MultiIndex` is a tuple subclass that adds the named
operations and compares/hashes identically to the bare tuple.
"""
from functools import lru_cache
from math import comb, factorial, prod


class MultiIndex(tuple):
    """Exponent vector ``alpha`` over ``nu`` variables."""

    def __new__(cls, entries):
        entries = tuple(int(a) for a in entries)
        if any(a < 0 for a in entries):
            raise ValueError(f"negative exponent in {entries}")
        return super().__new__(cls, entries)

    @property
    def nu(self):
        return len(self)

    @property
    def order(self):
        """|alpha|"""
        return sum(self)

    @property
    def factorial(self):
        """alpha! = prod alpha_j!"""
        return mi_factorial(self)

    def __add__(self, other):
        return MultiIndex(a + b for a, b in zip(self, other, strict=True))

    def __sub__(self, other):
        return MultiIndex(a - b for a, b in zip(self, other, strict=True))

    def evaluate(self, z):
        """z**alpha, componentwise."""
        return prod(zi**a for zi, a in zip(z, self, strict=True))

    @classmethod
    def unit(cls, nu, i):
        return cls(1 if j == i else 0 for j in range(nu))

    @classmethod
    def zero(cls, nu):
        return cls((0,) * nu)


@lru_cache(maxsize=None)
def mi_factorial(alpha):
    return prod(factorial(a) for a in alpha)


@lru_cache(maxsize=None)
def multinomial(alpha):
    """|alpha|! / alpha!"""
    return factorial(sum(alpha)) // mi_factorial(tuple(alpha))


@lru_cache(maxsize=None)
def monomials(nu, degree):
    """All exponent tuples of length ``nu`` and order ``degree``, lex-descending.

    The ordering is fixed (first variable's exponent largest first) so that
    every caller that enumerates unknowns gets the same column order.
    """
    if nu == 1:
        return ((degree,),)
    out = []
    for first in range(degree, -1, -1):
        for rest in monomials(nu - 1, degree - first):
            out.append((first,) + rest)
    return tuple(out)


def count_monomials(nu, degree):
    return comb(degree + nu - 1, nu - 1)


def unit(nu, i):
    return tuple(1 if j == i else 0 for j in range(nu))


def add(a, b):
    return tuple(x + y for x, y in zip(a, b))


def sub(a, b):
    """a - b, or None when some entry would go negative."""
    out = tuple(x - y for x, y in zip(a, b))
    if any(x < 0 for x in out):
        return None
    return out
