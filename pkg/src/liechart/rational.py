"""Exact rational scalars.

All series arithmetic runs over ``gmpy2.mpq``; it hashes and compares equal
to ``fractions.Fraction`` and is an order of magnitude faster.
"""
from fractions import Fraction
from numbers import Rational

import gmpy2

Q = gmpy2.mpq
ZERO = Q(0)
ONE = Q(1)


def as_rational(value):
    """Convert int, Fraction, mpq, or a decimal/fraction string to ``mpq``.

    Floats are accepted and converted exactly (binary expansion).
    """
    if isinstance(value, str):
        try:
            return Q(value.strip())
        except ValueError as exc:
            raise ValueError(f"not a rational literal: {value!r}") from exc
    if isinstance(value, bool):
        raise TypeError("bool is not a coefficient")
    if isinstance(value, (int, float, Rational)) or type(value) is type(ONE):
        return Q(value)
    raise TypeError(f"cannot interpret {type(value).__name__} as a rational")


def format_rational(value):
    """Serialize as ``"p/q"`` or ``"p"``; round-trips through :func:`as_rational`."""
    value = Q(value)
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def to_fraction(value):
    value = Q(value)
    return Fraction(int(value.numerator), int(value.denominator))
