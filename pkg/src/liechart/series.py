"""Sparse truncated power series in ``nu`` variables.

A series is a ``dict`` mapping exponent tuples to nonzero ``mpq``
coefficients. Absent keys are zero. Functions here never mutate inputs.
"""
from .rational import Q


def degree_of(alpha):
    return sum(alpha)


def clean(series):
    return {a: c for a, c in series.items() if c}


def truncate(series, n):
    return {a: c for a, c in series.items() if sum(a) <= n}


def add(a, b):
    out = dict(a)
    for k, c in b.items():
        v = out.get(k)
        if v is None:
            out[k] = c
        else:
            v = v + c
            if v:
                out[k] = v
            else:
                del out[k]
    return out


def add_into(acc, b, scale=None):
    """acc += scale * b, in place on ``acc``."""
    for k, c in b.items():
        if scale is not None:
            c = c * scale
        v = acc.get(k)
        if v is None:
            acc[k] = c
        else:
            v = v + c
            if v:
                acc[k] = v
            else:
                del acc[k]
    return acc


def neg(a):
    return {k: -c for k, c in a.items()}


def sub(a, b):
    return add(a, neg(b))


def scale(a, c):
    c = Q(c)
    if not c:
        return {}
    return {k: v * c for k, v in a.items()}


def by_degree(a):
    buckets = {}
    for k, c in a.items():
        buckets.setdefault(sum(k), []).append((k, c))
    return buckets


def homogeneous_part(a, k):
    return {al: c for al, c in a.items() if sum(al) == k}


def order(a):
    """Lowest degree present, or None for the zero series."""
    if not a:
        return None
    return min(sum(k) for k in a)


def mul(a, b, n):
    """a * b truncated at total degree ``n``."""
    if not a or not b:
        return {}
    if len(a) > len(b):
        a, b = b, a
    bb = sorted(by_degree(b).items())
    out = {}
    get = out.get
    for ka, ca in a.items():
        room = n - sum(ka)
        if room < 0:
            continue
        for db, terms in bb:
            if db > room:
                break
            for kb, cb in terms:
                key = tuple(x + y for x, y in zip(ka, kb))
                v = get(key)
                out[key] = ca * cb if v is None else v + ca * cb
    return {k: c for k, c in out.items() if c}


def diff(a, i):
    """Partial derivative with respect to variable ``i`` (0-based)."""
    out = {}
    for k, c in a.items():
        e = k[i]
        if e:
            kk = k[:i] + (e - 1,) + k[i + 1:]
            out[kk] = c * e
    return out


def derive(field, f, n):
    """Apply the derivation sum_j field[j] * d/dx_j to the scalar series f."""
    out = {}
    for j, comp in enumerate(field):
        if not comp:
            continue
        d = diff(f, j)
        if d:
            add_into(out, mul(comp, d, n))
    return out


def powers(components, exponents, n, cache=None):
    """Return the map alpha -> prod_j components[j]**alpha_j (truncated at n)
    for every alpha in ``exponents``.

    Powers are built incrementally from already-known smaller exponents;
    ``cache`` may be shared across calls with the same ``components``.
    """
    nu = len(components)
    if cache is None:
        cache = {}
    zero = (0,) * nu
    cache.setdefault(zero, {zero: Q(1)})

    def get(alpha):
        hit = cache.get(alpha)
        if hit is not None:
            return hit
        j = next(idx for idx, e in enumerate(alpha) if e)
        smaller = alpha[:j] + (alpha[j] - 1,) + alpha[j + 1:]
        val = mul(get(smaller), components[j], n)
        cache[alpha] = val
        return val

    return {alpha: get(alpha) for alpha in exponents}


def substitute(f, components, n, cache=None):
    """f(components) truncated at n; components must have zero constant term."""
    table = powers(components, [a for a in f if sum(a) <= n], n, cache)
    out = {}
    for alpha, c in f.items():
        if sum(alpha) > n:
            continue
        add_into(out, table[alpha], c)
    return out
