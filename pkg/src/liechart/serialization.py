"""JSON literals for fields, diffeos, PDE systems and bases.

Exact values travel as fraction strings, floats as their shortest repr.
Dumps use sorted keys so equal inputs give byte-identical output.
"""
import json

from .factorization import FilteredBasis, FlatBasis
from .flows import FormalDiffeo
from .formal_algebra import FormalVectorField
from .prolongation import PDESystem
from .rational import as_rational, format_rational


class FormatError(ValueError):
    """Malformed input; ``location`` is 'line L column C' for JSON syntax errors."""

    def __init__(self, message, location=None):
        self.location = location
        super().__init__(f"{message} ({location})" if location else message)


def loads(text):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(exc.msg, f"line {exc.lineno} column {exc.colno}") from None


def load_file(path):
    with open(path, encoding="utf-8") as fh:
        return loads(fh.read())


def dumps(obj):
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def _require(d, keys, allowed=None, what="object"):
    if not isinstance(d, dict):
        raise FormatError(f"{what} must be a JSON object")
    missing = [k for k in keys if k not in d]
    if missing:
        raise FormatError(f"{what} is missing {missing}")
    extra = set(d) - set(allowed or keys)
    if extra:
        raise FormatError(f"{what} has unknown keys {sorted(extra)}")


def _rational(x):
    try:
        return as_rational(x)
    except (TypeError, ValueError) as exc:
        raise FormatError(str(exc)) from None


def _alpha(a, n):
    if not isinstance(a, list) or len(a) != n or not all(isinstance(x, int) and x >= 0 for x in a):
        raise FormatError(f"bad multi-index {a!r} (need {n} non-negative ints)")
    return tuple(a)


# vector fields


def field_to_dict(V):
    terms = [{"i": i + 1, "alpha": list(alpha), "c": format_rational(c)} for i, alpha, c in V.terms()]
    return {"nu": V.nu, "truncation": V.truncation, "terms": terms}


def field_from_dict(d):
    _require(d, ["nu", "truncation", "terms"], what="vector field")
    nu, n = d["nu"], d["truncation"]
    if not isinstance(nu, int) or nu < 1 or not isinstance(n, int) or n < 0:
        raise FormatError("nu must be >= 1 and truncation >= 0")
    comps = [{} for _ in range(nu)]
    for t in d["terms"]:
        _require(t, ["i", "alpha", "c"], what="term")
        i = t["i"]
        if not isinstance(i, int) or not 1 <= i <= nu:
            raise FormatError(f"component index {i!r} outside 1..{nu}")
        alpha = _alpha(t["alpha"], nu)
        if sum(alpha) > n:
            raise FormatError(f"term of degree {sum(alpha)} exceeds truncation {n}")
        comps[i - 1][alpha] = comps[i - 1].get(alpha, 0) + _rational(t["c"])
    return FormalVectorField(nu, n, comps)


# diffeos


def diffeo_to_dict(phi):
    comps = [
        [{"alpha": list(a), "c": format_rational(c)} for a, c in sorted(comp.items(), key=lambda t: (sum(t[0]), t[0]))]
        for comp in phi.components
    ]
    return {"nu": phi.nu, "truncation": phi.truncation, "components": comps}


def diffeo_from_dict(d):
    _require(d, ["nu", "truncation", "components"], what="diffeo")
    nu, n = d["nu"], d["truncation"]
    if not isinstance(nu, int) or nu < 1 or not isinstance(n, int) or n < 1:
        raise FormatError("nu must be >= 1 and truncation >= 1")
    if not isinstance(d["components"], list) or len(d["components"]) != nu:
        raise FormatError(f"diffeo needs {nu} components")
    comps = []
    for series in d["components"]:
        comp = {}
        for t in series:
            _require(t, ["alpha", "c"], what="diffeo term")
            alpha = _alpha(t["alpha"], nu)
            if sum(alpha) > n:
                raise FormatError(f"term of degree {sum(alpha)} exceeds truncation {n}")
            comp[alpha] = comp.get(alpha, 0) + _rational(t["c"])
        comps.append(comp)
    try:
        return FormalDiffeo(nu, n, comps)
    except ValueError as exc:
        raise FormatError(str(exc)) from None


# PDE systems


def _series_to_list(series):
    return [
        {"alpha": list(a), "matrix": [[format_rational(x) for x in row] for row in m]}
        for a, m in sorted(series.items(), key=lambda t: (sum(t[0]), t[0]))
    ]


def _series_from_list(items, p):
    if not isinstance(items, list):
        raise FormatError("matrix series must be a list")
    out = {}
    for t in items:
        _require(t, ["alpha", "matrix"], what="matrix term")
        out[_alpha(t["alpha"], p)] = t["matrix"]
    return out


def system_to_dict(system):
    d = {
        "p": system.p,
        "q": system.q,
        "r": system.r,
        "A": _series_to_list(system.A),
        "B": [_series_to_list(b) for b in system.B],
    }
    if system.name:
        d["name"] = system.name
    return d


def system_from_dict(d):
    _require(d, ["p", "q", "r", "A", "B"], ["p", "q", "r", "A", "B", "name"], what="PDE system")
    p, q, r = d["p"], d["q"], d["r"]
    if not all(isinstance(x, int) and x >= 1 for x in (p, q, r)):
        raise FormatError("p, q, r must be positive integers")
    if not isinstance(d["B"], list) or len(d["B"]) != p:
        raise FormatError(f"B must list {p} matrix series")
    try:
        return PDESystem.build(
            p, q, r,
            A=_series_from_list(d["A"], p),
            B=[_series_from_list(b, p) for b in d["B"]],
            name=d.get("name", ""),
        )
    except (TypeError, ValueError) as exc:
        raise FormatError(str(exc)) from None


# bases


def basis_to_dict(basis):
    if basis.flat:
        return {"kind": "flat", "nu": basis.nu, "truncation": basis.truncation, "min_degree": basis.min_degree}
    return {
        "kind": "explicit",
        "nu": basis.nu,
        "truncation": basis.truncation,
        "elements": [field_to_dict(e) for e in basis.elements],
    }


def basis_from_dict(d):
    if not isinstance(d, dict) or d.get("kind") not in ("flat", "explicit"):
        raise FormatError("basis needs kind 'flat' or 'explicit'")
    if d["kind"] == "flat":
        _require(d, ["kind", "nu", "truncation"], ["kind", "nu", "truncation", "min_degree"], what="flat basis")
        return FlatBasis(d["nu"], d["truncation"], d.get("min_degree", 2))
    _require(d, ["kind", "nu", "truncation", "elements"], what="basis")
    elems = [field_from_dict(e) for e in d["elements"]]
    if not elems:
        raise FormatError("basis has no elements")
    try:
        return FilteredBasis(d["nu"], elems, d["truncation"])
    except ValueError as exc:
        raise FormatError(str(exc)) from None
