"""Command-line entry point.

Exit codes: 0 clean, 2 bad input, 3 obstruction / field outside the
algebra, 4 an invariant check failed.
"""
import argparse
import sys
from dataclasses import asdict, dataclass, field, fields

from . import builtins
from . import serialization as io
from .estimates import schedule
from .factorization import (
    FilteredBasis,
    FlatBasis,
    NotInAlgebra,
    convergence_report,
    factorize,
    reconstruct,
)
from .flows import FormalDiffeo
from .formal_algebra import banach_norm
from .prolongation import (
    MalgrangeConfig,
    Obstruction,
    build_filtered_basis,
    check_residual,
    estimate_C,
    majorant_seeds,
    phi_sequence,
    prolong,
    solution_to_field,
    solve_order_zero,
    strong_boundedness_check,
)
from .rational import Q, as_rational, format_rational
from .verify import run_suite

EXIT_OK, EXIT_INPUT, EXIT_OBSTRUCTION, EXIT_INVARIANT = 0, 2, 3, 4


@dataclass
class RunConfig:
    command: str
    inputs: dict = field(default_factory=dict)  # role -> path or builtin:name
    N: int = 8
    d_max: int = 3
    rho: object = None
    rho0: object = None
    M: object = None
    nu: int = 1
    C: object = None
    r0: object = None
    n0: int = 4
    steps: int = 30
    literal: bool = False
    suite: str = "builtin"
    output: str = None
    format: str = "table"

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ValueError(f"unknown command {self.command!r}")
        if self.N < 2:
            raise ValueError("truncation N must be >= 2")
        if self.nu < 1:
            raise ValueError("nu must be >= 1")
        for name in ("rho", "rho0", "M", "C", "r0"):
            v = getattr(self, name)
            if v is not None and as_rational(v) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.format not in ("table", "json"):
            raise ValueError("format must be 'table' or 'json'")

    @classmethod
    def from_mapping(cls, d):
        known = {f.name for f in fields(cls)}
        extra = set(d) - known
        if extra:
            raise ValueError(f"unknown config keys {sorted(extra)}")
        return cls(**d)


class InputError(Exception):
    pass


def _load(ref, kind, nu=1, N=8):
    """Resolve a file path or ``builtin:name`` reference."""
    if ref is None:
        raise InputError(f"missing --{kind}")
    if ref.startswith("builtin:"):
        name = ref.split(":", 1)[1]
        if kind == "system":
            try:
                return builtins.system(name)
            except KeyError as exc:
                raise InputError(str(exc)) from None
        if kind == "basis" and name == "flat":
            return FlatBasis(nu, N)
        if kind == "diffeo" and name == "geometric":
            # x_i / (1 - x_i) in every coordinate
            comps = []
            for i in range(nu):
                comps.append({tuple(k if j == i else 0 for j in range(nu)): Q(1) for k in range(1, N + 1)})
            return FormalDiffeo(nu, N, comps)
        raise InputError(f"no built-in {kind} named {name!r}")
    data = io.load_file(ref)
    if isinstance(data, dict) and kind in data and "kind" not in data:
        data = data[kind]  # a report from ``liechart basis`` (or similar) carrying the object
    return {
        "system": io.system_from_dict,
        "basis": io.basis_from_dict,
        "diffeo": io.diffeo_from_dict,
    }[kind](data)


def _f(x):
    return format_rational(x) if x is not None else None


# commands


def cmd_schedule(cfg):
    rho0 = float(as_rational(cfg.rho0 or 1))
    M0 = float(as_rational(cfg.M or 1))
    res = schedule(cfg.n0, rho0, M0, cfg.nu, cfg.steps, cfg.literal)
    rows = []
    violations = []
    for s in res.states:
        ok = s.M <= 2.5**s.i * M0 * (1 + 1e-12)
        if not ok:
            violations.append(s.i)
        rows.append({**s.to_dict(), "M_within": ok})
    report = {"command": "schedule", **res.to_dict(), "states": rows, "violations": violations}
    table = ["   i     n         sigma             M_i           rho_i   ln(rho/rho0)  M<=(5/2)^i M0"]
    for r in rows:
        table.append(
            f"{r['i']:4d} {r['n']:5d} {r['sigma']:13.6g} {r['M']:15.6g} {r['rho']:15.6g} "
            f"{r['partial_log_sum']:14.6g}  {'ok' if r['M_within'] else 'VIOLATED'}"
        )
    table.append(f"extrapolated ln(rho_inf/rho0) = {res.log_rho_limit!r}")
    return report, table, bool(violations)


def cmd_verify(cfg):
    try:
        checks = run_suite(cfg.suite)
    except KeyError as exc:
        raise InputError(str(exc)) from None
    report = {"command": "verify", "suite": cfg.suite, "checks": [c.to_dict() for c in checks]}
    table = [f"{'PASS' if c.ok else 'FAIL'}  {c.name}  ({c.detail})" for c in checks]
    return report, table, not all(c.ok for c in checks)


def _sol_dict(sol):
    return {
        "leading_degree": sol.leading_degree,
        "seed_degree": sol.seed_degree,
        "max_degree": sol.max_degree,
        "norms": [_f(x) for x in sol.norms()],
        "coeffs": [
            {"gamma": list(g), "value": [_f(x) for x in v]}
            for g, v in sorted(sol.coeffs.items(), key=lambda t: (sum(t[0]), t[0]))
            if any(v)
        ],
    }


def cmd_prolong(cfg):
    system = _load(cfg.inputs.get("system"), "system")
    sols = []
    for jet in solve_order_zero(system):
        sols.append(prolong(system, jet, cfg.N, seed_degree=1))
    dims = sols[0].kernel_dims if sols else {}
    bad = [i for i, s in enumerate(sols) if check_residual(system, s)]
    report = {
        "command": "prolong",
        "system": io.system_to_dict(system),
        "degree": cfg.N,
        "kernel_dims": {str(k): v for k, v in dims.items()},
        "solutions": [_sol_dict(s) for s in sols],
        "residual_failures": bad,
    }
    table = [f"system {system.name or '(file)'}: {len(sols)} order-zero jets prolonged to degree {cfg.N}"]
    table += [f"  kernel dim at degree {k}: {v}" for k, v in dims.items()]
    table.append(f"  residual failures: {bad or 'none'}")
    return report, table, bool(bad)


def cmd_basis(cfg):
    system = _load(cfg.inputs.get("system"), "system")
    sols = build_filtered_basis(system, cfg.d_max, cfg.N)
    bad = [i for i, s in enumerate(sols) if check_residual(system, s)]
    counts = {}
    for s in sols:
        counts[s.leading_degree] = counts.get(s.leading_degree, 0) + 1
    report = {
        "command": "basis",
        "system": io.system_to_dict(system),
        "counts": {str(k): v for k, v in sorted(counts.items())},
        "elements": [_sol_dict(s) for s in sols],
        "residual_failures": bad,
    }
    if system.p == system.q:
        elems = [solution_to_field(s) for s in sols if s.leading_degree >= 2]
        if elems:
            report["basis"] = io.basis_to_dict(FilteredBasis(system.p, elems, cfg.N))
    table = [f"system {system.name or '(file)'}: {len(sols)} elements to degree {cfg.N}"]
    table += [f"  leading degree {d}: {c}" for d, c in sorted(counts.items())]
    table.append(f"  residual failures: {bad or 'none'}")
    return report, table, bool(bad)


def cmd_estimate_c(cfg):
    system = _load(cfg.inputs.get("system"), "system")
    sols = build_filtered_basis(system, cfg.d_max, cfg.N)
    base = MalgrangeConfig.for_system(system, rho0=cfg.rho0 or 1, r0=cfg.r0)
    est = estimate_C(system, sols, base.r0)
    mc = base.with_C(cfg.C if cfg.C is not None else est.C)
    K = mc.growth_constant(system.q)
    rows, violated = [], False
    for idx, s in enumerate(sols):
        phi = phi_sequence(mc, majorant_seeds(s, K), cfg.N, system.q)
        dom = [l for l in range(cfg.N + 1) if s.norm(l) > phi[l]]
        step = [l for l in range(s.leading_degree, cfg.N) if phi[l + 1] > K * phi[l]]
        sb = strong_boundedness_check(s, K)
        violated |= bool(dom or step or not sb.holds)
        rows.append({"index": idx, "phi_dominance_failures": dom, "phi_step_failures": step, **sb.to_dict()})
    report = {
        "command": "estimate-c",
        "C": _f(est.C),
        "C_fit": _f(est.C_min),
        "excluded": [list(x) for x in est.excluded],
        "config": {k: _f(v) for k, v in asdict(mc).items()},
        "coefficient_violations": mc.coefficient_violations(system),
        "K": _f(K),
        "elements": rows,
    }
    table = [
        f"C = {_f(est.C)} (fit {_f(est.C_min)}), r0 = {_f(mc.r0)}, M = {_f(mc.M)}, rho0 = {_f(mc.rho0)}, K = {_f(K)}",
        f"excluded orders: {est.excluded or 'none'}",
    ]
    for r in rows:
        ok = r["holds"] and not r["phi_dominance_failures"] and not r["phi_step_failures"]
        table.append(f"  element {r['index']} (d={r['d']}): K* = {r['K_star']:.6g}  {'ok' if ok else 'VIOLATED'}")
    return report, table, violated


def cmd_factorize(cfg):
    nu, N = cfg.nu, cfg.N
    phi = _load(cfg.inputs.get("diffeo"), "diffeo", nu, N)
    nu, N = phi.nu, min(N, phi.truncation)
    basis = _load(cfg.inputs.get("basis", "builtin:flat"), "basis", nu, N)
    if basis.nu != nu:
        raise InputError(f"diffeo has nu = {nu} but the basis has nu = {basis.nu}")
    phi = phi.with_truncation(N)
    res = factorize(phi, basis, N)
    round_trip = reconstruct(res.v, N, nu) == phi
    rho = as_rational(cfg.rho or 4)
    rows = []
    for d, v in zip(res.diagnostics, res.v):
        rows.append({**d.to_dict(), "v": io.field_to_dict(v), "v_norm": _f(banach_norm(v, rho))})
    conv = convergence_report(res, cfg.rho0 or 1, None if cfg.M is None else float(as_rational(cfg.M)), nu)
    report = {
        "command": "factorize",
        "order": N,
        "rho": _f(rho),
        "steps": rows,
        "residual_is_identity": res.residual.is_identity(),
        "round_trip": round_trip,
        "convergence": conv.to_dict(),
    }
    table = [f"{len(res.v)} factors, round trip {'exact' if round_trip else 'FAILED'}"]
    for r in rows:
        table.append(
            f"  v_{r['index']}: degrees {r['degrees'][0]}..{r['degrees'][1]}, "
            f"Z order {r['residue_order']}, {r['v_terms']} terms, ||v||_rho = {r['v_norm']}"
        )
    for r in conv.rows:
        table.append(
            f"  schedule step {r.index}: ||Z|| {r.z_norm:.4g} vs M {r.scheduled_M:.4g}, "
            f"||v|| {r.v_norm:.4g}  {'ok' if r.z_ok and r.v_ok else 'EXCEEDS'}"
        )
    return report, table, not round_trip


COMMANDS = {
    "schedule": cmd_schedule,
    "verify": cmd_verify,
    "prolong": cmd_prolong,
    "basis": cmd_basis,
    "estimate-c": cmd_estimate_c,
    "factorize": cmd_factorize,
}


def run(cfg, out=None):
    """Run one command; returns (exit status, report dict or None)."""
    out = sys.stdout if out is None else out
    try:
        report, table, violated = COMMANDS[cfg.command](cfg)
    except (io.FormatError, InputError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT, None
    except Obstruction as exc:
        print(f"obstruction: {exc}", file=sys.stderr)
        return EXIT_OBSTRUCTION, {"command": cfg.command, "obstruction": {"order": exc.order, "rows": [[list(b), k] for b, k in exc.rows]}}
    except NotInAlgebra as exc:
        print(f"not in algebra: {exc}", file=sys.stderr)
        return EXIT_OBSTRUCTION, {"command": cfg.command, "not_in_algebra": {"degree": exc.degree, "step": exc.step}}
    text = io.dumps(report)
    if cfg.output:
        with open(cfg.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    if cfg.format == "json":
        out.write(text)
    else:
        out.write("\n".join(table) + "\n")
    return (EXIT_INVARIANT if violated else EXIT_OK), report


def build_parser():
    ap = argparse.ArgumentParser(prog="liechart", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--report", dest="output", help="write the JSON report here")
        p.add_argument("--format", choices=["table", "json"], default="table")

    p = sub.add_parser("schedule", help="doubling/rescaling schedule table")
    p.add_argument("--n0", type=int, default=4)
    p.add_argument("--rho0", default="1")
    p.add_argument("--M0", dest="M", default="1")
    p.add_argument("--nu", type=int, default=1)
    p.add_argument("--steps", type=int, default=30)
    p.add_argument("--literal", action="store_true", help="drop nu from the sigma equation")
    common(p)

    p = sub.add_parser("verify", help="run an invariant suite")
    p.add_argument("--suite", default="builtin")
    common(p)

    for name, helptext in (("prolong", "prolong order-zero jets"), ("basis", "build a filtered basis"),
                           ("estimate-c", "fit C and check strong boundedness")):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--system", required=True, help="JSON file or builtin:<name>")
        p.add_argument("--degree", dest="N", type=int, default=8)
        if name != "prolong":
            p.add_argument("--dmax", dest="d_max", type=int, default=3)
        if name == "estimate-c":
            p.add_argument("--C")
            p.add_argument("--r0")
            p.add_argument("--rho0")
        common(p)

    p = sub.add_parser("factorize", help="factor a diffeo into exponentials")
    p.add_argument("--diffeo", required=True, help="JSON file or builtin:geometric")
    p.add_argument("--basis", default="builtin:flat", help="JSON file or builtin:flat")
    p.add_argument("--order", dest="N", type=int, default=16)
    p.add_argument("--nu", type=int, default=1)
    p.add_argument("--rho", help="scale for the reported factor norms (default 4)")
    p.add_argument("--rho0", help="schedule seed scale (default 1)")
    p.add_argument("--M0", dest="M", help="schedule seed bound (default: measured)")
    common(p)
    return ap


def config_from_args(ns):
    d = vars(ns).copy()
    inputs = {k: d.pop(k) for k in ("system", "basis", "diffeo") if k in d}
    return RunConfig.from_mapping({**d, "inputs": inputs})


def main(argv=None):
    ns = build_parser().parse_args(argv)
    try:
        cfg = config_from_args(ns)
    except (TypeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    status, _ = run(cfg)
    return status


if __name__ == "__main__":
    sys.exit(main())
