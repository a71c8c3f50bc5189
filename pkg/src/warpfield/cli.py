"""Command-line front end.

Exit codes: 0 everything passed, 1 a verification failed, 2 bad usage or input.
"""
from __future__ import annotations

import argparse
import json
import sys
from typing import List, Optional

from .conformal import (
    Metric, build_so2d, build_vector_fields, calibrate_signs, scaled_generators,
    verify_conformal_algebra, verify_so2d,
)
from .exactnum import GaussianRational, parse_rational
from .polyalg import ETA_VAR, LAMBDA_VAR, ParseError, Poly, canonical_string, parse_poly
from .warped import (
    TwistSeriesConfig, calibrate_series_sign, deformed_commutator, nonconstant_reference,
    theta_upper, twist_product,
)

MAX_ORDER = 6


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(2)


def _common(p: argparse.ArgumentParser, top: bool):
    default = 4 if top else argparse.SUPPRESS
    p.add_argument("--dim", type=int, default=default, help="spacetime dimension d (default 4)")
    p.add_argument("--json", action="store_true", default=False if top else argparse.SUPPRESS,
                   help="emit a JSON report instead of text")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="warpfield", description="Deformed products, conformal algebra and wedge checks.")
    _common(ap, True)
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("verify-algebra", help="conformal and so(2,d) commutation relations")
    _common(p, False)

    for name in ("commutator", "product"):
        p = sub.add_parser(name, help="deformed coordinate commutator" if name == "commutator"
                           else "deformed product of two polynomials")
        _common(p, False)
        p.add_argument("--generator", choices=["P", "K", "scaled"], default="P")
        p.add_argument("--order", type=int, default=2, help=f"truncation order (<= {MAX_ORDER})")
        p.add_argument("--kind", choices=["minus", "plus"], default="minus", help="scaled family")
        p.add_argument("--lambda", dest="lam", default=None, help="scaling p/q (default: symbol lam)")
        p.add_argument("--eta", default=None, help="scaling p/q (default: symbol eta)")
        p.add_argument("--theta-file", default=None, help="numeric theta JSON")
        if name == "commutator":
            p.add_argument("--mu", type=int, required=True)
            p.add_argument("--nu", type=int, required=True)
            p.add_argument("--index", choices=["upper", "lower"], default="upper",
                           help="commute x^mu, x^nu (upper) or x_mu, x_nu (lower)")
        else:
            p.add_argument("--poly-a", required=True)
            p.add_argument("--poly-b", required=True)

    p = sub.add_parser("wedge-check", help="random exact wedge-geometry checks")
    _common(p, False)
    p.add_argument("--samples", type=int, default=10000)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("fock-verify", help="truncated Fock-space batteries")
    _common(p, False)
    p.add_argument("--config", default=None, help="JSON config {n, points, mMax, samples, seed, tolerances}")
    return ap


def _emit(args, text_lines: List[str], report: dict):
    if args.json:
        print(json.dumps(report, indent=2, sort_keys=True, default=str))
    else:
        print("\n".join(text_lines))


# ---------------------------------------------------------------------------

def cmd_verify_algebra(args) -> int:
    d = args.dim
    if d < 2:
        raise UsageError("--dim must be >= 2")
    g = calibrate_signs(d)
    conf = verify_conformal_algebra(g)
    so = build_so2d(g)
    so_rep = verify_so2d(so)
    ok = conf.passed and so_rep.passed
    lines = [f"d={d}",
             "signs: " + ", ".join(f"{k}={v}" for k, v in g.signs.items()),
             f"conformal relations: {len(conf.results)} checked, {len(conf.failures)} failed",
             f"so(2,{d}) relations: {len(so_rep.results)} checked, {len(so_rep.failures)} failed"]
    for r in conf.failures + so_rep.failures:
        lines.append(f"FAIL {r.relation_id}: residual {r.residual}")
    lines.append("PASS" if ok else "FAIL")
    report = {"d": d, "signs": {k: str(v) for k, v in g.signs.items()},
              "embedding": so.embedding, "conformal": conf.to_json(), "so2d": so_rep.to_json(), "pass": ok}
    _emit(args, lines, report)
    return 0 if ok else 1


def _series_setup(args):
    d = args.dim
    if d < 2:
        raise UsageError("--dim must be >= 2")
    if not 0 <= args.order <= MAX_ORDER:
        raise UsageError(f"--order must be between 0 and {MAX_ORDER}")
    theta = "symbolic"
    if args.theta_file:
        if d != 4:
            raise UsageError("--theta-file needs --dim 4")
        from .wedge import load_theta_file
        try:
            theta = load_theta_file(args.theta_file)
        except OSError as exc:
            raise UsageError(f"cannot read theta file: {exc}")
        except (ValueError, KeyError, TypeError, ZeroDivisionError) as exc:
            raise UsageError(f"bad theta file: {exc}")
    lam = eta = None
    if args.generator == "scaled":
        if d != 4:
            raise UsageError("scaled generators need --dim 4")
        try:
            lam = parse_rational(args.lam) if args.lam is not None else "lam"
            eta = parse_rational(args.eta) if args.eta is not None else "eta"
        except (ValueError, ZeroDivisionError) as exc:
            raise UsageError(str(exc))
        if not isinstance(lam, str) and lam <= 0:
            raise UsageError("--lambda must be positive")
        gens = scaled_generators(args.kind, lam, eta, d)
    elif args.lam is not None or args.eta is not None:
        raise UsageError("--lambda/--eta only apply to --generator scaled")
    else:
        vf = build_vector_fields(d)
        gens = vf.vectorFieldP if args.generator == "P" else vf.vectorFieldK
    cfg = TwistSeriesConfig(gens, theta, args.order)
    return cfg, lam, eta


def _theta_fn(cfg: TwistSeriesConfig, args, lam, eta):
    """Upper-index theta entries entering the reference formulas."""
    if args.generator == "scaled":
        def sc(v):
            return Poly.var(LAMBDA_VAR if v == "lam" else ETA_VAR) if isinstance(v, str) else Poly.const(v)
        scale = [sc(lam), sc(lam), sc(eta), sc(eta)]
    else:
        scale = [Poly.const(1)] * cfg.d
    if cfg.symbolic:
        return lambda a, b: theta_upper(a, b) * scale[a] * scale[b]
    return lambda a, b: Poly.const(cfg.theta[a][b]) * scale[a] * scale[b]


def _graded_lines(res) -> List[str]:
    return [f"  order {k}: {canonical_string(p)}" for k, p in sorted(res.orderComponents.items())]


def cmd_commutator(args) -> int:
    cfg, lam, eta = _series_setup(args)
    d, mu, nu = cfg.d, args.mu, args.nu
    if not (0 <= mu < d and 0 <= nu < d):
        raise UsageError(f"--mu/--nu must lie in 0..{d - 1}")
    m = Metric(d)
    if args.index == "upper":
        A, B = Poly.x(mu), Poly.x(nu)
        label = f"[x{mu}, x{nu}]"
    else:
        A, B = m.x_lower(mu), m.x_lower(nu)
        label = f"[x_{mu}, x_{nu}] (lower)"
    res = deformed_commutator(A, B, cfg)
    fn = _theta_fn(cfg, args, lam, eta)
    translations = args.generator == "P" or (args.generator == "scaled" and args.kind == "plus")
    checks = []
    if translations:
        ref = _moyal(mu, nu, d, args.index, fn)
        ok = res.value == ref
        checks.append({"check": "moyal", "reference": canonical_string(ref), "pass": ok})
        verdict = ["MATCHES-REFERENCE" if ok else "DIFFERS-FROM-REFERENCE", f"reference: {canonical_string(ref)}"]
    else:
        ref1 = nonconstant_reference(mu, nu, d, args.index, fn)
        verdict = []
        for k in range(min(2, args.order) + 1):
            exp = ref1 if k == 1 else Poly()
            ok = res.orderComponents[k] == exp
            checks.append({"check": f"order-{k}", "reference": canonical_string(exp), "pass": ok})
            verdict.append(f"order {k} vs reference: {'PASS' if ok else 'FAIL'}")
    lines = [f"generator={args.generator} d={d} index={args.index} order={args.order} "
             f"theta={'symbolic' if cfg.symbolic else 'numeric'} series-sign={calibrate_series_sign()}",
             f"{label}_theta:"] + _graded_lines(res)
    lines.append(f"value: {canonical_string(res.value)}")
    lines.append(f"terminated at order {res.termination_order}" if res.terminated
                 else f"not terminated by order {args.order}")
    lines += verdict
    report = {"command": "commutator", "generator": args.generator, "d": d, "mu": mu, "nu": nu,
              "index": args.index, "series_sign": calibrate_series_sign(), **res.to_json(), "checks": checks,
              "pass": all(c["pass"] for c in checks)}
    _emit(args, lines, report)
    return 0 if report["pass"] else 1


def _moyal(mu, nu, d, index, fn) -> Poly:
    # -2i theta_{mu nu}, from the same theta entries used by the series
    m = Metric(d)
    sgn = 1 if index == "upper" else m.sign(mu) * m.sign(nu)
    return fn(mu, nu).scale(GaussianRational(0, -2) * sgn)


def cmd_product(args) -> int:
    cfg, _, _ = _series_setup(args)
    try:
        A = parse_poly(args.poly_a, cfg.d)
        B = parse_poly(args.poly_b, cfg.d)
    except ParseError as exc:
        raise UsageError(f"parse error: {exc}")
    res = twist_product(A, B, cfg)
    lines = [f"generator={args.generator} d={cfg.d} order={args.order}",
             f"({canonical_string(A)}) x_theta ({canonical_string(B)}):"] + _graded_lines(res)
    lines.append(f"value: {canonical_string(res.value)}")
    lines.append(f"terminated at order {res.termination_order}" if res.terminated
                 else f"not terminated by order {args.order}")
    report = {"command": "product", "generator": args.generator, "a": canonical_string(A),
              "b": canonical_string(B), **res.to_json()}
    _emit(args, lines, report)
    return 0


def cmd_wedge_check(args) -> int:
    from .wedge import spacelike_separation_check, wedge_preservation_check

    if args.samples < 1:
        raise UsageError("--samples must be >= 1")
    reps = [wedge_preservation_check(args.samples, args.seed), spacelike_separation_check(args.samples, args.seed)]
    lines = [f"wedge-check samples={args.samples} seed={args.seed}"]
    for r in reps:
        lines.append(f"{r.name}: {len(r.failures)} counterexamples {'PASS' if r.passed else 'FAIL'}")
        for f in r.failures[:20]:
            lines.append("  " + json.dumps(f, sort_keys=True))
    ok = all(r.passed for r in reps)
    _emit(args, lines, {"samples": args.samples, "seed": args.seed,
                        "checks": [r.to_json() for r in reps], "pass": ok})
    return 0 if ok else 1


def cmd_fock_verify(args) -> int:
    from .fock import FockConfig, run_batteries

    if args.config:
        try:
            cfg = FockConfig.load(args.config)
        except OSError as exc:
            raise UsageError(f"cannot read config: {exc}")
        except (ValueError, TypeError, json.JSONDecodeError) as exc:
            raise UsageError(f"bad config: {exc}")
    else:
        cfg = FockConfig()
    try:
        rep = run_batteries(cfg)
    except ValueError as exc:
        raise UsageError(f"bad config: {exc}")
    c = rep["config"]
    lines = [f"fock-verify n={c['n']} points={c['points']} mMax={c['mMax']} states={c['states']} seed={c['seed']}"]
    for name, b in rep["batteries"].items():
        if "max_residual" in b:
            lines.append(f"{name}: max residual {b['max_residual']:.3e} (tol {b['tolerance']:.0e}) "
                         f"{'PASS' if b['pass'] else 'FAIL'}")
        else:
            lines.append(f"{name}: {b['violations']} violations in {b['samples']} samples "
                         f"{'PASS' if b['pass'] else 'FAIL'}")
    lines.append("PASS" if rep["pass"] else "FAIL")
    _emit(args, lines, rep)
    return 0 if rep["pass"] else 1


COMMANDS = {
    "verify-algebra": cmd_verify_algebra,
    "commutator": cmd_commutator,
    "product": cmd_product,
    "wedge-check": cmd_wedge_check,
    "fock-verify": cmd_fock_verify,
}


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"warpfield {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
