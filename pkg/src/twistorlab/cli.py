"""Command-line front end.

Exit codes: 0 when every check passes, 1 when a numerical check fails, 2 on
malformed input.  Reports go to stdout, diagnostics to stderr.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .algebroid import order_check, parse_anchor, verify_axioms
from .bundles import S_TAGS, ConstraintClass
from .distributions import DistributionSpec, complex_closure_check, distribution_basis
from .errors import HypothesisViolated, TwistorError
from .leaves import DIM12_CASES, classify_orbit, leaf_report, repro_dim12, repro_s2
from .linalg import DEFAULT_TOL, Tolerances, matrix_from_json, matrix_to_json
from .pairs import decompose_pair, decomposition_residuals
from .sections import QPolynomial, check_coefficient_conditions
from .twistor import require_point, standard_structure, validate_point

__all__ = ["main", "build_parser"]


class InputError(Exception):
    pass


def _load_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"malformed JSON in {path}: {exc.msg} (line {exc.lineno})") from exc


def _load_matrix(path):
    obj = _load_json(path)
    if isinstance(obj, list):
        obj = {"dim": len(obj), "rows": obj}
    return matrix_from_json(obj)


def _need(args, name):
    val = getattr(args, name)
    if val is None:
        raise InputError(f"--{name} is required for {args.command}")
    return val


def _tol(args) -> Tolerances:
    return DEFAULT_TOL if args.tol is None else DEFAULT_TOL.replace(check_tol=args.tol)


def _pair(args, tol):
    j = _load_matrix(_need(args, "J"))
    k = _load_matrix(_need(args, "K"))
    if j.shape != k.shape:
        raise InputError(f"J is {j.shape[0]}-dimensional but K is {k.shape[0]}-dimensional")
    return require_point(j, tol), require_point(k, tol)


def _q(args):
    if args.Q is None:
        return QPolynomial([1.0])
    try:
        return QPolynomial.from_json(_load_json(args.Q))
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"malformed Q JSON: {exc}") from exc


# ---------------------------------------------------------------------------
# subcommands: each returns (report, passed)


def cmd_validate(args, tol):
    out, ok = {}, True
    for name in ("J", "K"):
        path = getattr(args, name)
        if path is None:
            continue
        d = validate_point(_load_matrix(path), tol)
        out[name] = {"square_residual": d.square_residual, "skew_residual": d.skew_residual, "ok": d.ok}
        ok &= d.ok
    if not out:
        raise InputError("validate needs --J and/or --K")
    out["pass"] = ok
    return out, ok


def cmd_decompose(args, tol):
    j, k = _pair(args, tol)
    d = decompose_pair(j, k, tol)
    res = decomposition_residuals(j, k, d, tol)
    ok = all(v if isinstance(v, bool) else v < tol.check_tol for v in res.values())
    out = {
        "dim": d.dim,
        "plus_one_dim": d.plus_one.rank,
        "minus_one_dim": d.minus_one.rank,
        "middle": [{"eps": eps, "dim": sub.rank} for eps, sub in d.middle],
        "m1": d.m1,
        "m_minus1": d.m_minus1,
        "residuals": res,
        "pass": ok,
    }
    return out, ok


def cmd_classify(args, tol):
    j, k = _pair(args, tol)
    return classify_orbit(j, k, tol).to_json(), True


def cmd_dist(args, tol):
    j, k = _pair(args, tol)
    spec = DistributionSpec(j, _q(args), args.S, args.flavor)
    basis = distribution_basis(spec, k, tol)
    rep = leaf_report(spec, k, tol)
    out = {"spec": spec.to_json(), "dim": len(basis), "leaf": rep.to_json(),
           "basis": [matrix_to_json(b) for b in basis]}
    ok = rep.consistent
    if spec.flavor == "plain":
        out["complex_closed"] = complex_closure_check(spec, k, tol)
        ok &= out["complex_closed"]
    out["pass"] = ok
    return out, ok


def cmd_check_axioms(args, tol):
    kind = parse_anchor(args.anchor)
    reports = verify_axioms(kind, n_sections=args.samples, n_points=args.points,
                            seed=args.seed, tol=tol)
    reports.append(order_check(kind, seed=args.seed, tol=tol))
    ok = all(r.passed is not False for r in reports)
    return {"anchor": kind.tag, "reports": [r.to_json() for r in reports], "pass": ok}, ok


def cmd_check_q(args, tol):
    j = _load_matrix(args.J) if args.J is not None else standard_structure(args.dim)
    j = require_point(j, tol)
    try:
        e = ConstraintClass[args.E]
    except KeyError:
        raise InputError(f"unknown class {args.E!r}; expected one of {[c.name for c in ConstraintClass]}")
    rep = check_coefficient_conditions(_q(args), args.S, e, j, n_samples=args.samples,
                                       seed=args.seed, tol=tol)
    out = rep.to_json()
    out.update({"S": args.S, "E": e.name})
    return out, rep.passed


def cmd_repro_s2(args, tol):
    rep = repro_s2(args.e0, args.grid, tol=tol)
    return rep.to_json(), rep.consistent


def cmd_repro_dim12(args, tol):
    cases = sorted(DIM12_CASES) if args.case == "all" else [args.case]
    reports = [repro_dim12(c, a=args.a, b=args.b, tol=tol) for c in cases]
    ok = all(r.passed for r in reports)
    if len(reports) == 1:
        return reports[0].to_json(), ok
    return {"cases": [r.to_json() for r in reports], "pass": ok}, ok


COMMANDS = {
    "validate": cmd_validate,
    "decompose": cmd_decompose,
    "classify-orbit": cmd_classify,
    "dist": cmd_dist,
    "check-axioms": cmd_check_axioms,
    "check-q": cmd_check_q,
    "repro-s2": cmd_repro_s2,
    "repro-dim12": cmd_repro_dim12,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--tol", type=float, default=None, help="override the check tolerance")
    common.add_argument("--format", choices=("json", "text"), default="json")

    p = argparse.ArgumentParser(prog="twistorlab", description="Numerical twistor-space laboratory.")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, help_):
        return sub.add_parser(name, parents=[common], help=help_)

    def pair(sp):
        sp.add_argument("--J", help="JSON file with the fixed structure")
        sp.add_argument("--K", help="JSON file with the base point")

    pair(add("validate", "check that matrices are orthogonal complex structures"))
    pair(add("decompose", "eigenspace decomposition of {J,K}"))
    pair(add("classify-orbit", "U(J)-orbit type of K"))
    sp = add("dist", "distribution and leaf model at K")
    pair(sp)
    sp.add_argument("--Q", help="JSON file with the polynomial Q")
    sp.add_argument("--S", choices=S_TAGS, default="one")
    sp.add_argument("--flavor", choices=("plain", "unitary"), default="plain")
    sp = add("check-axioms", "skew-algebroid axiom residuals for an anchor")
    sp.add_argument("--anchor", default="delta_plus", help="delta_plus, delta_minus or sigma")
    sp.add_argument("--samples", type=int, default=16, help="section pairs per point")
    sp.add_argument("--points", type=int, default=8, help="base points per dimension")
    sp = add("check-q", "differential conditions on the coefficients of Q")
    sp.add_argument("--J", help="JSON file with the fixed structure (default: standard)")
    sp.add_argument("--dim", type=int, default=4, help="dimension when --J is absent")
    sp.add_argument("--Q", help="JSON file with the polynomial Q")
    sp.add_argument("--S", choices=S_TAGS, default="one")
    sp.add_argument("--E", default="UJ", help="constraint class: O, OAntiJ, OAntiPhi, UJ, UPhi")
    sp.add_argument("--samples", type=int, default=8)
    sp = add("repro-s2", "leaf table of the four-dimensional example")
    sp.add_argument("--e0", type=float, default=0.5)
    sp.add_argument("--grid", type=int, default=64, help="number of latitudes")
    sp = add("repro-dim12", "leaf models of the twelve-dimensional example")
    sp.add_argument("--case", default="all", help=f"one of {sorted(DIM12_CASES)} or 'all'")
    sp.add_argument("--a", type=float, default=0.3)
    sp.add_argument("--b", type=float, default=0.6)
    return p


def _text(obj, prefix="") -> list[str]:
    """Flatten a report to ``dotted.key: value`` lines."""
    if isinstance(obj, dict):
        items = obj.items()
    elif isinstance(obj, list) and any(isinstance(v, (dict, list)) for v in obj):
        items = enumerate(obj)
    else:
        return [f"{prefix.rstrip('.')}: {obj}"]
    lines = []
    for key, val in items:
        lines += _text(val, f"{prefix}{key}.")
    return lines


def _default(o):
    if isinstance(o, np.generic):
        return o.item()
    raise TypeError(f"not serialisable: {type(o).__name__}")


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    try:
        tol = _tol(args)
        report, ok = COMMANDS[args.command](args, tol)
    except (InputError, HypothesisViolated) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (TwistorError, ValueError, KeyError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"error: {msg}", file=sys.stderr)
        return 2
    if args.format == "json":
        print(json.dumps(report, indent=2, default=_default))
    else:
        print("\n".join(_text(json.loads(json.dumps(report, default=_default)))))
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
