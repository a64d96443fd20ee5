"""Command line front end.

Exit codes: 0 pass or success, 1 fail or obstructed, 2 usage or parse error.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction

from .chartfile import ChartFileError, chart_to_dict, load_chart, save_chart
from .expression import ParseError, print_expression
from .poisson import (
    CasimirPrecheckFailed,
    body_rank,
    check_antisymmetry,
    check_jacobi,
    check_mutual_involutivity,
    check_symmetrized_jacobi,
    is_casimir,
)
from .report import CheckReport, StageError
from .superalgebra import NotInvertible, body_matrix, invert_matrix, rational_det

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def default_degree() -> int:
    raw = os.environ.get("BIDARBOUX_DEGREE")
    if raw is None:
        return 8
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"BIDARBOUX_DEGREE must be an integer, got {raw!r}") from None


def parse_point(text):
    if not text:
        return None
    out = {}
    for part in text.split(","):
        if "=" not in part:
            raise UsageError(f"base point entry {part!r} is not name=value")
        k, v = part.split("=", 1)
        try:
            out[k.strip()] = Fraction(v.strip())
        except ValueError:
            raise UsageError(f"bad base point value {v!r}") from None
    return out


def parse_matrix(text):
    """``"a,b;c,d"`` to a list of rows of Fractions."""
    try:
        return [[Fraction(x.strip()) for x in row.split(",")] for row in text.split(";")]
    except ValueError:
        raise UsageError(f"bad matrix {text!r}") from None


def jsonable(x):
    if isinstance(x, CheckReport):
        return x.to_dict()
    if hasattr(x, "table") and hasattr(x, "free_variables"):
        return print_expression(x)
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, dict):
        return {(k if isinstance(k, str) else str(k)): jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [jsonable(v) for v in x]
    return x


def emit(report: dict, fmt: str, stream=None):
    stream = stream or sys.stdout
    body = jsonable(report)
    if fmt == "json":
        stream.write(json.dumps(body, indent=2, sort_keys=True) + "\n")
        return
    stream.write(f"{body['command']}: {body['status']}\n")
    for k in sorted(body):
        if k in ("command", "status"):
            continue
        stream.write(f"  {k}: {json.dumps(body[k], sort_keys=True)}\n")


def _full_point(tc, base):
    point = {n: Fraction(0) for n in tc.chart.names if tc.table[n].parity == 0}
    point.update(base or {})
    return point


# ---------------------------------------------------------------------------
# commands


def verify_chart(cf):
    """All definition-level checks; returns (passed, checks list)."""
    pencil = cf.pencil
    tc = cf.triplectic()
    checks = []

    def add(name, rep):
        checks.append({"check": name, "passed": bool(rep.passed), "violations": rep.violations[:5]})

    for a in (1, 2):
        add(f"antisymmetry{a}", check_antisymmetry(pencil.structure(a)))
    for a in (1, 2):
        add(f"jacobi{a}", check_jacobi(pencil.structure(a)))
    add("symmetrized_jacobi", check_symmetrized_jacobi(pencil))
    gens = [tc.gen(p) for p in tc.p], [tc.gen(c) for c in tc.c]
    add("involutivity", check_mutual_involutivity(pencil, gens[0], gens[1], precheck=False))
    cas = CheckReport("casimirs")
    for f in gens[0]:
        if not is_casimir(f, pencil.second):
            cas.fail(function=f, bracket=2)
    for f in gens[1]:
        if not is_casimir(f, pencil.first):
            cas.fail(function=f, bracket=1)
    add("casimirs", cas)
    point = _full_point(tc, cf.base_point)
    rk = CheckReport("body_rank")
    for a in (1, 2):
        try:
            r = body_rank(pencil.structure(a), point)
        except ZeroDivisionError:
            rk.fail(bracket=a, reason="pole at the base point")
            continue
        rk.details[f"rank{a}"] = r
        if r != 2 * tc.n:
            rk.fail(bracket=a, rank=r, expected=2 * tc.n)
    add("body_rank", rk)
    nd = CheckReport("joint_nondegeneracy")
    try:
        body = body_matrix(tc.E(), point)
        det = rational_det(body)
        nd.details["det"] = det
        if det == 0:
            nd.fail(reason="E block singular at the base point")
        invert_matrix(tc.E())
    except (NotInvertible, ZeroDivisionError) as exc:
        nd.fail(reason=str(exc))
    add("joint_nondegeneracy", nd)
    passed = all(c["passed"] for c in checks)
    failed = [c["check"] for c in checks if not c["passed"]]
    return passed, checks, failed


def cmd_verify(args):
    cf = load_chart(args.file)
    passed, checks, failed = verify_chart(cf)
    report = {"command": "verify", "status": "pass" if passed else "fail", "checks": checks}
    if failed:
        report["failedAt"] = failed[0]
    return report, EXIT_OK if passed else EXIT_FAIL


def _base(args, cf):
    return parse_point(args.base_point) or cf.base_point


def cmd_darbouxify(args):
    from .triplectic import bi_darboux_pipeline

    cf = load_chart(args.file)
    passed, checks, failed = verify_chart(cf)
    if not passed:
        return {"command": "darbouxify", "status": "fail", "failedAt": failed[0],
                "stages": [{"stage": "verify", "passed": False}]}, EXIT_FAIL
    tc = cf.triplectic()
    base = _base(args, cf)
    try:
        res = bi_darboux_pipeline(tc, base, args.degree)
    except StageError as exc:
        return {"command": "darbouxify", "status": "fail", "stage": exc.stage,
                "error": f"{type(exc.error).__name__}: {exc.error}"}, EXIT_FAIL
    report = {"command": "darbouxify", "status": res.status, "basePoint": res.base_point, "stages": res.stages}
    if res.success:
        report["certificates"] = {"P": res.P, "C": res.C, "B": res.B}
        report["chart"] = chart_to_dict(res.chart.pencil)
        if args.output:
            save_chart(res.chart.pencil, args.output)
        return report, EXIT_OK
    report["obstruction"] = res.obstruction
    return report, EXIT_FAIL


def cmd_factorize(args):
    from .triplectic import default_base_point, differential_factorization_report, extract_EF, factorize

    cf = load_chart(args.file)
    tc = cf.triplectic()
    E, _ = extract_EF(tc)
    base = _base(args, cf) or default_base_point(tc, E)
    fac = factorize(tc, E, base)
    diff = differential_factorization_report(tc, E)
    report = {"command": "factorize", "basePoint": base, "differentialCondition": diff.passed}
    if fac is None:
        report["status"] = "fail"
        report["result"] = "not factorizable"
        report["residuals"] = [v["residual"] for v in diff.violations]
        return report, EXIT_FAIL
    report["status"] = "pass"
    report["certificates"] = {"P": fac[0], "C": fac[1]}
    return report, EXIT_OK


def _block_label(alg, key) -> str:
    """Readable name of a fine block: its x3 monomial, index counts and x1 degree."""
    try:
        mono, counts, n1 = key
        x3 = "*".join(alg.table.variables[i].name + (f"^{e}" if e > 1 else "") for i, e in mono) or "1"
        return f"{x3} counts={list(counts)} n1={n1}"
    except (TypeError, ValueError, IndexError):
        return str(key)


def cmd_homotopy(args):
    from .homotopy import HomotopyFailure, NotClosed, TriGradedAlgebra

    if args.parities:
        pars = [int(x) for x in args.parities.split(",")]
    else:
        pars = [0] * args.n
    alg = TriGradedAlgebra(pars, degree=args.degree)
    try:
        omega = alg.parse(args.form)
    except ParseError as exc:
        raise UsageError(str(exc)) from None
    try:
        eta = alg.biPoincareHomotopy(omega)
    except NotClosed as exc:
        return {"command": "homotopy", "status": "fail", "error": str(exc),
                "residuals": exc.residuals}, EXIT_FAIL
    except HomotopyFailure as exc:
        return {"command": "homotopy", "status": "fail", "error": str(exc)}, EXIT_FAIL
    _, dets = alg.lambda_inverse(omega)
    blocks = {_block_label(alg, k): d for k, d in sorted(dets.items(), key=str)}
    return {"command": "homotopy", "status": "pass", "omega": omega, "eta": eta, "determinants": blocks}, EXIT_OK


def cmd_nijenhuis(args):
    from .parahyper import base_of, buildPfromE, chiral_nijenhuis, nijenhuis

    tc = load_chart(args.file).triplectic()
    base = base_of(tc)
    P = buildPfromE(base, tc.E())
    N = nijenhuis(P)
    names = base.names
    nz = {f"N^{names[k]}_{names[i]}{names[j]}": v for (k, i, j), v in sorted(N.nonzero().items())}
    report = {"command": "nijenhuis", "status": "pass" if not nz else "fail", "nonzero": nz}
    if nz:
        for s, lab in ((1, "plus"), (-1, "minus")):
            Nc = chiral_nijenhuis(N, P, s)
            report[f"chiral_{lab}"] = {f"{names[k]},{names[i]},{names[j]}": v
                                      for (k, i, j), v in sorted(Nc.nonzero().items())}
    return report, EXIT_OK if not nz else EXIT_FAIL


def cmd_obata(args):
    from .parahyper import check_obata, obata_connection, obata_curvature

    tc = load_chart(args.file).triplectic()
    conn = obata_connection(tc)
    names = conn.base.names
    curv = obata_curvature(conn)
    chk = check_obata(conn)
    report = {
        "command": "obata",
        "status": "pass" if curv.is_flat else "fail",
        "flat": curv.is_flat,
        "connectionChecks": chk.passed,
        "christoffel": {f"Gamma^{names[k]}_{names[i]}{names[j]}": v for (k, i, j), v in sorted(conn.gamma.items())},
        "curvature": {f"R^{a}_{b}": v for (a, b), v in sorted(curv.components.items()) if not v.is_zero()},
    }
    return report, EXIT_OK if curv.is_flat else EXIT_FAIL


def cmd_lorentz(args):
    from .liegroup import NotUnitDeterminant, adjointMap, isLorentz, isRestrictedLorentz

    if args.g:
        g = parse_matrix(args.g)
        if len(g) != 2 or any(len(r) != 2 for r in g):
            raise UsageError("g must be 2x2")
        try:
            L = adjointMap(g)
        except NotUnitDeterminant as exc:
            return {"command": "lorentz", "status": "fail", "error": str(exc)}, EXIT_FAIL
    elif args.matrix:
        L = parse_matrix(args.matrix)
        if len(L) != 3 or any(len(r) != 3 for r in L):
            raise UsageError("Lambda must be 3x3")
    else:
        raise UsageError("give --g or --matrix")
    restricted = isRestrictedLorentz(L)
    report = {"command": "lorentz", "status": "pass" if restricted else "fail", "lambda": L,
              "lorentz": isLorentz(L), "restricted": restricted}
    return report, EXIT_OK if restricted else EXIT_FAIL


COMMANDS = {
    "verify": cmd_verify,
    "darbouxify": cmd_darbouxify,
    "factorize": cmd_factorize,
    "homotopy": cmd_homotopy,
    "nijenhuis": cmd_nijenhuis,
    "obata": cmd_obata,
    "lorentz": cmd_lorentz,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=["json", "text"], default="json")
    common.add_argument("--degree", type=int, default=None, help="truncation degree (env BIDARBOUX_DEGREE)")
    parser = argparse.ArgumentParser(prog="bidarboux", description="Exact checks for super Poisson pencils.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("verify", "darbouxify", "factorize", "nijenhuis", "obata"):
        p = sub.add_parser(name, parents=[common])
        p.add_argument("file")
        if name in ("darbouxify", "factorize"):
            p.add_argument("--base-point", default=None, help="e.g. p1=0,c1=1")
        if name == "darbouxify":
            p.add_argument("--output", default=None, help="write the bi-Darboux chart here")
    p = sub.add_parser("homotopy", parents=[common])
    p.add_argument("form", help="closed form, e.g. x3_1*x3_2")
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--parities", default=None, help="comma separated, one per index")
    p = sub.add_parser("lorentz", parents=[common])
    p.add_argument("--g", default=None, help="2x2 group element, rows split by ';'")
    p.add_argument("--matrix", default=None, help="3x3 matrix to test, rows split by ';'")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.degree is None:
            args.degree = default_degree()
        report, code = COMMANDS[args.command](args)
    except (UsageError, ChartFileError, ParseError, OSError) as exc:
        sys.stderr.write(f"bidarboux {args.command}: {exc}\n")
        return EXIT_USAGE
    except CasimirPrecheckFailed as exc:
        sys.stderr.write(f"bidarboux {args.command}: {exc}\n")
        return EXIT_FAIL
    emit(report, args.format)
    return code


if __name__ == "__main__":
    sys.exit(main())
