"""``iwatool``: command-line entry point.

Exit codes: 0 success, 1 a verification failed, 2 bad input.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .divisors import DivisorChain, NoChainError, auto_factors, factor_table, snf_exact, snf_numeric
from .factored import parse_symbol
from .io import (
    InputError,
    factored_columns,
    group_ring_from_doc,
    load_json,
    matrix_from_doc,
    module_from_doc,
    render,
    series_from_obj,
)
from .iwasawa import mellin, psi_quotient
from .padic import PadicError, PrecisionError, format_scalar
from .phipsi import psi, theta_k_approx
from .series import (
    RadiusExp,
    SeriesContext,
    TruncatedSeries,
    UncertifiedError,
    ell,
    log1p_series,
    newton_polygon,
    norm_at_radius,
    omega,
    pi_factor,
    xi,
)
from .structure import (
    HypothesisError,
    hodge_data,
    predicted_annihilator,
    predicted_chain,
    predicted_determinant,
    validate,
)
from .suites import SUITES, run_suite

OK, CHECK_FAILED, INPUT_ERROR = 0, 1, 2


def _series_records(f: TruncatedSeries) -> list[dict]:
    out = []
    for k in range(len(f.coeffs)):
        c = f.coefficient(k)
        out.append({"index": k, "coefficient": format_scalar(c),
                    "valuation": "" if c.valuation is None else c.valuation})
    return out


def _chain_records(chain: DivisorChain, section: str = "chain") -> list[dict]:
    cols = factored_columns(list(chain))
    out = []
    for i, e in enumerate(chain, start=1):
        rec = {"section": section, "index": i, "element": str(e)}
        rec.update({s: e.get(s) for s in cols})
        out.append(rec)
    return out


def cmd_series(args, ctx) -> tuple[list[dict], int]:
    makers = {
        "ell": lambda: ell(args.j, ctx),
        "log1p": lambda: log1p_series(ctx),
        "omega": lambda: omega(args.n, ctx),
        "xi": lambda: xi(args.n, ctx),
        "pi": lambda: pi_factor(args.n, args.j, ctx),
    }
    f = makers[args.kind]()
    if args.radius:
        records = []
        for text in args.radius:
            rho = RadiusExp.parse(text)
            try:
                res = norm_at_radius(f, rho)
                records.append({"radius": f"p^-{rho}", "valuation": str(res.valuation),
                                "unit": len(res.indices) == 1,
                                "dominant_indices": ",".join(map(str, res.indices))})
            except UncertifiedError as exc:
                records.append({"radius": f"p^-{rho}", "valuation": "", "unit": "",
                                "dominant_indices": f"uncertified: {exc}"})
        return records, OK
    if args.newton:
        poly = newton_polygon(f)
        return [{"x": x, "y": str(y)} for x, y in poly.vertices], OK
    return _series_records(f), OK


def cmd_psi(args, ctx):
    doc = load_json(args.input)
    f = series_from_obj(doc.data, doc, ctx)
    for _ in range(args.iterations):
        f = psi(f)
    return _series_records(f), OK


def cmd_theta(args, ctx):
    run = theta_k_approx(args.k, args.steps, ctx)
    return [{"step": n, "agreement_digits": d, "at_precision_cap": ex} for n, d, ex in run.agreement], OK


def cmd_mellin(args, ctx):
    doc = load_json(args.input)
    g = group_ring_from_doc(doc, ctx, args.level)
    m = mellin(g)
    in_kernel = psi_quotient(m, g.level, ctx).is_zero()
    records = _series_records(m)
    records.append({"index": "psi", "coefficient": "zero" if in_kernel else "nonzero", "valuation": ""})
    return records, OK if in_kernel else CHECK_FAILED


def cmd_snf(args, ctx):
    doc = load_json(args.matrix_file)
    mode, rows = matrix_from_doc(doc, ctx)
    if mode == "factored":
        chain = snf_exact(rows)
    else:
        if args.factors == "auto":
            table = auto_factors(rows, ctx)
        else:
            symbols = [s.strip() for s in args.factors.split(",") if s.strip()]
            for s in symbols:
                try:
                    parse_symbol(s)
                except ValueError as exc:
                    raise InputError(str(exc), "--factors") from None
            table = factor_table(symbols, ctx)
        chain = snf_numeric(rows, table)
    records = _chain_records(chain)
    for note in chain.notes:
        records.append({"section": "note", "index": "", "element": note})
    return records, OK


def cmd_predict(args, ctx):
    doc = load_json(args.module_file)
    D = module_from_doc(doc, ctx.prec)
    report = validate(D)
    h = hodge_data(D)
    records = _chain_records(predicted_chain(D))
    det = predicted_determinant(D)
    records.append({"section": "determinant", "index": 1, "element": str(det), **det.to_json()})
    ann = predicted_annihilator(D)
    records.append({"section": "annihilator", "index": 1, "element": str(ann), **ann.to_json()})
    for k, dim in h.fil_dims:
        records.append({"section": "fil_dim", "index": k, "element": dim})
    checks = (("N_phi_commutation", report.commutation), ("N_nilpotent", report.nilpotent),
              ("phi_invertible", report.phi_invertible),
              (f"no_phi^f_eigenvalue_p^jf_|j|<={report.spectral_window}", report.spectral_ok))
    for name, ok in checks:
        records.append({"section": "validation", "index": name, "element": "pass" if ok else "FAIL"})
    return records, OK if report.ok else CHECK_FAILED


def cmd_verify(args, ctx):
    results = run_suite(args.suite, ctx, args.samples, args.seed)
    return [r.record() for r in results], OK if all(r.passed for r in results) else CHECK_FAILED


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--p", type=int, default=3)
    common.add_argument("--u", type=int, default=4)
    common.add_argument("--prec", type=int, default=30)
    common.add_argument("--xtrunc", type=int, default=200)
    common.add_argument("--seed", type=int, default=7)
    common.add_argument("--samples", type=int, default=100)
    common.add_argument("--format", choices=("tsv", "json"), default="tsv")
    common.add_argument("--out", type=Path)

    parser = argparse.ArgumentParser(prog="iwatool", parents=[common],
                                     description="p-adic series, Iwasawa algebras and elementary divisors")
    sub = parser.add_subparsers(dest="command", required=True)

    s = sub.add_parser("series", parents=[common], help="print a distinguished series, its norms or Newton polygon")
    s.add_argument("--kind", choices=("ell", "log1p", "omega", "xi", "pi"), default="ell")
    s.add_argument("--j", type=int, default=0)
    s.add_argument("--n", type=int, default=1)
    s.add_argument("--radius", action="append", help="a/b for rho = p^(-a/b); repeatable")
    s.add_argument("--newton", action="store_true")
    s.set_defaults(func=cmd_series)

    s = sub.add_parser("psi", parents=[common], help="apply psi to a series file")
    s.add_argument("--input", required=True)
    s.add_argument("--iterations", type=int, default=1)
    s.set_defaults(func=cmd_psi)

    s = sub.add_parser("theta", parents=[common], help="agreement table of the Theta_k convergents")
    s.add_argument("--k", type=int, default=2)
    s.add_argument("--steps", type=int, default=6)
    s.set_defaults(func=cmd_theta)

    s = sub.add_parser("mellin", parents=[common], help="Mellin transform of a group ring element")
    s.add_argument("--level", type=int)
    s.add_argument("--input", required=True)
    s.set_defaults(func=cmd_mellin)

    s = sub.add_parser("snf", parents=[common], help="elementary divisor chain of a matrix file")
    s.add_argument("--matrix-file", required=True)
    s.add_argument("--factors", default="auto", help="'auto' or comma-separated pi:n:j symbols")
    s.set_defaults(func=cmd_snf)

    s = sub.add_parser("predict", parents=[common], help="predicted chain, determinant and annihilator")
    s.add_argument("--module-file", required=True)
    s.set_defaults(func=cmd_predict)

    s = sub.add_parser("verify", parents=[common], help="run a verification suite")
    s.add_argument("--suite", choices=sorted(SUITES) + ["all"], default="all")
    s.set_defaults(func=cmd_verify)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        ctx = SeriesContext(p=args.p, u=args.u, prec=args.prec, x_trunc=args.xtrunc)
    except (PadicError, ValueError) as exc:
        print(f"iwatool: invalid configuration: {exc}", file=sys.stderr)
        return INPUT_ERROR
    if args.samples < 0:
        print("iwatool: --samples must be non-negative", file=sys.stderr)
        return INPUT_ERROR
    try:
        records, code = args.func(args, ctx)
    except InputError as exc:
        print(f"iwatool: {exc}", file=sys.stderr)
        return INPUT_ERROR
    except (HypothesisError, NoChainError) as exc:
        print(f"iwatool: {exc}", file=sys.stderr)
        return INPUT_ERROR
    except (PrecisionError, PadicError) as exc:
        print(f"iwatool: {exc}", file=sys.stderr)
        return CHECK_FAILED if isinstance(exc, ArithmeticError) else INPUT_ERROR
    text = render(records, args.format)
    if args.out:
        args.out.write_text(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
