"""Command-line front end.

Two commands:

    catalytic analyze  INPUT [flags]   full pipeline on one equation
    catalytic validate NAME | --all    replay corpus expectations

INPUT is a path to a DSL file or corpus:NAME.  Exit codes: 0 success,
2 analysis failure (including unknown corpus entries and validation
failures), 1 usage error.

JSON reports carry every numeric value as a decimal string at the
working precision (rationals as "p/q"), never as binary floats, so
downstream comparisons are bit-exact.  Text output rounds for reading.
The JSON layout is documented in the README; it contains no timing
field, keeping identical inputs byte-identical across runs.
"""

import argparse
import json
import os
import sys
import time
import warnings

import gmpy2
from gmpy2 import mpfr, mpq

from . import corpus as corpus_mod
from .engine import solve_series
from .errors import AnalysisError, NotApplicableError
from .linear import (kernel_solve, linear_asymptotics, linear_critical_point)
from .model import (CatalyticEquation, classify, linear_decomposition,
                    parse_equation)
from .nonlinear import (critical_point, derive_system, nonlinear_asymptotics,
                        puiseux_expansion)
from .numeric import DEFAULT_BITS, precision

ENV_PRECISION = "CATALYTIC_PRECISION"


class _Parser(argparse.ArgumentParser):
    # usage problems exit 1; argparse's default of 2 is reserved for
    # analysis failures here
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _build_parser():
    p = _Parser(prog="catalytic",
                description="solve and analyze catalytic equations")
    sub = p.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze", help="run the pipeline on one equation")
    a.add_argument("input", help="DSL file path or corpus:NAME")
    a.add_argument("--coeffs", type=int, metavar="N",
                   help="print the first N exact coefficients of M(z,0)")
    a.add_argument("--asymptotics", action="store_true",
                   help="extrapolate growth constants (slower)")
    a.add_argument("--clt", action="store_true",
                   help="limit-law report for the x-marked parameter")
    a.add_argument("--precision", type=int, metavar="BITS",
                   help=f"working precision (default {DEFAULT_BITS}, or "
                        f"${ENV_PRECISION})")
    a.add_argument("--json", metavar="PATH",
                   help="also write the full-precision JSON report")
    a.add_argument("--expect-z0", metavar="VALUE",
                   help="branch hint for equations with negative "
                        "coefficients")
    a.add_argument("--shift-u", metavar="C",
                   help="substitute u -> u + C before analysis; the "
                        "difference term is reread at the new origin")

    v = sub.add_parser("validate", help="check corpus entries")
    v.add_argument("name", nargs="?", help="entry name")
    v.add_argument("--all", action="store_true", help="validate every entry")
    v.add_argument("--precision", type=int, metavar="BITS")
    return p


def _bits(args):
    if args.precision:
        return args.precision
    env = os.environ.get(ENV_PRECISION)
    if env:
        try:
            return int(env)
        except ValueError:
            pass
    return DEFAULT_BITS


def _dec(v):
    """Full-precision decimal string for the JSON report.

    mpfr values are stringified directly: re-wrapping through mpfr()
    would round them to the ambient context and lose digits.
    """
    if v is None:
        return None
    if isinstance(v, mpq):
        return str(v)
    if isinstance(v, (int, bool)):
        return v
    return str(v)


def _short(v, digits=12):
    if v is None:
        return "-"
    return gmpy2.mpfr(mpfr(v)).__format__(f".{digits}g")


def _read_input(spec):
    if spec.startswith("corpus:"):
        entry = corpus_mod.load(spec[len("corpus:"):])
        return entry.text, entry
    with open(spec, encoding="ascii") as fh:
        lines = [ln.strip() for ln in fh]
    lines = [ln for ln in lines if ln and not ln.startswith("#")]
    if not lines:
        raise AnalysisError(f"no equation found in {spec}")
    return lines[0], None


def _linear_report(eq, args, bits, report):
    dec = linear_decomposition(eq)
    if args.asymptotics:
        data = linear_asymptotics(dec, 2000, bits)
        report["critical_point"] = {"z0": _dec(data.z0),
                                    "u_at_z0": _dec(data.u0)}
        report["puiseux"] = {"a0": _dec(data.puiseux[0]),
                             "a1": _dec(data.puiseux[1]),
                             "a2": _dec(data.puiseux[2])}
        with precision(bits):
            gamma = 1 / mpfr(data.z0)
        report["asymptotics"] = {
            "gamma": _dec(gamma),
            "exponent": "-3/2",
            "singular_exponent": "1/2",
            "period_b": data.b,
            "residues": data.residues,
            "constants": {str(j): _dec(c) for j, c in data.constants.items()},
            "transfer_gap": _dec(data.b1_transfer_gap),
        }
    else:
        z0, u0 = linear_critical_point(dec, bits=bits)
        report["critical_point"] = {"z0": _dec(z0), "u_at_z0": _dec(u0)}


def _degenerate_report(eq, args, bits, report):
    sol = kernel_solve(linear_decomposition(eq), 40)
    num, den = sol.rational_form
    report["rational_form"] = {"numerator": str(num), "denominator": str(den)}


def _nonlinear_report(eq, args, bits, report):
    sys_ = derive_system(eq)
    cp = critical_point(sys_, bits, expect_z0=args.expect_z0)
    report["critical_point"] = {
        "z0": _dec(cp.z0), "f0": _dec(cp.f0), "u0": _dec(cp.u0),
        "w0": _dec(cp.w0), "det_residual": _dec(cp.det_residual),
        "perron_root": _dec(cp.perron_root), "mode": cp.mode,
        "strongly_connected": cp.strongly_connected,
    }
    pe = puiseux_expansion(sys_, cp)
    report["puiseux"] = {
        "a0": _dec(pe.a0), "a2": _dec(pe.a2), "a3": _dec(pe.a3),
        "a4": _dec(pe.a4), "y1_residual": _dec(pe.y1_residual),
        "fit_residual": _dec(pe.fit_residual),
    }
    if args.asymptotics:
        af = nonlinear_asymptotics(eq, cp, pe, 1200, bits)
        report["asymptotics"] = {
            "gamma": _dec(af.gamma),
            "exponent": str(af.exponent),
            "singular_exponent": str(af.singular_exponent),
            "period_b": af.b,
            "residues": af.residues,
            "constants": {str(j): _dec(c) for j, c in af.constants.items()},
            "transfer_gap": _dec(af.transfer_gap),
        }


def _clt_report(eq, args, bits, entry, report):
    from .clt import clt
    mp = "u1"
    if entry is not None:
        mp = entry.settings.get("moment_point", "u1")
    rep = clt(eq, bits=bits, expect_z0=args.expect_z0, moment_point=mp)
    report["clt"] = {
        "rho1": _dec(rep.rho1), "rho_d1": _dec(rep.rho_d1),
        "rho_d2": _dec(rep.rho_d2), "mu": _dec(rep.mu),
        "sigma2": _dec(rep.sigma2),
        "clt_applicable": rep.clt_applicable,
        "stencil_error": _dec(rep.stencil_error),
        "periodicity": list(rep.periodicity),
        "moment_point": mp,
        "empirical": [[n, str(e), str(v)] for n, e, v in rep.empirical],
        "note": rep.note,
    }


def cmd_analyze(args):
    bits = _bits(args)
    text, entry = _read_input(args.input)
    if args.expect_z0 is None and entry is not None:
        args.expect_z0 = entry.settings.get("expect_z0")
    t0 = time.time()
    captured = []
    with warnings.catch_warnings(record=True) as wl:
        warnings.simplefilter("always")
        eq = parse_equation(text)
        if args.shift_u:
            eq = CatalyticEquation(eq.rhs.shift_u(mpq(args.shift_u)))
        cls = classify(eq)
        report = {
            "input": args.input,
            "equation": text,
            "precision_bits": bits,
            "classification": {"label": cls.label, "detail": cls.detail},
        }
        if args.shift_u:
            report["shift_u"] = str(mpq(args.shift_u))
        if args.coeffs:
            sol = solve_series(eq, args.coeffs)
            report["coefficients"] = [str(c) for c in sol.m0.coeffs]
        label = cls.label
        if label in ("LINEAR_GENERIC",):
            _linear_report(eq, args, bits, report)
        elif label.startswith("LINEAR_DEGENERATE"):
            _degenerate_report(eq, args, bits, report)
        elif label == "NONLINEAR_DEGENERATE":
            report["analysis_note"] = ("reduces to a one-variable problem "
                                       f"({cls.detail}); no singular system")
        else:
            _nonlinear_report(eq, args, bits, report)
        if args.clt:
            _clt_report(eq, args, bits, entry, report)
    captured = sorted(set(str(w.message) for w in wl))
    report["warnings"] = captured
    elapsed = time.time() - t0

    _print_report(report, elapsed)
    if args.json:
        with open(args.json, "w", encoding="ascii") as fh:
            json.dump(report, fh, indent=2, sort_keys=True)
            fh.write("\n")
    return 0


def _print_report(report, elapsed):
    out = sys.stdout
    print(f"equation: {report['equation']}", file=out)
    cls = report["classification"]
    detail = f" ({cls['detail']})" if cls.get("detail") else ""
    print(f"classification: {cls['label']}{detail}", file=out)
    if "coefficients" in report:
        shown = ", ".join(report["coefficients"][:12])
        more = "" if len(report["coefficients"]) <= 12 else ", ..."
        print(f"coefficients: {shown}{more}", file=out)
    if "rational_form" in report:
        rf = report["rational_form"]
        print(f"rational form: ({rf['numerator']}) / ({rf['denominator']})",
              file=out)
    if "analysis_note" in report:
        print(f"note: {report['analysis_note']}", file=out)
    cp = report.get("critical_point")
    if cp:
        line = f"critical point: z0 = {_short(cp['z0'])}"
        if "det_residual" in cp:
            line += (f"  (det residual {_short(cp['det_residual'], 3)}, "
                     f"mode {cp['mode']})")
        elif "u_at_z0" in cp:
            line += f", u(z0) = {_short(cp['u_at_z0'])}"
        print(line, file=out)
    pe = report.get("puiseux")
    if pe:
        names = [k for k in ("a0", "a1", "a2", "a3") if k in pe]
        vals = ", ".join(f"{k} = {_short(pe[k])}" for k in names)
        print(f"singular expansion: {vals}", file=out)
    af = report.get("asymptotics")
    if af:
        cs = ", ".join(f"c[{j}] = {_short(c)}"
                       for j, c in sorted(af["constants"].items()))
        print(f"asymptotics: n^({af['exponent']}) growth, gamma = "
              f"{_short(af['gamma'])}, period {af['period_b']}, {cs}",
              file=out)
    clt = report.get("clt")
    if clt:
        tag = "applies" if clt["clt_applicable"] else "degenerate"
        print(f"limit law ({tag}): mu = {_short(clt['mu'])}, sigma^2 = "
              f"{_short(clt['sigma2'])}", file=out)
    for w in report["warnings"]:
        print(f"warning: {w}", file=out)
    print(f"time: {elapsed:.2f}s", file=out)


def cmd_validate(args):
    if not args.all and not args.name:
        raise UsageError("validate needs an entry name or --all")
    names = corpus_mod.list_entries() if args.all else [args.name]
    bits = args.precision or _bits(args)
    failed = False
    for name in names:
        rep = corpus_mod.validate(name, bits=bits)
        status = "pass" if rep.passed else "FAIL"
        print(f"{name}: {status}")
        for c in rep.checks:
            mark = "ok " if c.passed else "FAIL"
            want = "" if c.want is None else f" want {c.want}"
            tol = "" if c.tol is None else f" tol {c.tol}"
            print(f"  [{mark}] {c.quantity}{want}{tol}")
        failed = failed or not rep.passed
    return 2 if failed else 0


class UsageError(Exception):
    pass


def main(argv=None):
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "analyze":
            return cmd_analyze(args)
        return cmd_validate(args)
    except UsageError as exc:
        print(f"catalytic: error: {exc}", file=sys.stderr)
        return 1
    except AnalysisError as exc:
        print(f"catalytic: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"catalytic: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
