"""Built-in example equations with machine-checked expected values.

Each entry ships as a standalone DSL file under corpus_data/ plus a
registry record: a note on the transform its statement carries, the
routing kind, and a list of expected quantities with per-quantity
tolerances.  Expected values are exact strings (rationals, or radical
expressions over sqrt and pi) evaluated at working precision when a
validation runs; no floating literals appear in the fixtures.

validate(name) replays the full pipeline appropriate to the entry's
kind and reports pass/fail per quantity.  The checks lean on closed
forms where one exists (Motzkin sum, Catalan, binomial rational forms,
the planar and simple-map counting formulas) and on structural
certificates everywhere else.
"""

import math
import os
import warnings
from collections import namedtuple

import gmpy2
from gmpy2 import mpfr, mpq

from .errors import AnalysisError, UnknownEntryError
from .linear import (kernel_solve, linear_asymptotics, rational_series)
from .model import classify, linear_decomposition, parse_equation
from .nonlinear import (critical_point, derive_system, nonlinear_asymptotics,
                        puiseux_expansion, system_m0, system_series)
from .numeric import DEFAULT_BITS, precision
from .poly import MultiPoly

_DATA = os.path.join(os.path.dirname(__file__), "corpus_data")

CorpusEntry = namedtuple("CorpusEntry",
                         ["name", "text", "note", "kind", "checks",
                          "settings"])
Check = namedtuple("Check", ["quantity", "passed", "got", "want", "tol"])


class ValidationReport:
    """Pass/fail per expected quantity for one corpus entry."""

    def __init__(self, name, checks):
        self.name = name
        self.checks = checks

    @property
    def passed(self):
        return all(c.passed for c in self.checks)

    @property
    def failures(self):
        return [c for c in self.checks if not c.passed]

    def __repr__(self):
        n_ok = sum(1 for c in self.checks if c.passed)
        return f"ValidationReport({self.name}: {n_ok}/{len(self.checks)} ok)"


# ---------------------------------------------------------------------------
# closed-form coefficient oracles


def _catalan(n):
    return math.comb(2 * n, n) // (n + 1)


def _motzkin_coeff(n):
    return sum(math.comb(n, 2 * k) * _catalan(k) for k in range(n // 2 + 1))


def _dyck_coeff(n):
    return _catalan(n // 2) if n % 2 == 0 else 0


def _planar_coeff(n):
    return 2 * 3**n * math.comb(2 * n, n) // ((n + 1) * (n + 2))


def _lattice2_coeff(k0):
    # [z^n] z^k0 / (1 - z^2)^(k0+1)
    def coeff(n):
        if n < k0 or (n - k0) % 2:
            return 0
        return math.comb((n - k0) // 2 + k0, k0)
    return coeff


def _lattice3_coeff(n):
    return 1 if n % 2 == 0 else 0


def _simple_series(n):
    """Exact expansion of (1+20z-8z^2+(1-8z)^{3/2})/(2(1+z)^3) - 1."""
    num = [mpq(1), mpq(20), mpq(-8)] + [mpq(0)] * max(0, n - 2)
    # binomial series for (1-8z)^(3/2)
    c = mpq(1)
    for k in range(n + 1):
        num[k] += c * mpq(-8) ** k
        c = c * (mpq(3, 2) - k) / (k + 1)
    den = [mpq(2), mpq(6), mpq(6), mpq(2)] + [mpq(0)] * max(0, n - 3)
    out = []
    for m in range(n + 1):
        s = num[m]
        for i in range(1, m + 1):
            s -= den[i] * out[m - i]
        out.append(s / den[0])
    out[0] -= 1
    return out


_ORACLES = {
    "motzkin": lambda n: [_motzkin_coeff(i) for i in range(n + 1)],
    "dyck": lambda n: [_dyck_coeff(i) for i in range(n + 1)],
    "planar": lambda n: [_planar_coeff(i) for i in range(n + 1)],
    "lattice2-1": lambda n: [_lattice2_coeff(1)(i) for i in range(n + 1)],
    "lattice2-2": lambda n: [_lattice2_coeff(2)(i) for i in range(n + 1)],
    "lattice2-3": lambda n: [_lattice2_coeff(3)(i) for i in range(n + 1)],
    "lattice3": lambda n: [_lattice3_coeff(i) for i in range(n + 1)],
    "simple": _simple_series,
}


# ---------------------------------------------------------------------------
# registry

# check spec: (quantity, expected string or oracle key, tolerance, mode)
# modes: abs, rel, series (exact), bound (got <= tol), label, int,
#        means (E[X_n] exact), quartic (residual bound), warns, identity,
#        positivity, rational (polynomial pair), sqrt_type

_REGISTRY = {
    "motzkin": dict(
        kind="linear",
        note="up steps and level steps grouped as u+1",
        settings={"n_fit": 2000},
        checks=[
            ("label", "LINEAR_GENERIC", None, "label"),
            ("series", "motzkin", 50, "series"),
            ("positivity", None, 60, "positivity"),
            ("z0", "1/3", "1e-20", "abs"),
            ("u_at_z0", "1", "1e-20", "abs"),
            ("a0", "3", "1e-8", "abs"),
            ("a1", "-3*sqrt(3)", "1e-8", "abs"),
            ("b", "1", None, "int"),
            ("c:0", "3*sqrt(3)/(2*sqrt(pi))", "0.005", "rel"),
        ],
    ),
    "dyck": dict(
        kind="linear",
        note="none",
        settings={"n_fit": 2000},
        checks=[
            ("label", "LINEAR_GENERIC", None, "label"),
            ("series", "dyck", 50, "series"),
            ("positivity", None, 60, "positivity"),
            ("z0", "1/2", "1e-20", "abs"),
            ("u_at_z0", "1", "1e-20", "abs"),
            ("b", "2", None, "int"),
            ("c:0", "2*sqrt(2)/sqrt(pi)", "0.01", "rel"),
        ],
    ),
    "lattice-deg-2-k1": dict(
        kind="degenerate",
        note="initial column of height one",
        settings={},
        checks=[
            ("label", "LINEAR_DEGENERATE_2", None, "label"),
            ("series", "lattice2-1", 100, "series"),
            ("rational_form", 1, None, "rational"),
        ],
    ),
    "lattice-deg-2-k2": dict(
        kind="degenerate",
        note="initial column of height two",
        settings={},
        checks=[
            ("label", "LINEAR_DEGENERATE_2", None, "label"),
            ("series", "lattice2-2", 100, "series"),
            ("rational_form", 2, None, "rational"),
        ],
    ),
    "lattice-deg-2-k3": dict(
        kind="degenerate",
        note="initial column of height three",
        settings={},
        checks=[
            ("label", "LINEAR_DEGENERATE_2", None, "label"),
            ("series", "lattice2-3", 100, "series"),
            ("rational_form", 3, None, "rational"),
        ],
    ),
    "lattice-deg-3": dict(
        kind="degenerate",
        note="difference coefficient divisible by u, so u(z) = 0",
        settings={},
        checks=[
            ("label", "LINEAR_DEGENERATE_3", None, "label"),
            ("series", "lattice3", 100, "series"),
        ],
    ),
    "planar-maps": dict(
        kind="nonlinear",
        note="catalytic variable shifted by one; the u=0 section counts "
             "all maps",
        settings={"n_fit": 1200},
        checks=[
            ("label", "NONLINEAR_GENERIC", None, "label"),
            ("series", "planar", 50, "series"),
            ("positivity", None, 60, "positivity"),
            ("identity", None, 30, "identity"),
            ("z0", "1/12", "1e-20", "abs"),
            ("det_residual", None, "1e-30", "bound"),
            ("perron_gap", None, "1e-20", "bound"),
            ("a0", "4/3", "1e-8", "abs"),
            ("a2", "-4/3", "1e-8", "abs"),
            ("a3", "8/3", "1e-8", "abs"),
            ("sqrt_type", None, None, "sqrt_type"),
            ("b", "1", None, "int"),
            ("c:0", "2/sqrt(pi)", "0.001", "rel"),
            ("transfer_gap", None, "1e-3", "bound"),
        ],
    ),
    "planar-maps-vertices": dict(
        kind="marked",
        note="vertex count marked on the atomic map; stated in the "
             "shifted catalytic variable, so moments read the u=0 section",
        settings={"moment_point": "u0"},
        checks=[
            ("positivity", None, 60, "positivity"),
            ("det_residual", None, "1e-30", "bound"),
            ("perron_gap", None, "1e-20", "bound"),
            ("rho1", "1/12", "1e-8", "abs"),
            ("rho_d1", "-1/24", "1e-8", "abs"),
            ("rho_d2", "19/384", "1e-8", "abs"),
            ("mu", "1/2", "1e-8", "abs"),
            ("sigma2", "5/32", "1e-8", "abs"),
            ("means", None, 30, "means"),
            ("quartic", None, "1e-12", "quartic"),
        ],
    ),
    "bipartite-v": dict(
        kind="nonlinear",
        note="stated in v with u = sqrt(1+v), which turns the quadratic "
             "difference denominator into a plain one",
        settings={},
        checks=[
            ("label", "NONLINEAR_GENERIC", None, "label"),
            ("positivity", None, 60, "positivity"),
            ("identity", None, 30, "identity"),
            ("det_residual", None, "1e-30", "bound"),
            ("perron_gap", None, "1e-20", "bound"),
            ("z0", "1/8", "1e-20", "abs"),
            ("sqrt_type", None, None, "sqrt_type"),
        ],
    ),
    "two-connected": dict(
        kind="nonlinear",
        note="shifted by one; one monomial carries no z factor, so the "
             "contraction comes from the u-valuation",
        settings={},
        checks=[
            ("label", "NONLINEAR_GENERIC", None, "label"),
            ("positivity", None, 60, "positivity"),
            ("identity", None, 30, "identity"),
            ("det_residual", None, "1e-30", "bound"),
            ("perron_gap", None, "1e-20", "bound"),
            ("z0", "4/27", "1e-20", "abs"),
            ("sqrt_type", None, None, "sqrt_type"),
        ],
    ),
    "triangulations-tilde": dict(
        kind="nonlinear",
        note="ratio transform removing the negative term; the u=0 "
             "section is unchanged by it",
        settings={},
        checks=[
            ("label", "NONLINEAR_GENERIC", None, "label"),
            ("positivity", None, 60, "positivity"),
            ("identity", None, 30, "identity"),
            ("det_residual", None, "1e-30", "bound"),
            ("perron_gap", None, "1e-20", "bound"),
            ("sqrt_type", None, None, "sqrt_type"),
        ],
    ),
    "simple-maps": dict(
        kind="generic",
        note="decremented encoding: the stored series is the count "
             "minus one, so closed-form checks add the one back",
        settings={"expect_z0": "0.125"},
        checks=[
            ("label", "GENERIC_MODE", None, "label"),
            ("series", "simple", 50, "series"),
            ("identity", None, 30, "identity"),
            ("warns", "negative coefficients", None, "warns"),
            ("z0", "1/8", "1e-10", "abs"),
            ("a0", "5/27", "1e-8", "abs"),
            ("a3", "256/729", "1e-8", "abs"),
            ("sqrt_type", None, None, "sqrt_type"),
        ],
    ),
}


def list_entries():
    """Names of the built-in equations, deterministically ordered."""
    return sorted(_REGISTRY)


def load(name):
    """Read one entry: DSL text from its file plus registry metadata."""
    if name not in _REGISTRY:
        raise UnknownEntryError(f"no corpus entry named {name!r}",
                                known=",".join(list_entries()))
    path = os.path.join(_DATA, name + ".eq")
    with open(path, encoding="ascii") as fh:
        text = fh.read().strip()
    rec = _REGISTRY[name]
    return CorpusEntry(name, text, rec["note"], rec["kind"],
                       list(rec["checks"]), dict(rec["settings"]))


def evaluate_expected(expr):
    """Exact string -> number at current precision.

    Plain integer ratios become exact rationals; anything else may use
    sqrt and pi and becomes a float of the active precision.
    """
    expr = expr.strip()
    try:
        return mpq(expr)
    except ValueError:
        pass
    allowed = {"sqrt": gmpy2.sqrt, "pi": gmpy2.const_pi(), "mpq": mpq,
               "__builtins__": {}}
    return eval(expr, allowed)  # noqa: S307 - fixed vocabulary, no user input


# ---------------------------------------------------------------------------
# validation pipeline


class _Session:
    """Caches pipeline stages shared between checks of one entry."""

    def __init__(self, entry, bits):
        self.entry = entry
        self.bits = bits
        self.eq = parse_equation(entry.text)
        self.warnings = []
        self._cache = {}

    def _get(self, key, build):
        if key not in self._cache:
            with warnings.catch_warnings(record=True) as wl:
                warnings.simplefilter("always")
                self._cache[key] = build()
            self.warnings.extend(str(w.message) for w in wl)
        return self._cache[key]

    @property
    def classification(self):
        return self._get("cls", lambda: classify(self.eq))

    @property
    def kernel(self):
        dec = linear_decomposition(self.eq)
        n = max((c[2] for c in self.entry.checks if c[3] == "series"),
                default=50)
        return self._get("kernel", lambda: kernel_solve(dec, n))

    @property
    def linear_data(self):
        dec = linear_decomposition(self.eq)
        n_fit = self.entry.settings.get("n_fit", 1200)
        return self._get("lin", lambda: linear_asymptotics(dec, n_fit,
                                                           self.bits))

    @property
    def sys(self):
        return self._get("sys", lambda: derive_system(self.eq))

    @property
    def cp(self):
        hint = self.entry.settings.get("expect_z0")
        return self._get("cp", lambda: critical_point(self.sys, self.bits,
                                                      expect_z0=hint))

    @property
    def pe(self):
        return self._get("pe", lambda: puiseux_expansion(self.sys, self.cp))

    @property
    def af(self):
        n_fit = self.entry.settings.get("n_fit", 1200)
        return self._get("af", lambda: nonlinear_asymptotics(
            self.eq, self.cp, self.pe, n_fit, self.bits))

    @property
    def clt_report(self):
        from .clt import clt
        mp = self.entry.settings.get("moment_point", "u1")
        hint = self.entry.settings.get("expect_z0")
        return self._get("clt", lambda: clt(self.eq, bits=self.bits,
                                            expect_z0=hint, moment_point=mp))

    def m0_series(self, n):
        if self.entry.kind in ("linear", "degenerate"):
            dec = linear_decomposition(self.eq)
            return kernel_solve(dec, n).m0_formula.coeffs
        sys = self.sys
        f, w, u = system_series(sys, n)
        return system_m0(f, w, u)


def _quantity(ses, quantity):
    """Fetch one computed value by quantity name."""
    kind = ses.entry.kind
    if quantity in ("z0", "u_at_z0", "a0", "a1", "a2", "a3"):
        if kind in ("linear",):
            data = ses.linear_data
            return {"z0": data.z0, "u_at_z0": data.u0,
                    "a0": data.puiseux[0], "a1": data.puiseux[1],
                    "a2": data.puiseux[2]}[quantity]
        if quantity == "z0":
            return ses.cp.z0
        pe = ses.pe
        return {"a0": pe.a0, "a2": pe.a2, "a3": pe.a3}[quantity]
    if quantity == "b":
        return ses.linear_data.b if kind == "linear" else ses.af.b
    if quantity.startswith("c:"):
        j = int(quantity[2:])
        data = ses.linear_data if kind == "linear" else ses.af
        return data.constants[j]
    if quantity == "det_residual":
        return ses.cp.det_residual
    if quantity == "perron_gap":
        return abs(mpfr(ses.cp.perron_root) - 1)
    if quantity == "transfer_gap":
        gap = ses.af.transfer_gap
        return gap if gap is not None else mpfr(0)
    if quantity in ("rho1", "rho_d1", "rho_d2", "mu", "sigma2"):
        return getattr(ses.clt_report, quantity)
    raise AnalysisError(f"unknown quantity {quantity!r}")


def _run_check(ses, spec, bits):
    quantity, want, tol, mode = spec
    with precision(max(bits, 512)):
        if mode == "label":
            got = ses.classification.label
            return Check(quantity, got == want, got, want, None)
        if mode == "series":
            n = tol
            oracle = _ORACLES[want](n)
            got = ses.m0_series(n)
            ok = all(got[i] == oracle[i] for i in range(n + 1))
            return Check(quantity, ok, f"first {n + 1} coefficients",
                         want, None)
        if mode == "positivity":
            coeffs = ses.m0_series(tol)
            ok = all(c >= 0 for c in coeffs)
            return Check(quantity, ok, "all nonnegative", None, tol)
        if mode == "identity":
            n = tol
            f, w, u = system_series(ses.sys, n)  # aborts on mismatch
            return Check(quantity, True, f"exact through {n}", None, n)
        if mode == "rational":
            k0 = want
            num, den = ses.kernel.rational_form
            z = MultiPoly.var("z")
            zpow = MultiPoly.const(1)
            for _ in range(k0):
                zpow = zpow * z
            base = MultiPoly.const(1) - z * z
            dpow = MultiPoly.const(1)
            for _ in range(k0 + 1):
                dpow = dpow * base
            ok = (num == zpow and den == dpow)
            if not ok:
                # scaled forms are equivalent; compare the series too
                s1 = rational_series(num, den, 100).coeffs
                s2 = rational_series(zpow, dpow, 100).coeffs
                ok = s1 == s2
            return Check(quantity, ok, "z^k0/(1-z^2)^(k0+1)", k0, None)
        if mode == "abs":
            got = mpfr(_quantity(ses, quantity))
            target = evaluate_expected(want)
            ok = abs(got - mpfr(target)) < mpfr(tol)
            return Check(quantity, ok, got, want, tol)
        if mode == "rel":
            got = mpfr(_quantity(ses, quantity))
            target = mpfr(evaluate_expected(want))
            ok = abs(got - target) / abs(target) < mpfr(tol)
            return Check(quantity, ok, got, want, tol)
        if mode == "bound":
            got = mpfr(_quantity(ses, quantity))
            ok = got <= mpfr(tol)
            return Check(quantity, ok, got, f"<= {tol}", tol)
        if mode == "int":
            got = _quantity(ses, quantity)
            return Check(quantity, int(got) == int(want), got, want, None)
        if mode == "sqrt_type":
            pe = ses.pe
            ok = (pe.y1_residual <= mpfr("1e-6") * abs(mpfr(pe.a3))
                  and mpfr(pe.a3) > 0)
            return Check(quantity, ok, "3/2", "3/2", None)
        if mode == "means":
            rep = ses.clt_report
            ok = all(mean == mpq(n, 2) + 1 for n, mean, _v in rep.empirical
                     if n <= tol)
            return Check(quantity, ok, "E[X_n] = n/2 + 1", None, tol)
        if mode == "quartic":
            from .clt import rho_of_x
            def q(x, zz):
                return (768*x**4*zz**4 - 1536*x**3*zz**4 - 512*x**3*zz**3
                        + 2304*x**2*zz**4 + 768*x**2*zz**3 - 1536*x*zz**4
                        + 96*x**2*zz**2 + 768*x*zz**3 + 768*zz**4
                        - 96*x*zz**2 - 512*zz**3 + 96*zz**2 - 1)
            worst = mpfr(0)
            for xs in ("0.9", "1.1"):
                cp = rho_of_x(ses.eq, xs, bits)
                worst = max(worst, abs(q(mpfr(xs), mpfr(cp.z0))))
            ok = worst <= mpfr(tol)
            return Check(quantity, ok, worst, f"<= {tol}", tol)
        if mode == "warns":
            ses.cp  # force the analysis that should warn
            ok = any(want in msg for msg in ses.warnings)
            return Check(quantity, ok, ses.warnings, want, None)
    raise AnalysisError(f"unknown check mode {mode!r}")


def validate(name, bits=DEFAULT_BITS):
    """Replay the pipeline for one entry and compare every expectation."""
    entry = load(name)
    ses = _Session(entry, bits)
    checks = [_run_check(ses, spec, bits) for spec in entry.checks]
    return ValidationReport(name, checks)
