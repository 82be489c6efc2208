"""Gaussian limit laws for a marked parameter.

For an equation carrying the marking variable x, the singularity
z = rho(x) of the fixed-x solution moves analytically, and the
parameter X_n counted by x obeys a central limit theorem with

    mu = -rho'(1)/rho(1),
    sigma^2 = mu + mu^2 - rho''(1)/rho(1),

provided sigma^2 > 0.  rho(x) comes from the extended critical system
solved at fixed x, seeded along a short continuation path from the
x = 1 point.  The derivatives are central finite differences over
h in {1e-4, 1e-5, 1e-6} with Richardson extrapolation; at 256 bits the
stencil cancellation is harmless and the extrapolants agree to many
digits, so any real disagreement signals a branch jump and is raised.

Exact moments come from a jet solve: coefficients live in the ring of
second-order Taylor jets at x = 1, so one engine pass yields the value,
first and second x-derivative of every series coefficient, and with
them E[X_n] and Var[X_n] as exact rationals.
"""

import warnings
from collections import namedtuple

import gmpy2
from gmpy2 import mpfr, mpq

from .engine import solve_series
from .errors import (NoConvergenceError, NotApplicableError,
                     StencilInconsistentError)
from .nonlinear import (critical_point, derive_system, newton_critical,
                        CriticalPoint, _critical_polys, _point_dict)
from .numeric import DEFAULT_BITS, precision

CltReport = namedtuple("CltReport", [
    "rho1", "rho_d1", "rho_d2", "mu", "sigma2", "clt_applicable",
    "empirical", "periodicity", "stencil_error", "note"])

RhoDerivatives = namedtuple("RhoDerivatives",
                            ["rho1", "rho_d1", "rho_d2", "error_estimate"])

_SECTION_NOTE = (
    "positivity of the counting sequence is read off the u=0 section "
    "while the probability generating function reads the u=1 section; "
    "moment_point records which section the empirical moments use")


def _solve_at_x(sys, seed, xval, bits):
    """One Newton solve of the extended system with x pinned."""
    try:
        return newton_critical(sys, seed, bits, x=xval)
    except NoConvergenceError:
        return None


def _continue_in_x(sys, cp, xval, bits):
    """Walk x from 1 to xval re-solving the extended system.

    Steps of at most 0.05, halved on failure; the seed is always the
    previously solved point, so for stencil-sized offsets this is a
    single Newton call.
    """
    with precision(bits):
        xval = mpfr(xval)
        if xval <= 0:
            raise NoConvergenceError("marking value must be positive",
                                     x=str(xval))
        x = mpfr(1)
        point = (mpfr(cp.f0), mpfr(cp.w0), mpfr(cp.u0), mpfr(cp.z0))
        step = gmpy2.sign(xval - x) * mpfr("0.05")
        fails = 0
        while x != xval:
            nxt = xval if abs(xval - x) <= abs(step) else x + step
            got = _solve_at_x(sys, point, nxt, bits)
            if got is None:
                fails += 1
                if fails > 8:
                    raise NoConvergenceError(
                        "continuation in the marking variable stalled",
                        x=str(nxt))
                step = step / 2
                continue
            point, _resid = got
            x = nxt
        return point


def rho_of_x(eq, x, bits=DEFAULT_BITS, expect_z0=None):
    """Critical point of the fixed-x equation, as a CriticalPoint.

    Seeds from the x=1 solution and continues in x, so x has to lie in
    a neighborhood of 1 the continuation can reach (roughly [0.5, 2]
    for the corpus entries; NO_CONVERGENCE otherwise).  An x-free
    equation just reproduces its critical point for every x.
    """
    sys = derive_system(eq)
    cp = critical_point(sys, bits, expect_z0=expect_z0)
    return _rho_point(sys, cp, x, bits)


def _rho_point(sys, cp, xval, bits):
    f, w, u, z = _continue_in_x(sys, cp, xval, bits)
    g, _, _ = _critical_polys(sys)
    with precision(bits):
        det_resid = abs(g[3].eval_point(_point_dict(f, w, u, z, mpfr(xval))))
    return CriticalPoint(z, f, u, w, None, det_resid, None, cp.mode,
                         sys.strongly_connected)


def _richardson_pair(vals):
    # vals at h, h/10, h/100 with even-power error terms
    r1 = (100 * vals[1] - vals[0]) / 99
    r2 = (100 * vals[2] - vals[1]) / 99
    final = (10000 * r2 - r1) / 9999
    return final, abs(r2 - r1)


def rho_derivatives(eq, bits=DEFAULT_BITS, expect_z0=None):
    """(rho(1), rho'(1), rho''(1)) by Richardson-extrapolated stencils."""
    sys = derive_system(eq)
    cp = critical_point(sys, bits, expect_z0=expect_z0)
    return _rho_derivatives(sys, cp, bits)


def _rho_derivatives(sys, cp, bits):
    with precision(bits):
        rho1 = mpfr(cp.z0)
        hs = [mpfr("1e-4"), mpfr("1e-5"), mpfr("1e-6")]
        d1s, d2s = [], []
        for h in hs:
            rp = _continue_in_x(sys, cp, 1 + h, bits)[3]
            rm = _continue_in_x(sys, cp, 1 - h, bits)[3]
            d1s.append((rp - rm) / (2 * h))
            d2s.append((rp - 2 * rho1 + rm) / (h * h))
        d1, e1 = _richardson_pair(d1s)
        d2, e2 = _richardson_pair(d2s)
        err = max(e1, e2)
        scale = max(mpfr(1), abs(d1), abs(d2))
        if err > mpfr("1e-6") * scale:
            raise StencilInconsistentError(
                "derivative stencils disagree after extrapolation",
                error=str(err), rho_d1=str(d1), rho_d2=str(d2))
    return RhoDerivatives(rho1, d1, d2, err)


def _support_residues(values):
    # period of the unmarked section and the class holding its support
    idx = [n for n, v in enumerate(values) if v != 0]
    if len(idx) < 2:
        return (idx[0] if idx else 0), 1
    b = 0
    for i, j in zip(idx, idx[1:]):
        b = gmpy2.gcd(b, j - i)
    b = int(b)
    if b == 0:
        b = 1
    return idx[-1] % b, b


def exact_moments(eq, n_list, moment_point="u1"):
    """Exact (n, E[X_n], Var[X_n]) triples from one jet solve.

    moment_point selects the section carrying the distribution: "u1"
    evaluates the solved grid at u=1 (the generic probability
    generating function), "u0" reads the u=0 column, which is the right
    section for entries stated in a shifted catalytic variable.
    Entries of n_list outside the support class are skipped.
    """
    n_list = sorted(set(int(n) for n in n_list))
    sol = solve_series(eq, n_list[-1] + 1, ring="jet")
    if moment_point == "u0":
        section = sol.m0.coeffs
    elif moment_point == "u1":
        from .engine import eval_u1
        section = eval_u1(sol).coeffs
    else:
        raise NotApplicableError("moment_point must be 'u0' or 'u1'",
                                 moment_point=moment_point)
    values = [j.value() for j in section]
    a, b = _support_residues(values)
    out = []
    for n in n_list:
        if n >= len(section) or values[n] == 0:
            continue
        jet = section[n]
        total = values[n]
        mean = jet.d1() / total
        second = jet.d2() / total
        out.append((n, mean, second + mean - mean * mean))
    return out, (a, b)


def clt(eq, n_list=None, bits=DEFAULT_BITS, expect_z0=None,
        moment_point="u1"):
    """Full limit-law report for the x-marked parameter.

    Requires the nonlinear singular-system machinery, so linear
    equations are rejected.  sigma^2 below 1e-8 marks the degenerate
    case (a deterministic parameter) and clears clt_applicable.
    """
    sys = derive_system(eq)
    cp = critical_point(sys, bits, expect_z0=expect_z0)
    rho1, d1, d2, err = _rho_derivatives(sys, cp, bits)
    with precision(bits):
        mu = -d1 / rho1
        sigma2 = mu + mu * mu - d2 / rho1
        applicable = abs(sigma2) > mpfr("1e-8")
        if not applicable:
            warnings.warn("sigma^2 vanishes; the parameter does not "
                          "satisfy a central limit theorem")
    if n_list is None:
        n_list = range(1, 31)
    empirical, periodicity = exact_moments(eq, n_list, moment_point)
    return CltReport(rho1, d1, d2, mu, sigma2, applicable, empirical,
                     periodicity, err, _SECTION_NOTE)
