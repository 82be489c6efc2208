"""Kernel method and square-root singularity analysis for linear equations.

Given the split M = Q0 + z*Q1*M + z*Q2*D, the catalytic unknown is
eliminated by the root u(z) of the kernel K(z,u) = u - z*Q2 - z*u*Q1,
which yields M(z,0) = Q0(z,u(z)) / (1 - z*Q1(z,u(z))).  Three degenerate
shapes collapse to explicit rational functions; the generic shape has a
square-root singularity and n^{-3/2} coefficient asymptotics.
"""

import math
import warnings
from functools import reduce

import gmpy2
from gmpy2 import mpfr, mpq

from .errors import (AnalysisError, FitUnstableError, NoConvergenceError,
                     NotApplicableError)
from .model import (LINEAR_DEGENERATE_1, LINEAR_DEGENERATE_2,
                    LINEAR_DEGENERATE_3, CatalyticEquation)
from .numeric import (DEFAULT_BITS, least_squares, newton_tol, precision,
                      richardson_sequence, solve_dense)
from .poly import MultiPoly
from .series import UniSeries, series_div


class KernelSolution:
    """u(z) plus the M(z,0) series it induces.

    rational_form is a (numerator, denominator) pair of z-polynomials,
    present only for the three degenerate classes.
    """

    def __init__(self, u_series, m0_formula, degenerate_class, rational_form=None):
        self.u_series = u_series
        self.m0_formula = m0_formula
        self.degenerate_class = degenerate_class
        self.rational_form = rational_form

    def __repr__(self):
        tag = self.degenerate_class or "generic"
        return f"KernelSolution({tag}, order={self.m0_formula.order})"


class LinearSingularData:
    """Singularity location, Puiseux data and per-class growth constants."""

    def __init__(self, z0, u0, puiseux, b, residues, constants,
                 collocation_residual=None, b1_transfer_gap=None):
        self.z0 = z0
        self.u0 = u0
        self.puiseux = puiseux
        self.b = b
        self.residues = residues
        self.constants = constants
        self.collocation_residual = collocation_residual
        self.b1_transfer_gap = b1_transfer_gap

    def __repr__(self):
        return (f"LinearSingularData(z0={str(self.z0)[:12]}, b={self.b}, "
                f"residues={sorted(self.residues)})")


# ---------------------------------------------------------------------------
# series-side kernel solution


def degenerate_class(dec):
    """LINEAR_DEGENERATE_* label for the rational shapes, None if generic.

    Same first-match order as the classifier: Q0,Q1 free of u; then Q1
    free of u with Q2 at most linear in u; then Q2 divisible by u.
    """
    q0_u = dec.q0.has_var("u")
    q1_u = dec.q1.has_var("u")
    if not q0_u and not q1_u:
        return LINEAR_DEGENERATE_1
    if not q1_u and dec.q2.degree("u") <= 1:
        return LINEAR_DEGENERATE_2
    if dec.q2.coefficient_in("u", 0).is_zero():
        return LINEAR_DEGENERATE_3
    return None


def _zu_terms(p):
    """Flatten a coefficient polynomial to (coeff, z_exp, u_exp) triples.

    M and D must not occur; a marking variable is folded at x = 1 since
    the kernel machinery analyses the unmarked count.
    """
    out = []
    for (ea0, ea1, ez, eu, ex), c in p.terms.items():
        if ea0 or ea1:
            raise AnalysisError("coefficient polynomial mentions M or D")
        out.append((c, ez, eu))
    return out


def _lift_terms(terms, lift):
    return [(lift(c), d, a) for c, d, a in terms]


def _kernel_series(dec, n, lift=None):
    """Coefficient lists (u, m0) of the kernel solution through z^n.

    u solves u = z*Q2(z,u) + z*u*Q1(z,u) grade by grade; every monomial
    on the right carries a z, so grade m only reads grades below m.  m0
    is then Q0(z,u)/(1 - z*Q1(z,u)) by composition and division.  lift
    maps exact rationals into the working coefficient domain (identity
    for exact work, mpfr for the long float pipeline).
    """
    if lift is None:
        lift = lambda c: c
    z = MultiPoly.var("z")
    u = MultiPoly.var("u")
    qhat = z * (dec.q2 + u * dec.q1)
    qhat_t = _lift_terms(_zu_terms(qhat), lift)
    q0_t = _lift_terms(_zu_terms(dec.q0), lift)
    den_t = _lift_terms(_zu_terms(z * dec.q1), lift)
    max_a = max([a for _, _, a in qhat_t + q0_t + den_t], default=0)

    one = lift(mpq(1))
    zero = one * 0
    pows = [[one] + [zero] * n]
    for _ in range(max_a):
        pows.append([zero] * (n + 1))
    ucoef = [zero] * (n + 1)
    for m in range(1, n + 1):
        s = zero
        for c, d, a in qhat_t:
            if d <= m:
                s = s + c * pows[a][m - d]
        ucoef[m] = s
        if max_a >= 1:
            pows[1][m] = s
        for a in range(2, max_a + 1):
            acc = zero
            # u has valuation 1, so u^a starts at z^a
            for i in range(1, m - a + 2):
                acc = acc + ucoef[i] * pows[a - 1][m - i]
            pows[a][m] = acc

    num = [zero] * (n + 1)
    den = [zero] * (n + 1)
    den[0] = one
    for c, d, a in q0_t:
        for m in range(d, n + 1):
            num[m] = num[m] + c * pows[a][m - d]
    for c, d, a in den_t:
        for m in range(d, n + 1):
            den[m] = den[m] - c * pows[a][m - d]
    m0 = [zero] * (n + 1)
    # den[0] is exactly 1, so forward substitution needs no division
    for m in range(n + 1):
        s = num[m]
        for j in range(1, m + 1):
            s = s - den[j] * m0[m - j]
        m0[m] = s
    return ucoef, m0


def _z_coeffs(p, n):
    """Dense coefficient list of a z-only polynomial, padded through z^n."""
    if p.has_var("u") or p.has_var("a0") or p.has_var("a1"):
        raise AnalysisError("expected a polynomial in z alone")
    out = [mpq(0)] * (n + 1)
    for (_, _, ez, _, _), c in p.terms.items():
        if ez <= n:
            out[ez] = out[ez] + c
    return out


def rational_series(num, den, n):
    """Expand num/den (z-only polynomials) as a UniSeries through z^n."""
    return series_div(UniSeries(_z_coeffs(num, n)), UniSeries(_z_coeffs(den, n)))


def _rational_form(dec, cls):
    """Explicit (numerator, denominator) for the degenerate classes.

    Class 1: u never enters, m0 = Q0/(1-z*Q1).  Class 2: Q2 = T0 + u*T1
    makes the kernel equation linear in u, so u = z*T0/(1-z*Q1-z*T1) and
    substituting into Q0 clears denominators.  Class 3: u(z) = 0.
    """
    one = MultiPoly.const(1)
    z = MultiPoly.var("z")
    if cls == LINEAR_DEGENERATE_1:
        return dec.q0, one - z * dec.q1
    if cls == LINEAR_DEGENERATE_2:
        t0 = dec.q2.coefficient_in("u", 0)
        t1 = dec.q2.coefficient_in("u", 1)
        a = z * t0
        b = one - z * dec.q1 - z * t1
        d = dec.q0.degree("u")
        num = MultiPoly.zero()
        for k in range(d + 1):
            num = num + dec.q0.coefficient_in("u", k) * a ** k * b ** (d - k)
        return num, b ** d * (one - z * dec.q1)
    if cls == LINEAR_DEGENERATE_3:
        num = dec.q0.coefficient_in("u", 0)
        return num, one - z * dec.q1.coefficient_in("u", 0)
    raise NotApplicableError("no rational closed form outside the degenerate classes")


def kernel_solve(dec, n):
    """Solve the kernel equation and assemble M(z,0) through z^n."""
    cls = degenerate_class(dec)
    ucoef, m0 = _kernel_series(dec, n)
    rat = _rational_form(dec, cls) if cls else None
    return KernelSolution(UniSeries(ucoef), UniSeries(m0), cls, rat)


def _rebuild_equation(dec):
    """The catalytic equation a LinearDecomposition came from."""
    z = MultiPoly.var("z")
    rhs = dec.q0 + z * dec.q1 * MultiPoly.var("a0") + z * dec.q2 * MultiPoly.var("a1")
    return CatalyticEquation(rhs)


def kernel_identity_check(dec, sol, n):
    """True when K(z, u(z)) vanishes and the m0 formula matches the engine.

    Both checks run through z^n.  A failure warns with the first bad
    index and returns False.
    """
    from .engine import solve_series

    uc = list(sol.u_series.coeffs[:n + 1])
    zero = mpq(0)
    while len(uc) < n + 1:
        uc.append(zero)
    z = MultiPoly.var("z")
    u = MultiPoly.var("u")
    qhat_t = _zu_terms(z * (dec.q2 + u * dec.q1))
    max_a = max([a for _, _, a in qhat_t], default=0)
    pows = [[mpq(1)] + [zero] * n]
    for a in range(1, max_a + 1):
        if a == 1:
            pows.append(uc)
        else:
            prev = pows[a - 1]
            pows.append([sum((uc[i] * prev[m - i] for i in range(m + 1)), zero)
                        for m in range(n + 1)])
    for m in range(n + 1):
        r = uc[m]
        for c, d, a in qhat_t:
            if d <= m:
                r = r - c * pows[a][m - d]
        if r != 0:
            warnings.warn(f"kernel identity fails at index {m}")
            return False
    engine_m0 = solve_series(_rebuild_equation(dec), n + 1).m0
    for m in range(n + 1):
        if sol.m0_formula[m] != engine_m0[m]:
            warnings.warn(f"m0 formula differs from the engine at index {m}")
            return False
    return True


# ---------------------------------------------------------------------------
# critical point


def _support_period(coeffs, lo, hi):
    """gcd of index gaps of the nonzero entries in [lo, hi], with them."""
    idx = [i for i in range(lo, min(hi, len(coeffs) - 1) + 1) if coeffs[i] != 0]
    if len(idx) < 2:
        raise FitUnstableError("coefficient support too thin to read a period",
                               window=(lo, hi), nonzero=len(idx))
    gaps = [b - a for a, b in zip(idx, idx[1:])]
    return reduce(math.gcd, gaps), idx


def _radius_guess(dec, bits):
    """Rough radius of u(z) from coefficient ratios of a short series."""
    uc, m0 = _kernel_series(dec, 48)
    coeffs = uc if any(c != 0 for c in uc[1:]) else m0
    b, idx = _support_period(coeffs, 8, 48)
    tail = [i for i in idx if coeffs[i] != 0][-2:]
    n0, n1 = tail
    ratio = mpfr(coeffs[n0]) / mpfr(coeffs[n1])
    return ratio ** (mpfr(1) / (n1 - n0)), coeffs


def _eval(p, z, u):
    return p.eval_point({"z": z, "u": u, "x": mpfr(1)})


def linear_critical_point(dec, bits=DEFAULT_BITS):
    """Radius and kernel-root value where the square-root singularity sits.

    Solves u0 = z0*Q2 + z0*u0*Q1 together with the collision condition
    d(z*Q2 + z*u*Q1)/du = 1.  A continuation along the real axis seeds
    Newton: march z upward, tracking the kernel root from the series,
    until the derivative approaches 1.  Returns (z0, u0) as mpfr.
    """
    if degenerate_class(dec) is not None:
        raise NotApplicableError("degenerate linear classes have polar "
                                 "singularities, not a square-root point")
    z = MultiPoly.var("z")
    u = MultiPoly.var("u")
    h = z * (dec.q2 + u * dec.q1)
    hu = h.partial("u")
    hz = h.partial("z")
    huu = hu.partial("u")
    huz = hu.partial("z")

    with precision(bits):
        r_est, ucoef = _radius_guess(dec, bits)
        zc = mpfr("0.5") * r_est
        uval = mpfr(0)
        seed = None
        for _ in range(400):
            # evaluate the truncated series, then polish the root at fixed z
            ev = sum(mpfr(c) * zc ** i for i, c in enumerate(ucoef))
            ok = True
            for _ in range(80):
                phi = ev - _eval(h, zc, ev)
                dphi = 1 - _eval(hu, zc, ev)
                if dphi <= 0:
                    ok = False
                    break
                step = phi / dphi
                ev = ev - step
                if abs(step) <= newton_tol(bits) * max(mpfr(1), abs(ev)):
                    break
            if not ok or not gmpy2.is_finite(ev) or ev < 0:
                break
            uval = ev
            seed = (zc, uval)
            if _eval(hu, zc, uval) >= mpfr("0.9"):
                break
            zc = zc * mpfr("1.06")
            if zc > 4 * r_est:
                raise NoConvergenceError(
                    "continuation never reached the collision condition",
                    max_z=str(zc), last_residual=str(1 - _eval(hu, seed[0], uval)))
        if seed is None:
            raise NoConvergenceError("no usable continuation point",
                                     max_z=str(zc), last_residual="n/a")

        zc, uval = seed
        tol = newton_tol(bits)
        last = None
        for _ in range(80):
            g1 = uval - _eval(h, zc, uval)
            g2 = 1 - _eval(hu, zc, uval)
            last = max(abs(g1), abs(g2))
            if last <= tol * max(mpfr(1), abs(zc), abs(uval)):
                return zc, uval
            jac = [[-_eval(hz, zc, uval), 1 - _eval(hu, zc, uval)],
                   [-_eval(huz, zc, uval), -_eval(huu, zc, uval)]]
            dz, du = solve_dense(jac, [-g1, -g2])
            zc = zc + dz
            uval = uval + du
        raise NoConvergenceError("critical Newton stalled",
                                 max_z=str(zc), last_residual=str(last))


# ---------------------------------------------------------------------------
# asymptotics


def m0_float_series(dec, n, bits=DEFAULT_BITS):
    """M(z,0) coefficients through z^n as floats at the given precision.

    Positive convolutions only, so zeros stay exact and the relative
    rounding error stays far below the extrapolation noise floor.
    """
    with precision(bits):
        _, m0 = _kernel_series(dec, n, lift=mpfr)
    return m0


def class_constant(coeffs, j, b, z0, lo, hi, bits=DEFAULT_BITS, points=12,
                   power=mpq(3, 2)):
    """Limit of M_n n^power z0^n along n = j mod b, n in [lo, hi]."""
    with precision(bits):
        members = [i for i in range(lo, hi + 1)
                   if i % b == j and i < len(coeffs) and coeffs[i] != 0]
        if len(members) < 2:
            raise FitUnstableError("residue class has too few usable terms",
                                   residue=j, window=(lo, hi))
        k = min(points, len(members))
        picks = sorted({members[round(t * (len(members) - 1) / (k - 1))]
                        for t in range(k)})
        vals = [mpfr(coeffs[i]) * mpfr(i) ** mpfr(power) * z0 ** i
                for i in picks]
        return richardson_sequence(picks, vals)


def empirical_radius(coeffs, b, j, lo, hi, bits=DEFAULT_BITS, points=12):
    """Radius estimate from coefficient ratios along one residue class."""
    with precision(bits):
        members = [i for i in range(lo, hi + 1 - b)
                   if i % b == j and coeffs[i] != 0 and coeffs[i + b] != 0]
        if len(members) < 2:
            raise FitUnstableError("residue class has too few usable ratios",
                                   residue=j, window=(lo, hi))
        k = min(points, len(members))
        picks = sorted({members[round(t * (len(members) - 1) / (k - 1))]
                        for t in range(k)})
        vals = [(mpfr(coeffs[i]) / mpfr(coeffs[i + b])) ** (mpfr(1) / b)
                for i in picks]
        return richardson_sequence(picks, vals)


def _collocate(dec, z0, bits, nodes=24, basis=12, t_hi="0.25", shrink="0.72"):
    """Fit M(z0(1-t^2), 0) against powers of t near the singularity.

    Nodes shrink geometrically toward t=0; at each the kernel root is
    polished by Newton seeded from the previous node (largest t first),
    and the closed formula gives the exact point value.  Returns the
    basis coefficients and the worst fit residual.
    """
    z = MultiPoly.var("z")
    u = MultiPoly.var("u")
    h = z * (dec.q2 + u * dec.q1)
    hu = h.partial("u")
    uc, _ = _kernel_series(dec, 64)
    with precision(bits):
        ts = [mpfr(t_hi) * mpfr(shrink) ** i for i in range(nodes)]
        tol = newton_tol(bits)
        rows, rhs = [], []
        useed = None
        for t in ts:
            zj = z0 * (1 - t * t)
            ev = useed if useed is not None else sum(
                mpfr(c) * zj ** i for i, c in enumerate(uc))
            for _ in range(200):
                phi = ev - _eval(h, zj, ev)
                step = phi / (1 - _eval(hu, zj, ev))
                ev = ev - step
                if abs(step) <= tol * max(mpfr(1), abs(ev)):
                    break
            else:
                raise NoConvergenceError("kernel root Newton stalled at a "
                                         "collocation node", t=str(t))
            useed = ev
            m0j = (_eval(dec.q0, zj, ev)
                   / (1 - zj * _eval(dec.q1, zj, ev)))
            rows.append([t ** k for k in range(basis)])
            rhs.append(m0j)
        coefs = least_squares(rows, rhs)
        resid = max(abs(sum(r[k] * coefs[k] for k in range(basis)) - v)
                    for r, v in zip(rows, rhs))
    return coefs, resid


def linear_asymptotics(dec, n_fit, bits=DEFAULT_BITS):
    """Full singular analysis: period, Puiseux data, growth constants.

    The period b is the gcd of index gaps of nonzero coefficients past
    n_fit/2; per nonzero residue class the constant c_j is the Richardson
    limit of M_n n^{3/2} z0^n.  The Puiseux triple (a0, a1, a2) comes
    from collocation in t = sqrt(1 - z/z0).  For b = 1 the transfer
    prediction (-a1)/(2 sqrt(pi)) is compared against c_0 and the gap
    recorded; the extrapolated constant stays authoritative.
    """
    cbits = max(2 * bits, 512)
    z0, u0 = linear_critical_point(dec, bits=cbits)
    m0 = m0_float_series(dec, n_fit, bits=bits)
    b, idx = _support_period(m0, n_fit // 2, n_fit)
    residues = sorted({i % b for i in idx})

    coefs, resid = _collocate(dec, z0, cbits)
    a0, a1, a2 = coefs[0], coefs[1], coefs[2]
    if abs(resid) > mpfr("1e-6") * max(mpfr(1), abs(a0)):
        raise FitUnstableError("collocation residual above tolerance",
                               residual=str(resid))
    if not (a0 > 0 and a1 < 0):
        raise FitUnstableError("fitted Puiseux signs violate the square-root "
                               "singularity shape", a0=str(a0), a1=str(a1))

    with precision(bits):
        z0b = mpfr(z0)
        constants = {j: class_constant(m0, j, b, z0b, n_fit // 2, n_fit, bits=bits)
                     for j in residues}
        gap = None
        if b == 1:
            target = (-a1) / (2 * gmpy2.sqrt(gmpy2.const_pi()))
            gap = abs(constants[0] - target) / abs(target)
            if gap > mpfr("0.005"):
                warnings.warn(f"transfer cross-check off by {str(gap)[:10]}")
    return LinearSingularData(z0, u0, (a0, a1, a2), b, residues, constants,
                              collocation_residual=resid, b1_transfer_gap=gap)
