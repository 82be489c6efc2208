"""Three-function singular system for nonlinear catalytic equations.

The catalytic variable is eliminated by coupling three univariate
unknowns: f(z) = M(z, u(z)), the binding point u(z), and the divided
difference w(z) at the binding point.  They solve the fixed-point system

    f = R(f, w, z, u)
    u = u * R_f + R_w          (R_f, R_w: partials in the M and D slots)
    w = R_u + w * R_f

whose solution recovers M(z,0) = f - w*u.  The dominant singularity is
where the Jacobian of the system reaches spectral radius 1, giving a
(1-z/z0)^{3/2} expansion and n^{-5/2} coefficient asymptotics.
"""

import warnings

import gmpy2
from gmpy2 import mpfr, mpq

from .errors import (AnalysisError, FitUnstableError, NegativeCoordinateError,
                     NoConvergenceError, NonWellFoundedError, NotApplicableError,
                     Y1NonzeroError)
from .linear import _support_period, class_constant, empirical_radius
from .model import (NONLINEAR_DEGENERATE, build_symbolic_system, classify,
                    dependency_digraph)
from .numeric import (DEFAULT_BITS, newton_tol, power_iteration, precision,
                      richardson_sequence, solve_dense)
from .poly import MultiPoly
from .series import UniSeries

_NAMES = ("f", "w", "u")
_SLOT = {"f": "a0", "w": "a1", "u": "u"}


class NonlinearSystem:
    """Symbolic right-hand sides plus the data needed to iterate them."""

    def __init__(self, eq, rhs, initial, grade_order, j0, classification,
                 strongly_connected, edges):
        self.eq = eq
        self.rhs = rhs
        self.initial = initial
        self.grade_order = grade_order
        self.j0 = j0
        self.classification = classification
        self.strongly_connected = strongly_connected
        self.edges = edges
        self._critical = None

    def __repr__(self):
        return (f"NonlinearSystem({self.classification.label}, "
                f"order={self.grade_order}, strong={self.strongly_connected})")


class CriticalPoint:
    """Solution of the extended system with its certificates."""

    def __init__(self, z0, f0, u0, w0, jacobian, det_residual, perron_root,
                 mode, strongly_connected):
        self.z0 = z0
        self.f0 = f0
        self.u0 = u0
        self.w0 = w0
        self.jacobian = jacobian
        self.det_residual = det_residual
        self.perron_root = perron_root
        self.mode = mode
        self.strongly_connected = strongly_connected

    def __repr__(self):
        return f"CriticalPoint(z0={str(self.z0)[:12]}, mode={self.mode})"


class PuiseuxExpansion:
    """Local data of y = f - w*u at z0 plus the component expansions."""

    def __init__(self, a0, a2, a3, a4, y1_residual, components, fit_residual):
        self.a0 = a0
        self.a2 = a2
        self.a3 = a3
        self.a4 = a4
        self.y1_residual = y1_residual
        self.components = components
        self.fit_residual = fit_residual

    def __repr__(self):
        return (f"PuiseuxExpansion(a0={str(self.a0)[:10]}, "
                f"a3={str(self.a3)[:10]})")


class AsymptoticForm:
    """Coefficient growth c_j n^{-5/2} z0^{-n} per residue class."""

    def __init__(self, z0, gamma, exponent, singular_exponent, b, residues,
                 constants, transfer_gap):
        self.z0 = z0
        self.gamma = gamma
        self.exponent = exponent
        self.singular_exponent = singular_exponent
        self.b = b
        self.residues = residues
        self.constants = constants
        self.transfer_gap = transfer_gap

    def __repr__(self):
        return (f"AsymptoticForm(b={self.b}, exponent={self.exponent}, "
                f"classes={self.residues})")


# ---------------------------------------------------------------------------
# system derivation and series iteration


def derive_system(eq):
    """Build the three-function system with initial values and grade order.

    Initial values come from a two-term engine solve: f(0) and w(0) are
    the (z^0 u^0) and (z^0 u^1) entries of the grid.  The within-grade
    dependency order is read off the Jacobian at the origin; a cycle
    there means some coefficient needs itself and the recursion is
    rejected.
    """
    from .engine import solve_series

    if eq.linear:
        raise NotApplicableError("the three-function system is for nonlinear "
                                 "equations; use the kernel method instead")
    rhs = build_symbolic_system(eq)
    tiny = solve_series(eq, 2)
    initial = {"f": tiny.m.coeff(0, 0), "w": tiny.m.coeff(0, 1), "u": mpq(0)}
    origin = {"a0": initial["f"], "a1": initial["w"],
              "u": mpq(0), "z": mpq(0), "x": mpq(1)}
    j0 = {x: {y: rhs[x].partial(_SLOT[y]).eval_point(origin) for y in _NAMES}
          for x in _NAMES}
    grade_order = _topo_order(j0)
    edges, strong = dependency_digraph(eq)
    return NonlinearSystem(eq, rhs, initial, grade_order, j0, classify(eq),
                           strong, edges)


def _topo_order(j0):
    """Kahn order of {f,w,u} under within-grade dependencies, or reject."""
    deps = {x: {y for y in _NAMES if j0[x][y] != 0} for x in _NAMES}
    for x in _NAMES:
        if x in deps[x]:
            raise NonWellFoundedError(
                "a system coefficient depends on itself at fixed grade",
                unknown=x)
    order = []
    pending = dict(deps)
    while pending:
        ready = [x for x, d in pending.items() if not (d & pending.keys())]
        if not ready:
            raise NonWellFoundedError(
                "within-grade dependency cycle in the system",
                cycle=sorted(pending))
        for x in sorted(ready):
            order.append(x)
            del pending[x]
    return tuple(order)


def _terms_of(poly):
    """(coeff, p, q, d, a) tuples with the marking variable folded at 1."""
    return [(c, ea0, ea1, ez, eu)
            for (ea0, ea1, ez, eu, ex), c in poly.terms.items()]


def _chain_plan(keys):
    """Product-cache keys closed under one-step parents, parents first."""
    need = set(keys)
    for k in list(need):
        p, q, a = k
        while (p, q, a) != (0, 0, 0):
            if p:
                p -= 1
                base = "f"
            elif q:
                q -= 1
                base = "w"
            else:
                a -= 1
                base = "u"
            need.add((p, q, a))
    order = sorted(need, key=lambda k: (sum(k), k))
    parent = {}
    for k in order:
        p, q, a = k
        if p:
            parent[k] = ((p - 1, q, a), "f")
        elif q:
            parent[k] = ((p, q - 1, a), "w")
        elif a:
            parent[k] = ((p, q, a - 1), "u")
    return order, parent


def _run_series(sys, n, lift):
    """Coefficient lists (f, w, u) through z^n in the lifted domain.

    Per grade: extend every product cache with the current grade zeroed,
    read off the constant part of each right-hand side, then resolve the
    unknowns in within-grade order via the origin Jacobian (the grade-n
    part of each equation is linear in the grade-n unknowns).  Caches
    are re-extended with the final values afterwards.
    """
    terms = {x: [(lift(c), p, q, d, a)
                 for c, p, q, d, a in _terms_of(sys.rhs[x])] for x in _NAMES}
    keys = {(p, q, a) for tl in terms.values() for _, p, q, d, a in tl}
    order, parent = _chain_plan(keys)
    one = lift(mpq(1))
    zero = one * 0
    j0 = {x: {y: lift(sys.j0[x][y]) for y in _NAMES} for x in _NAMES}

    series = {x: [zero] * (n + 1) for x in _NAMES}
    for x in _NAMES:
        series[x][0] = lift(sys.initial[x])
    chains = {(0, 0, 0): [one] + [zero] * n}
    for k in order:
        if k != (0, 0, 0):
            pk, base = parent[k]
            v0 = chains[pk][0] * series[base][0]
            chains[k] = [v0] + [zero] * n

    def extend(m):
        for k in order:
            if k == (0, 0, 0):
                continue
            pk, base = parent[k]
            pl, bl = chains[pk], series[base]
            s = zero
            for i in range(m + 1):
                s = s + pl[m - i] * bl[i]
            chains[k][m] = s

    for m in range(1, n + 1):
        extend(m)
        const = {}
        for x in _NAMES:
            s = zero
            for c, p, q, d, a in terms[x]:
                if d <= m:
                    s = s + c * chains[(p, q, a)][m - d]
            const[x] = s
        for x in sys.grade_order:
            v = const[x]
            for y in _NAMES:
                if j0[x][y] != 0:
                    v = v + j0[x][y] * series[y][m]
            series[x][m] = v
        extend(m)
    return series["f"], series["w"], series["u"]


def system_m0(f, w, u):
    """M(z,0) = f - w*u from coefficient lists (or UniSeries)."""
    fc = f.coeffs if isinstance(f, UniSeries) else f
    wc = w.coeffs if isinstance(w, UniSeries) else w
    uc = u.coeffs if isinstance(u, UniSeries) else u
    n = min(len(fc), len(wc), len(uc)) - 1
    out = []
    for m in range(n + 1):
        s = fc[m]
        for i in range(m + 1):
            s = s - wc[i] * uc[m - i]
        out.append(s)
    return out


def system_series(sys, n):
    """Exact (f, w, u) through z^n, checked against the engine.

    The identity f - w*u == M(z,0) is verified coefficient by
    coefficient; the first discrepancy aborts the run.
    """
    from .engine import solve_series

    f, w, u = _run_series(sys, n, lambda c: c)
    m0 = system_m0(f, w, u)
    engine_m0 = solve_series(sys.eq, n + 1).m0
    for m in range(n + 1):
        if m0[m] != engine_m0[m]:
            raise AnalysisError("system series identity f - w*u = M(z,0) "
                                "fails", first_differing_index=m)
    return UniSeries(f), UniSeries(w), UniSeries(u)


def _float_series(sys, n, bits):
    with precision(bits):
        f, w, u = _run_series(sys, n, lambda c: mpfr(c))
        m0 = system_m0(f, w, u)
    return f, w, u, m0


# ---------------------------------------------------------------------------
# extended critical system


def _critical_polys(sys):
    """Symbolic fixed-point residuals, det(I-J), and all their partials."""
    if sys._critical is not None:
        return sys._critical
    var = {"f": MultiPoly.var("a0"), "w": MultiPoly.var("a1"),
           "u": MultiPoly.var("u")}
    g = [var[x] - sys.rhs[x] for x in _NAMES]
    jac3 = [[sys.rhs[x].partial(_SLOT[y]) for y in _NAMES] for x in _NAMES]
    ident = [[MultiPoly.const(1 if i == j else 0) for j in range(3)]
             for i in range(3)]
    m = [[ident[i][j] - jac3[i][j] for j in range(3)] for i in range(3)]
    det = (m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
           - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
           + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]))
    g.append(det)
    unknowns = ("a0", "a1", "u", "z")
    grad = [[gi.partial(v) for v in unknowns] for gi in g]
    sys._critical = (g, grad, jac3)
    return sys._critical


def _point_dict(f, w, u, z, x):
    return {"a0": f, "a1": w, "u": u, "z": z, "x": x}


def jacobian_at(sys, f, w, u, z, x=None):
    """The 3x3 system Jacobian evaluated at a numeric point."""
    _, _, jac3 = _critical_polys(sys)
    pt = _point_dict(f, w, u, z, mpfr(1) if x is None else x)
    return [[e.eval_point(pt) for e in row] for row in jac3]


def _perron(jmat, bits):
    """Perron root of a nonnegative 3x3 matrix via a primitivity shift.

    Power iteration runs on (J+I)/2, whose positive diagonal kills
    periodicity; the root maps back as 2*mu - 1.
    """
    half = mpfr(1) / 2
    shifted = [[(jmat[i][j] + (1 if i == j else 0)) * half for j in range(3)]
               for i in range(3)]
    lam, _, resid = power_iteration(shifted, newton_tol(bits), max_iter=2000)
    return 2 * lam - 1, resid


def _newton3(sys, z, seed, bits, x=None):
    """Solve the three fixed-point equations at fixed z.  None on failure."""
    g, _, jac3 = _critical_polys(sys)
    xv = mpfr(1) if x is None else x
    f, w, u = seed
    tol = newton_tol(bits)
    last = None
    for _ in range(80):
        pt = _point_dict(f, w, u, z, xv)
        res = [gi.eval_point(pt) for gi in g[:3]]
        size = max(abs(r) for r in res)
        if not gmpy2.is_finite(size):
            return None
        if size <= tol * max(mpfr(1), abs(f), abs(w), abs(u)):
            return f, w, u
        if last is not None and size > 4 * last:
            return None
        last = size
        jm = [[(1 if i == j else 0) - jac3[i][j].eval_point(pt)
               for j in range(3)] for i in range(3)]
        try:
            df, dw, du = solve_dense(jm, [-r for r in res])
        except AnalysisError:
            return None
        f, w, u = f + df, w + dw, u + du
    return None


def newton_critical(sys, seed, bits, x=None):
    """Newton on the four-equation extended system from a (f,w,u,z) seed."""
    g, grad, _ = _critical_polys(sys)
    xv = mpfr(1) if x is None else x
    f, w, u, z = seed
    tol = newton_tol(bits)
    last = None
    for _ in range(120):
        pt = _point_dict(f, w, u, z, xv)
        res = [gi.eval_point(pt) for gi in g]
        last = max(abs(r) for r in res)
        if not gmpy2.is_finite(last):
            break
        if last <= tol * max(mpfr(1), abs(f), abs(w), abs(u), abs(z)):
            return (f, w, u, z), last
        jm = [[e.eval_point(pt) for e in row] for row in grad]
        df, dw, du, dz = solve_dense(jm, [-r for r in res])
        f, w, u, z = f + df, w + dw, u + du, z + dz
    raise NoConvergenceError("extended critical system Newton stalled",
                             last_residual=str(last), z=str(z))


def _series_eval(coeffs, z):
    s = coeffs[-1] * 0
    for c in reversed(coeffs):
        s = s * z + c
    return s


def _continuation(sys, bits, z_cap, use_perron):
    """March z upward tracking the system solution from the series.

    Stops when the Perron root reaches 0.95 (positive case) or at the
    cap fraction of the estimated radius.  Returns the last point as
    (f, w, u, z).
    """
    fser, wser, user, m0f = _float_series(sys, 96, bits)
    with precision(bits):
        b, idx = _support_period(m0f, 48, 96)
        r_est = empirical_radius(m0f, b, idx[-1] % b, 32, 96)
        cap = z_cap if z_cap is not None else r_est
        z = mpfr("0.5") * cap
        point = None
        good = None
        step = mpfr("1.05")
        for _ in range(240):
            seed = point if point is not None else (
                _series_eval(fser, z), _series_eval(wser, z),
                _series_eval(user, z))
            got = _newton3(sys, z, seed, bits)
            if got is None:
                if good is None:
                    raise NoConvergenceError(
                        "system continuation failed before any solve",
                        z=str(z))
                z = (good[3] + z) / 2
                if abs(z - good[3]) < mpfr("1e-6") * cap:
                    break
                continue
            point = got
            good = (got[0], got[1], got[2], z)
            if use_perron:
                jm = jacobian_at(sys, *good)
                lam, _ = _perron(jm, 64)
                if lam >= mpfr("0.95"):
                    break
            elif z >= mpfr("0.95") * cap:
                break
            z = z * step
        if good is None:
            raise NoConvergenceError("system continuation produced no point")
        return good


def critical_point(sys, bits=DEFAULT_BITS, expect_z0=None):
    """Solve the extended system and certify the singularity location.

    Positive equations: continuation tracks the Perron root of the
    system Jacobian until it nears 1, Newton finishes on the extended
    system, and the certificates (det(I-J) residual, Perron root 1,
    positive coordinates) are attached.  Non-positive equations skip the
    Perron certificate; the branch comes from an expect_z0 hint or from
    plain continuation with a warning.
    """
    if sys.classification.label == NONLINEAR_DEGENERATE:
        raise NotApplicableError(
            "equation reduces to a one-variable problem; the three-function "
            "singular system does not apply",
            reduction=sys.classification.detail)
    if not sys.strongly_connected:
        warnings.warn("dependency digraph is not strongly connected; "
                      "square-root behavior is not guaranteed")
    positive = sys.eq.positive
    with precision(bits):
        if positive:
            seed = _continuation(sys, bits, None, use_perron=True)
        else:
            warnings.warn("negative coefficients: positivity and Perron "
                          "certificates are skipped")
            cap = None
            if expect_z0 is not None:
                cap = mpfr(expect_z0)
            else:
                warnings.warn("branch selected by continuation alone; "
                              "confirm with an expected-z0 hint")
            seed = _continuation(sys, bits, cap, use_perron=False)
        (f, w, u, z), resid = newton_critical(sys, seed, bits)
        if positive and min(f, w, u, z) < 0:
            raise NegativeCoordinateError(
                "critical coordinates left the positive cone",
                f=str(f), w=str(w), u=str(u), z=str(z))
        g, _, _ = _critical_polys(sys)
        det_resid = abs(g[3].eval_point(_point_dict(f, w, u, z, mpfr(1))))
        jm = jacobian_at(sys, f, w, u, z)
        perron = None
        if positive:
            lam, lam_resid = _perron(jm, bits)
            perron = lam
    return CriticalPoint(z, f, u, w, jm, det_resid, perron,
                         "positive" if positive else "generic",
                         sys.strongly_connected)


# ---------------------------------------------------------------------------
# Puiseux expansion at the critical point


def puiseux_expansion(sys, cp, nodes=None, bits=512):
    """Collocation fit of y = f - w*u in t = sqrt(1 - z/z0).

    Solves the three-function system at z = z0(1-t^2) for shrinking t
    (each Newton seeded from the previous node), fits y and each
    component against powers of t, and enforces that the coefficient of
    t vanishes: a square-root term below the 3/2 exponent would break
    the expansion shape.
    """
    fser, wser, user, _ = _float_series(sys, 96, min(bits, 256))
    basis = 16
    with precision(bits):
        if nodes is None:
            ts = [mpfr("0.2") * mpfr("0.78") ** i for i in range(32)]
        else:
            ts = [mpfr(t) for t in nodes]
            basis = min(basis, len(ts) // 2)
        z0 = mpfr(cp.z0)
        rows, ys, comps = [], [], {"f": [], "w": [], "u": []}
        point = None
        for t in ts:
            zj = z0 * (1 - t * t)
            seed = point if point is not None else (
                _series_eval([mpfr(c) for c in fser], zj),
                _series_eval([mpfr(c) for c in wser], zj),
                _series_eval([mpfr(c) for c in user], zj))
            got = _newton3(sys, zj, seed, bits)
            if got is None:
                raise NoConvergenceError("collocation node solve failed",
                                         t=str(t))
            point = got
            f, w, u = got
            rows.append([t ** k for k in range(basis)])
            ys.append(f - w * u)
            comps["f"].append(f)
            comps["w"].append(w)
            comps["u"].append(u)
        from .numeric import least_squares
        coef = least_squares(rows, ys)
        fit_resid = max(abs(sum(r[k] * coef[k] for k in range(basis)) - v)
                        for r, v in zip(rows, ys))
        a0, y1, a2, a3 = coef[0], coef[1], coef[2], coef[3]
        a4 = coef[4] if basis > 4 else mpfr(0)
        y1_res = abs(y1)
        components = {}
        for name in _NAMES:
            cc = least_squares(rows, comps[name])
            components[name] = tuple(cc[:4])
        if fit_resid > mpfr("1e-6") * max(mpfr(1), abs(a0)):
            raise FitUnstableError("collocation residual above tolerance",
                                   residual=str(fit_resid))
        if y1_res > mpfr("1e-6") * abs(a3):
            raise Y1NonzeroError(
                "half-power term below the 3/2 exponent did not vanish",
                y1=str(y1), a3=str(a3))
        hyp = sys.eq.hypotheses
        if hyp.get("f0_prime_at_0_zero") and hyp.get("q_a1_at_origin_nonzero"):
            if not a3 > 0:
                raise FitUnstableError("leading singular coefficient should "
                                       "be positive here", a3=str(a3))
        if cp.mode == "positive" and sys.strongly_connected:
            if not (components["f"][1] < 0 and components["u"][1] < 0
                    and components["w"][1] < 0):
                raise FitUnstableError(
                    "component square-root terms must be negative",
                    f1=str(components["f"][1]), u1=str(components["u"][1]),
                    w1=str(components["w"][1]))
    return PuiseuxExpansion(a0, a2, a3, a4, y1_res, components, fit_resid)


# ---------------------------------------------------------------------------
# coefficient asymptotics


def nonlinear_asymptotics(eq, cp, pe, n_fit, bits=DEFAULT_BITS):
    """Growth constants c_j with the n^{-5/2} scale and the a3 cross-check."""
    sys = derive_system(eq)
    _, _, _, m0 = _float_series(sys, n_fit, bits)
    with precision(bits):
        b, idx = _support_period(m0, n_fit // 2, n_fit)
        residues = sorted({i % b for i in idx})
        if len(residues) > 1:
            warnings.warn("coefficient support spans several residue classes")
        z0 = mpfr(cp.z0)
        constants = {j: class_constant(m0, j, b, z0, n_fit // 2, n_fit,
                                       bits=bits, power=mpq(5, 2))
                     for j in residues}
        gap = None
        if b == 1:
            target = 3 * mpfr(pe.a3) / (4 * gmpy2.sqrt(gmpy2.const_pi()))
            gap = abs(constants[0] - target) / abs(target)
            if gap > mpfr("1e-3"):
                raise FitUnstableError(
                    "extrapolated constant disagrees with the 3a3/(4 sqrt(pi)) "
                    "transfer", gap=str(gap))
        gamma = 1 / z0
    return AsymptoticForm(cp.z0, gamma, mpq(-5, 2), mpq(3, 2), b, residues,
                          constants, gap)
