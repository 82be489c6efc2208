"""Exact graded solver for catalytic equations.

Coefficients are computed in graded order: z-power major, u-power minor.
Monomials of the right-hand side that carry a z factor only ever
reference strictly lower z-grades. Monomials without a z factor (the
GENERALIZED shape) may reference the current grade; their influence on
the current row is split into a part computable from earlier grades
plus a linear cofactor pair (A0, B0) read off the grade-0 rows. The
recursion is well founded exactly when the cofactors make every
coefficient depend only on strictly earlier ones; anything else raises
NON_WELL_FOUNDED.

Coefficient rings: "rat" (plain rationals, x folded at 1), "xpoly"
(polynomials in the marking variable), "jet" (second-order jets at x=1).
"""

from .errors import AnalysisError, NonWellFoundedError, TruncationUnstableError
from .rings import lift_rat, ring_x, xpoly_conv_rows
from .series import BiSeries, UniSeries, divided_difference, series_mul

_GRADE0_EXTRA = 8


class SolutionSeries:
    """Solved grid with the equation that produced it.

    m is the bivariate solution, m0 its u-constant column. residual_ok
    records that an independent re-evaluation of the right-hand side
    reproduced the grid on the trustworthy window.
    """

    def __init__(self, eq, m, m0, residual_ok, ring):
        self.eq = eq
        self.m = m
        self.m0 = m0
        self.residual_ok = residual_ok
        self.ring = ring
        self.orders = (m.order_z, m.order_u)

    def __repr__(self):
        return (f"SolutionSeries(orders={self.orders}, ring={self.ring!r}, "
                f"residual_ok={self.residual_ok})")


def _terms_of(eq, ring):
    """Flatten the right-hand side into (coeff, p, q, d, a) tuples.

    p, q, d, a are the exponents of M, D, z, u; the marking variable is
    folded into the ring coefficient.
    """
    xval = ring_x(ring)
    out = []
    for (p, q, d, a, b), c in eq.rhs.sorted_terms():
        cx = lift_rat(ring, c)
        for _ in range(b):
            cx = cx * xval
        out.append((cx, p, q, d, a))
    return out


def _conv(a, b, n, zero):
    out = [zero] * n
    for i, ai in enumerate(a):
        if i >= n or ai == 0:
            continue
        for j, bj in enumerate(b):
            if i + j >= n:
                break
            if bj == 0:
                continue
            out[i + j] = out[i + j] + ai * bj
    return out


def _product_chain(keys):
    """Closure of (p,q) product keys so each links to a one-step parent."""
    need = set(keys)
    for p, q in list(need):
        while p + q > 1:
            if p >= 1:
                p -= 1
            else:
                q -= 1
            need.add((p, q))
    need.discard((0, 0))
    return sorted(need)


def default_u_order(eq, n_z):
    """A u-order large enough that rows stay exact through n_z.

    Uses the per-grade degree growth implied by the monomials; equations
    whose rows have unbounded u-support get a heuristic linear bound and
    rely on the stability certificate.
    """
    growth = 1
    for (p, q, d, a, _b), _c in eq.rhs.terms.items():
        if p + q == 0:
            continue
        if d >= 1:
            g = -((q - a) // d)  # ceil((a - q) / d)
            growth = max(growth, g)
        else:
            growth = max(growth, a - q + 1)
    return growth * n_z + eq.rhs.degree("u") + 8


def solve_series(eq, n_z, n_u=None, ring="rat"):
    """Unique power-series solution as a dense (n_z, n_u) grid.

    Raises NonWellFoundedError when some coefficient turns out to depend
    on itself (or on a later one) at its own grade.
    """
    if n_u is None:
        n_u = default_u_order(eq, n_z)
    if n_z < 1 or n_u < 1:
        raise AnalysisError(f"orders must be >= 1, got ({n_z}, {n_u})")
    zero = lift_rat(ring, 0)
    one = lift_rat(ring, 1)
    terms = _terms_of(eq, ring)
    zfree = [(cx, p, q, a) for (cx, p, q, d, a) in terms if d == 0]
    zfree_alpha = [t for t in zfree if t[1] + t[2] >= 1]

    m_rows = []
    d_rows = []
    keys = _product_chain({(p, q) for (_c, p, q, _d, _a) in terms if p + q >= 1})
    caches = {k: [] for k in keys}

    def extend_cache(n, overwrite=False):
        for p, q in keys:
            if p + q == 1:
                row = m_rows[n] if p == 1 else d_rows[n]
                row = list(row)
            else:
                parent = caches[(p - 1, q)] if p >= 1 else caches[(p, q - 1)]
                factor = m_rows if p >= 1 else d_rows
                if ring == "xpoly":
                    row = xpoly_conv_rows(
                        ((parent[i], factor[n - i]) for i in range(n + 1)),
                        n_u)
                else:
                    row = [zero] * n_u
                    for i in range(n + 1):
                        pr = parent[i]
                        fr = factor[n - i]
                        for k1, c1 in enumerate(pr):
                            if c1 == 0:
                                continue
                            for k2 in range(n_u - k1):
                                c2 = fr[k2]
                                if c2 == 0:
                                    continue
                                row[k1 + k2] = row[k1 + k2] + c1 * c2
            rows = caches[(p, q)]
            if overwrite:
                rows[n] = row
            else:
                rows.append(row)

    def grade0_row():
        cur = [zero] * n_u
        for _ in range(n_u + _GRADE0_EXTRA):
            new = _eval_zfree(cur)
            if new == cur:
                return cur
            cur = new
        raise NonWellFoundedError(
            "grade-0 coefficients do not stabilize; a coefficient depends "
            "on itself at its own grade")

    def _eval_zfree(cur):
        curd = cur[1:] + [zero]
        maxp = max((p for (_c, p, _q, _a) in zfree), default=0)
        maxq = max((q for (_c, _p, q, _a) in zfree), default=0)
        pows_m = [[one] + [zero] * (n_u - 1)]
        for _ in range(maxp):
            pows_m.append(_conv(pows_m[-1], cur, n_u, zero))
        pows_d = [[one] + [zero] * (n_u - 1)]
        for _ in range(maxq):
            pows_d.append(_conv(pows_d[-1], curd, n_u, zero))
        out = [zero] * n_u
        for cx, p, q, a in zfree:
            src = _conv(pows_m[p], pows_d[q], n_u, zero) if p + q else pows_m[0]
            for k in range(a, n_u):
                s = src[k - a]
                if s == 0:
                    continue
                out[k] = out[k] + cx * s
        return out

    def cofactors():
        """Grade-0 rows of the partial derivatives of the z-free part."""
        m0r, d0r = m_rows[0], d_rows[0]
        maxp = max((p for (_c, p, _q, _a) in zfree_alpha), default=0)
        maxq = max((q for (_c, _p, q, _a) in zfree_alpha), default=0)
        pows_m = [[one] + [zero] * (n_u - 1)]
        for _ in range(max(maxp - 1, 0) + 1):
            pows_m.append(_conv(pows_m[-1], m0r, n_u, zero))
        pows_d = [[one] + [zero] * (n_u - 1)]
        for _ in range(max(maxq - 1, 0) + 1):
            pows_d.append(_conv(pows_d[-1], d0r, n_u, zero))
        a0 = [zero] * n_u
        b0 = [zero] * n_u
        for cx, p, q, a in zfree_alpha:
            if p >= 1:
                src = _conv(pows_m[p - 1], pows_d[q], n_u, zero)
                for k in range(a, n_u):
                    if src[k - a] != 0:
                        a0[k] = a0[k] + (p * cx) * src[k - a]
            if q >= 1:
                src = _conv(pows_m[p], pows_d[q - 1], n_u, zero)
                for k in range(a, n_u):
                    if src[k - a] != 0:
                        b0[k] = b0[k] + (q * cx) * src[k - a]
        return a0, b0

    row0 = grade0_row()
    m_rows.append(row0)
    d_rows.append(row0[1:] + [zero])
    extend_cache(0)

    a0 = b0 = None
    if zfree_alpha:
        a0, b0 = cofactors()
        if b0[0] != 0:
            raise NonWellFoundedError(
                "a z-free divided-difference monomial references later "
                "u-coefficients at the same grade")
        self_cof = a0[0] + (b0[1] if n_u >= 2 else zero)
        if self_cof != 0:
            raise NonWellFoundedError(
                "a coefficient depends on itself at its own grade",
                cofactor=str(self_cof))

    for n in range(1, n_z):
        m_rows.append([zero] * n_u)
        d_rows.append([zero] * n_u)
        extend_cache(n)
        c_row = [zero] * n_u
        for cx, p, q, d, a in terms:
            if d > n:
                continue
            if p + q == 0:
                if d == n and a < n_u:
                    c_row[a] = c_row[a] + cx
                continue
            src = caches[(p, q)][n - d]
            for k in range(a, n_u):
                s = src[k - a]
                if s == 0:
                    continue
                c_row[k] = c_row[k] + cx * s
        if zfree_alpha:
            row = [zero] * n_u
            for k in range(n_u):
                acc = c_row[k]
                for j in range(1, k + 1):
                    if a0[j] != 0:
                        acc = acc + a0[j] * row[k - j]
                for j in range(2, min(k + 1, n_u - 1) + 1):
                    if b0[j] != 0:
                        acc = acc + b0[j] * row[k + 1 - j]
                row[k] = acc
        else:
            row = c_row
        m_rows[n] = row
        d_rows[n] = row[1:] + [zero]
        extend_cache(n, overwrite=True)

    m = BiSeries(m_rows, order_z=n_z, order_u=n_u)
    m0 = UniSeries([r[0] for r in m_rows])
    residual_ok = _residual_check(eq, m, terms, ring)
    return SolutionSeries(eq, m, m0, residual_ok, ring)


def _residual_check(eq, m, terms, ring):
    """Re-evaluate the right-hand side independently and compare.

    Uses the plain series operations (honest divided difference of
    order n_u - 1), so agreement is only asserted on the window where
    that evaluation is itself exact.
    """
    n_z, n_u = m.order_z, m.order_u
    if n_u < 2:
        return True
    zero = lift_rat(ring, 0)
    db = divided_difference(m)
    pow_m = {0: None}
    pow_d = {0: None}

    def power(table, base, k):
        if k in table:
            return table[k]
        prev = power(table, base, k - 1)
        table[k] = base if prev is None else series_mul(prev, base)
        return table[k]

    nu_eff = n_u - 1
    rhs_rows = [[zero] * nu_eff for _ in range(n_z)]
    for cx, p, q, d, a in terms:
        if p + q == 0:
            if d < n_z and a < nu_eff:
                rhs_rows[d][a] = rhs_rows[d][a] + cx
            continue
        prod = None
        if p:
            prod = power(pow_m, m, p)
        if q:
            dq = power(pow_d, db, q)
            prod = dq if prod is None else series_mul(prod, dq)
        rows = prod.rows
        pnu = prod.order_u
        for n in range(d, n_z):
            src = rows[n - d]
            dst = rhs_rows[n]
            for k in range(a, nu_eff):
                if k - a < pnu:
                    s = src[k - a]
                    if s != 0:
                        dst[k] = dst[k] + cx * s
    window = nu_eff - eq.rhs.degree("u")
    for n in range(n_z):
        for k in range(max(window, 0)):
            if rhs_rows[n][k] != m.rows[n][k]:
                return False
    return True


def solve_series_marked(eq, n_z, n_u=None):
    """Solve keeping the marking variable x as exact polynomials."""
    return solve_series(eq, n_z, n_u, ring="xpoly")


def eval_u1(sol):
    """M(z,1) from a solved grid, certified against u-truncation.

    Re-solves with the u-order enlarged by 4 and accepts only when every
    z-coefficient of the row sums agrees; otherwise raises
    U_TRUNCATION_UNSTABLE. Equations whose rows have divergent value at
    u=1 (unbounded u-support) fail the certificate honestly.
    """
    n_z, n_u = sol.orders
    first = sol.m.row_sum_series()
    wider = solve_series(sol.eq, n_z, n_u + 4, ring=sol.ring)
    second = wider.m.row_sum_series()
    for n in range(n_z):
        if first.coeffs[n] != second.coeffs[n]:
            raise TruncationUnstableError(
                "row sums changed when the u-order was enlarged",
                first_differing_index=n)
    return first


def m0_certified(eq, n_z, ring="rat", n_u=None):
    """M(z,0) with the same enlargement certificate applied to column 0."""
    sol = solve_series(eq, n_z, n_u, ring=ring)
    wider = solve_series(eq, n_z, sol.orders[1] + 4, ring=ring)
    for n in range(n_z):
        if sol.m0.coeffs[n] != wider.m0.coeffs[n]:
            raise TruncationUnstableError(
                "M(z,0) changed when the u-order was enlarged",
                first_differing_index=n)
    return sol.m0


def u1_series(eq, n_z, m0, ring="rat"):
    """M(z,1) by solving the u=1 section of the equation directly.

    Substituting u=1 closes the equation over the single unknown
    S(z) = M(z,1) once M(z,0) is known: D becomes S - M(z,0). This
    avoids any u-truncation, so it is the preferred route for long
    series; m0 must be exact through n_z.

    The computed section is validated by residual before returning.
    """
    zero = lift_rat(ring, 0)
    one = lift_rat(ring, 1)
    if isinstance(m0, UniSeries):
        m0 = m0.coeffs
    if len(m0) < n_z:
        raise AnalysisError("m0 must be supplied through the requested order")
    terms = [(cx, p, q, d) for (cx, p, q, d, _a) in _terms_of(eq, ring)]

    s = [zero] * n_z
    t = [zero] * n_z  # S - m0
    keys = _product_chain({(p, q) for (_c, p, q, _d) in terms if p + q >= 1})
    caches = {k: [] for k in keys}

    def extend(n, overwrite=False):
        for p, q in keys:
            if p + q == 1:
                val = s[n] if p == 1 else t[n]
            else:
                parent = caches[(p - 1, q)] if p >= 1 else caches[(p, q - 1)]
                factor = s if p >= 1 else t
                val = zero
                for i in range(n + 1):
                    if parent[i] != 0 and factor[n - i] != 0:
                        val = val + parent[i] * factor[n - i]
            if overwrite:
                caches[(p, q)][n] = val
            else:
                caches[(p, q)].append(val)

    # grade 0 by scalar fixed point
    zf = [(cx, p, q) for (cx, p, q, d) in terms if d == 0]
    s0 = zero
    stable = False
    for _ in range(60):
        acc = zero
        for cx, p, q in zf:
            v = cx
            for _i in range(p):
                v = v * s0
            for _i in range(q):
                v = v * (s0 - m0[0])
            acc = acc + v
        if acc == s0:
            stable = True
            break
        s0 = acc
    if not stable:
        raise NonWellFoundedError(
            "u=1 section does not stabilize at grade 0; the section may diverge")
    s[0] = s0
    t[0] = s0 - m0[0]
    extend(0)

    # cofactor of the current grade must vanish for forward substitution
    lam = zero
    for cx, p, q in zf:
        if p >= 1:
            v = p * cx
            for _i in range(p - 1):
                v = v * s[0]
            for _i in range(q):
                v = v * t[0]
            lam = lam + v
        if q >= 1:
            v = q * cx
            for _i in range(p):
                v = v * s[0]
            for _i in range(q - 1):
                v = v * t[0]
            lam = lam + v
    if lam != 0:
        raise NonWellFoundedError(
            "u=1 section coefficient depends on itself", cofactor=str(lam))

    for n in range(1, n_z):
        s[n] = zero
        t[n] = zero
        extend(n)
        acc = zero
        for cx, p, q, d in terms:
            if d > n:
                continue
            if p + q == 0:
                if d == n:
                    acc = acc + cx
                continue
            v = caches[(p, q)][n - d]
            if v != 0:
                acc = acc + cx * v
        s[n] = acc
        t[n] = acc - m0[n]
        extend(n, overwrite=True)

    # residual: the completed caches must reproduce s itself
    for n in range(n_z):
        acc = zero
        for cx, p, q, d in terms:
            if d > n:
                continue
            if p + q == 0:
                if d == n:
                    acc = acc + cx
                continue
            v = caches[(p, q)][n - d]
            if v != 0:
                acc = acc + cx * v
        if acc != s[n]:
            raise AnalysisError("u=1 section residual is nonzero", index=n)
    return UniSeries(s)
