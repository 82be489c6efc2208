"""Truncated power series: univariate in z and bivariate in (z, u).

Coefficients are exact rationals (gmpy2.mpq) by default, but every
operation only uses ring arithmetic (+, -, *), so polynomial or jet
coefficients from `rings` slot in unchanged.

Orders are exclusive: a UniSeries of order N stores coefficients of
z^0 .. z^(N-1). A BiSeries of orders (N_z, N_u) stores a dense grid
c[n][k] for z^n u^k below those bounds.
"""

import gmpy2
from gmpy2 import mpfr, mpq

from .errors import AnalysisError
from .numeric import MIN_BITS, DEFAULT_BITS, precision
from .rings import XPoly, xpoly_conv_rows

DEFAULT_ORDER = 64


def _zero_like(sample):
    return sample * 0


class UniSeries:
    """Dense truncated series in one variable."""

    def __init__(self, coeffs, order=None):
        coeffs = list(coeffs)
        if order is None:
            order = len(coeffs)
        if order < 1:
            raise AnalysisError(f"series order must be >= 1, got {order}")
        if len(coeffs) > order:
            coeffs = coeffs[:order]
        zero = _zero_like(coeffs[0]) if coeffs else mpq(0)
        while len(coeffs) < order:
            coeffs.append(zero)
        self.coeffs = coeffs
        self.order = order

    def __getitem__(self, n):
        return self.coeffs[n]

    def __eq__(self, other):
        return (isinstance(other, UniSeries) and self.order == other.order
                and self.coeffs == other.coeffs)

    def __repr__(self):
        head = ", ".join(str(c) for c in self.coeffs[:6])
        tail = ", ..." if self.order > 6 else ""
        return f"UniSeries([{head}{tail}], order={self.order})"


class BiSeries:
    """Dense truncated series in (z, u); rows indexed by the power of z."""

    def __init__(self, rows, order_z=None, order_u=None):
        rows = [list(r) for r in rows]
        if order_z is None:
            order_z = len(rows)
        if order_u is None:
            order_u = max((len(r) for r in rows), default=0) or 1
        if order_z < 1 or order_u < 1:
            raise AnalysisError(f"series orders must be >= 1, got ({order_z}, {order_u})")
        sample = None
        for r in rows:
            if r:
                sample = r[0]
                break
        zero = _zero_like(sample) if sample is not None else mpq(0)
        rows = rows[:order_z]
        fixed = []
        for r in rows:
            r = r[:order_u]
            r = r + [zero] * (order_u - len(r))
            fixed.append(r)
        while len(fixed) < order_z:
            fixed.append([zero] * order_u)
        self.rows = fixed
        self.order_z = order_z
        self.order_u = order_u

    def coeff(self, n, k):
        return self.rows[n][k]

    def u0_series(self):
        """The z-series of the u^0 column."""
        return UniSeries([r[0] for r in self.rows])

    def row_sum_series(self, upto=None):
        """The z-series of row sums, i.e. the series evaluated at u=1."""
        cols = self.order_u if upto is None else min(upto, self.order_u)
        return UniSeries([sum(r[:cols], _zero_like(r[0])) for r in self.rows])

    def __eq__(self, other):
        return (isinstance(other, BiSeries) and self.order_z == other.order_z
                and self.order_u == other.order_u and self.rows == other.rows)

    def __repr__(self):
        return f"BiSeries(order_z={self.order_z}, order_u={self.order_u})"


def series_add(a, b):
    """Sum, truncated to the smaller order(s)."""
    if isinstance(a, UniSeries) and isinstance(b, UniSeries):
        n = min(a.order, b.order)
        return UniSeries([a.coeffs[i] + b.coeffs[i] for i in range(n)])
    if isinstance(a, BiSeries) and isinstance(b, BiSeries):
        nz = min(a.order_z, b.order_z)
        nu = min(a.order_u, b.order_u)
        return BiSeries([[a.rows[i][j] + b.rows[i][j] for j in range(nu)]
                         for i in range(nz)])
    raise AnalysisError("series_add needs two series of the same kind")


def series_mul(a, b):
    """Product, truncated to the smaller order(s)."""
    if isinstance(a, UniSeries) and isinstance(b, UniSeries):
        n = min(a.order, b.order)
        zero = _zero_like(a.coeffs[0] * b.coeffs[0])
        out = [zero] * n
        for i in range(n):
            ai = a.coeffs[i]
            if ai == 0:
                continue
            for j in range(n - i):
                bj = b.coeffs[j]
                if bj == 0:
                    continue
                out[i + j] = out[i + j] + ai * bj
        return UniSeries(out)
    if isinstance(a, BiSeries) and isinstance(b, BiSeries):
        nz = min(a.order_z, b.order_z)
        nu = min(a.order_u, b.order_u)
        if isinstance(a.rows[0][0], XPoly):
            out = [xpoly_conv_rows(((a.rows[i], b.rows[n - i])
                                    for i in range(n + 1)), nu)
                   for n in range(nz)]
            return BiSeries(out)
        zero = _zero_like(a.rows[0][0] * b.rows[0][0])
        out = [[zero] * nu for _ in range(nz)]
        for i1 in range(nz):
            for j1 in range(nu):
                c = a.rows[i1][j1]
                if c == 0:
                    continue
                for i2 in range(nz - i1):
                    row_b = b.rows[i2]
                    orow = out[i1 + i2]
                    for j2 in range(nu - j1):
                        d = row_b[j2]
                        if d == 0:
                            continue
                        orow[j1 + j2] = orow[j1 + j2] + c * d
        return BiSeries(out)
    raise AnalysisError("series_mul needs two series of the same kind")


def series_scale(a, c):
    if isinstance(a, UniSeries):
        return UniSeries([c * x for x in a.coeffs])
    return BiSeries([[c * x for x in row] for row in a.rows])


def series_div(a, b):
    """Quotient of univariate series; b must have an invertible constant term."""
    if not (isinstance(a, UniSeries) and isinstance(b, UniSeries)):
        raise AnalysisError("series_div is defined for univariate series")
    n = min(a.order, b.order)
    b0 = b.coeffs[0]
    if b0 == 0:
        raise AnalysisError("series division by a series with zero constant term")
    inv = mpq(1, b0) if isinstance(b0, (int, mpq)) and not isinstance(b0, bool) else 1 / b0
    out = []
    for k in range(n):
        acc = a.coeffs[k]
        for j in range(1, k + 1):
            if b.coeffs[j] != 0:
                acc = acc - b.coeffs[j] * out[k - j]
        out.append(acc * inv)
    return UniSeries(out)


def divided_difference(b):
    """(S(z,u) - S(z,0)) / u for a bivariate series; u-order drops by one."""
    if not isinstance(b, BiSeries):
        raise AnalysisError("divided_difference is defined for bivariate series")
    if b.order_u < 2:
        raise AnalysisError("divided_difference needs u-order >= 2")
    return BiSeries([row[1:] for row in b.rows],
                    order_z=b.order_z, order_u=b.order_u - 1)


def shift_u(s, c):
    """Substitute u -> u + c by binomial expansion.

    Rows are treated as polynomials in u; on genuinely truncated rows the
    top coefficients of the result inherit the truncation.
    """
    if not isinstance(s, BiSeries):
        # MultiPoly carries its own shift; dispatch keeps one entry point.
        return s.shift_u(c)
    nu = s.order_u
    binom = [[mpq(0)] * nu for _ in range(nu)]
    for k in range(nu):
        binom[k][0] = mpq(1)
        for j in range(1, k + 1):
            binom[k][j] = binom[k - 1][j - 1] + (binom[k - 1][j] if j <= k - 1 else 0)
    powc = [mpq(1)]
    for _ in range(nu - 1):
        powc.append(powc[-1] * c)
    out = []
    for row in s.rows:
        new = [_zero_like(row[0])] * nu
        for k in range(nu):
            a = row[k]
            if a == 0:
                continue
            for j in range(k + 1):
                new[j] = new[j] + a * binom[k][j] * powc[k - j]
        out.append(new)
    return BiSeries(out, order_z=s.order_z, order_u=nu)


class EvalResult:
    """Numeric evaluation plus a crude estimate of the truncation tail."""

    def __init__(self, value, tail):
        self.value = value
        self.tail = tail

    def __iter__(self):
        return iter((self.value, self.tail))

    def __repr__(self):
        return f"EvalResult(value={self.value}, tail={self.tail})"


def eval_numeric(s, z, u=None, bits=DEFAULT_BITS, bound=1):
    """Evaluate a truncated series at a numeric point by Horner's rule.

    `bound` is a caller-supplied bound on the radius of convergence;
    |z| must be strictly inside it. The tail estimate assumes the
    coefficients keep the growth rate seen at the end of the window:
    A * t^N / (1 - t) with t = |z|/bound and A read off the last few
    stored coefficients. Raises on underflow in the working precision.
    """
    if bits < MIN_BITS:
        raise AnalysisError(f"precision must be at least {MIN_BITS} bits, got {bits}")
    ctx = gmpy2.context(precision=bits)
    with ctx:
        zv = mpfr(z)
        bd = mpfr(bound)
        if not abs(zv) < bd:
            raise AnalysisError(
                "evaluation point must be strictly inside the stated bound",
                point=str(zv), bound=str(bd))
        if isinstance(s, BiSeries):
            if u is None:
                raise AnalysisError("bivariate evaluation needs a u value")
            uv = mpfr(u)
            coeffs = []
            for row in s.rows:
                acc = mpfr(0)
                for c in reversed(row):
                    acc = acc * uv + mpfr(c)
                coeffs.append(acc)
            order = s.order_z
        else:
            coeffs = [mpfr(c) for c in s.coeffs]
            order = s.order
        acc = mpfr(0)
        for c in reversed(coeffs):
            acc = acc * zv + c
        t = abs(zv) / bd
        window = coeffs[-min(5, order):]
        amax = mpfr(0)
        for i, c in enumerate(window):
            k = order - len(window) + i
            scaled = abs(c) * bd ** k
            if scaled > amax:
                amax = scaled
        tail = amax * t ** order / (1 - t)
    if ctx.underflow:
        raise AnalysisError("precision underflow during evaluation; raise bits")
    return EvalResult(acc, tail)
