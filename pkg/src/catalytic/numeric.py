"""Arbitrary-precision numeric kernel.

Wraps gmpy2 with the few utilities the analyzers need: precision-scoped
contexts, validated bigfloat construction, dense linear solves, QR least
squares, power iteration for nonnegative matrices, and polynomial
extrapolation to zero (Richardson acceleration in disguise).

All mpfr arithmetic must happen inside an explicit `precision(bits)`
block; the ambient context is 53 bits and is never relied upon.
"""

import gmpy2
from gmpy2 import mpfr, mpq

from .errors import AnalysisError, NoConvergenceError

DEFAULT_BITS = 256
MIN_BITS = 64


def precision(bits):
    """Context manager setting the working mpfr precision to `bits`."""
    if bits < MIN_BITS:
        raise AnalysisError(f"precision must be at least {MIN_BITS} bits, got {bits}")
    return gmpy2.context(precision=bits)


def bigfloat(value, bits=DEFAULT_BITS):
    """Construct an mpfr at the given precision, refusing NaN.

    Accepts ints, fractions (mpq), floats, decimal strings, and mpfr.
    """
    if bits < MIN_BITS:
        raise AnalysisError(f"precision must be at least {MIN_BITS} bits, got {bits}")
    with precision(bits):
        x = mpfr(value)
    if gmpy2.is_nan(x):
        raise AnalysisError("refusing to store NaN in a bigfloat")
    return x


def to_decimal(x):
    """Decimal string for a number; exact 'p/q' form for rationals."""
    if isinstance(x, (int,)):
        return str(x)
    if isinstance(x, mpq) or type(x).__name__ == "Fraction":
        return str(x)
    return str(x)


def rel_close(a, b, tol):
    """|a-b| <= tol * max(1, |a|, |b|), computed in the ambient context."""
    scale = max(mpfr(1), abs(mpfr(a)), abs(mpfr(b)))
    return abs(mpfr(a) - mpfr(b)) <= mpfr(tol) * scale


def default_tol(bits):
    """Acceptance tolerance tied to the working precision."""
    return mpfr(2) ** (-(bits // 4))


def newton_tol(bits):
    """Residual threshold for Newton iterations at this precision."""
    return mpfr(2) ** (-(bits // 2))


def solve_dense(a, b):
    """Solve a small dense linear system by Gaussian elimination.

    Works over any exact or floating field with /, used for Newton steps
    (sizes 2..4) and exact rational solves. `a` is a list of row lists,
    `b` a list; both are copied.
    """
    n = len(a)
    m = [list(row) + [b[i]] for i, row in enumerate(a)]
    for col in range(n):
        piv = max(range(col, n), key=lambda r: abs(m[r][col]))
        if m[piv][col] == 0:
            raise AnalysisError("singular matrix in dense solve")
        if piv != col:
            m[col], m[piv] = m[piv], m[col]
        inv = 1 / m[col][col] if not isinstance(m[col][col], int) else mpq(1, m[col][col])
        for r in range(n):
            if r != col and m[r][col] != 0:
                factor = m[r][col] * inv
                for c in range(col, n + 1):
                    m[r][c] = m[r][c] - factor * m[col][c]
    return [m[i][n] / m[i][i] for i in range(n)]


def mat_vec(a, v):
    return [sum(a[i][j] * v[j] for j in range(len(v))) for i in range(len(a))]


def power_iteration(a, tol, max_iter=500):
    """Dominant eigenvalue and eigenvector of a nonnegative matrix.

    Iterates x <- A x with 1-norm scaling and stops once the residual
    ||A x - lam x||_inf falls below tol * max(1, lam). Returns
    (lam, x, residual). Raises NoConvergenceError if the residual test
    never passes; for a nonnegative matrix with a positive dominant
    eigenvector that signals tol was too tight for the working precision.
    """
    n = len(a)
    x = [mpfr(1) for _ in range(n)]
    lam = mpfr(0)
    for _ in range(max_iter):
        y = mat_vec(a, x)
        norm = sum(abs(t) for t in y)
        if norm == 0:
            return mpfr(0), x, mpfr(0)
        y = [t / norm for t in y]
        ay = mat_vec(a, y)
        num = sum(ay[i] * y[i] for i in range(n))
        den = sum(y[i] * y[i] for i in range(n))
        lam = num / den
        resid = max(abs(ay[i] - lam * y[i]) for i in range(n))
        x = y
        if resid <= tol * max(mpfr(1), abs(lam)):
            return lam, x, resid
    raise NoConvergenceError(
        "power iteration did not reach the residual target",
        residual=str(resid), tol=str(tol),
    )


def neville_to_zero(xs, ys):
    """Polynomial extrapolation of (xs, ys) data to x=0.

    Classic Neville scheme; xs must be distinct and nonzero. Used for
    Richardson acceleration: pass xs = 1/n (or h^2) and the sequence
    values, get the accelerated limit.
    """
    n = len(xs)
    if n == 0:
        raise AnalysisError("empty extrapolation input")
    p = list(ys)
    for level in range(1, n):
        nxt = []
        for i in range(n - level):
            x0, x1 = xs[i], xs[i + level]
            nxt.append((x1 * p[i] - x0 * p[i + 1]) / (x1 - x0))
        p = nxt
    return p[0]


def richardson_sequence(ns, vals, rounds=None):
    """Accelerate a_n = L + c1/n + c2/n^2 + ... toward L.

    ns are the sample indices (increasing), vals the sequence values.
    Uses up to `rounds` Neville levels (default: all).
    """
    xs = [mpfr(1) / n for n in ns]
    ys = [mpfr(v) for v in vals]
    if rounds is not None and rounds + 1 < len(xs):
        xs = xs[-(rounds + 1):]
        ys = ys[-(rounds + 1):]
    return neville_to_zero(xs, ys)


def least_squares(a, b):
    """Least-squares solution of an overdetermined system via MGS QR.

    a: m x n (m >= n) list of mpfr rows, b: length-m rhs. Returns the
    coefficient list of length n.
    """
    m, n = len(a), len(a[0])
    q = [[a[i][j] for j in range(n)] for i in range(m)]
    r = [[mpfr(0)] * n for _ in range(n)]
    for j in range(n):
        for k in range(j):
            s = sum(q[i][k] * q[i][j] for i in range(m))
            r[k][j] = s
            for i in range(m):
                q[i][j] -= s * q[i][k]
        norm = gmpy2.sqrt(sum(q[i][j] ** 2 for i in range(m)))
        if norm == 0:
            raise AnalysisError("rank-deficient least-squares system")
        r[j][j] = norm
        for i in range(m):
            q[i][j] /= norm
    qtb = [sum(q[i][j] * b[i] for i in range(m)) for j in range(n)]
    x = [mpfr(0)] * n
    for j in range(n - 1, -1, -1):
        s = qtb[j] - sum(r[j][k] * x[k] for k in range(j + 1, n))
        x[j] = s / r[j][j]
    return x
