"""Independent reference computations used to freeze expected values.

Everything here is deliberately naive: direct dynamic programs,
closed-form factorial formulas, and Fraction-based expansions that share
no code with the package under test.
"""

from fractions import Fraction
from math import factorial


def motzkin_path_grid(n_max, k_max):
    """grid[n][k] = number of nonnegative lattice paths with steps
    {+1, 0, -1} of length n ending at height k."""
    grid = [[0] * k_max for _ in range(n_max)]
    grid[0][0] = 1
    for n in range(1, n_max):
        for k in range(k_max):
            total = grid[n - 1][k]
            if k > 0:
                total += grid[n - 1][k - 1]
            if k + 1 < k_max:
                total += grid[n - 1][k + 1]
            grid[n][k] = total
    return grid


def dyck_path_grid(n_max, k_max):
    """Same with steps {+1, -1} only (ballot counts)."""
    grid = [[0] * k_max for _ in range(n_max)]
    grid[0][0] = 1
    for n in range(1, n_max):
        for k in range(k_max):
            total = 0
            if k > 0:
                total += grid[n - 1][k - 1]
            if k + 1 < k_max:
                total += grid[n - 1][k + 1]
            grid[n][k] = total
    return grid


def motzkin_number(n):
    """Sum formula n! / ((n-2k)! k! (k+1)!)."""
    total = 0
    k = 0
    while 2 * k <= n:
        total += factorial(n) // (factorial(n - 2 * k) * factorial(k) * factorial(k + 1))
        k += 1
    return total


def catalan(n):
    return factorial(2 * n) // (factorial(n) * factorial(n + 1))


def planar_map_count(n):
    """Rooted planar maps with n edges: 2 * 3^n * (2n)! / (n! (n+2)!)."""
    return 2 * 3 ** n * factorial(2 * n) // (factorial(n) * factorial(n + 2))


def binomial_series(alpha, a, n_terms):
    """Coefficients of (1 + a z)^alpha as exact Fractions."""
    out = [Fraction(1)]
    for n in range(1, n_terms):
        out.append(out[-1] * (Fraction(alpha) - (n - 1)) / n * Fraction(a))
    return out


def poly_mul(a, b, n_terms):
    out = [Fraction(0)] * n_terms
    for i, x in enumerate(a[:n_terms]):
        if x == 0:
            continue
        for j, y in enumerate(b[: n_terms - i]):
            if y == 0:
                continue
            out[i + j] += x * y
    return out


def poly_div(num, den, n_terms):
    """Power-series division with den[0] != 0."""
    out = []
    for n in range(n_terms):
        acc = num[n] if n < len(num) else Fraction(0)
        for j in range(1, n + 1):
            d = den[j] if j < len(den) else Fraction(0)
            if d != 0:
                acc -= d * out[n - j]
        out.append(acc / (den[0] if isinstance(den[0], Fraction) else Fraction(den[0])))
    return out


def simple_map_series(n_terms):
    """Expansion of S(z,1) = (1 + 20z - 8z^2 + (1-8z)^(3/2)) / (2 (z+1)^3)."""
    num = binomial_series(Fraction(3, 2), -8, n_terms)
    num[0] += 1
    if n_terms > 1:
        num[1] += 20
    if n_terms > 2:
        num[2] -= 8
    den = [Fraction(2), Fraction(6), Fraction(6), Fraction(2)]
    return poly_div(num, den, n_terms)


def planar_u1_series(n_terms):
    """Expansion of M(z,1) = (18z - 1 + (1-12z)^(3/2)) / (54 z^2)."""
    num = binomial_series(Fraction(3, 2), -12, n_terms + 2)
    num[0] -= 1
    num[1] += 18
    assert num[0] == 0 and num[1] == 0
    return [num[n + 2] / 54 for n in range(n_terms)]


def catalan_gf_series(n_terms):
    """Expansion of (1 - sqrt(1-4z)) / (2z)."""
    sq = binomial_series(Fraction(1, 2), -4, n_terms + 1)
    return [-sq[n + 1] / 2 for n in range(n_terms)]


def naive_conv(a, b, n):
    out = [Fraction(0)] * n
    for i in range(min(len(a), n)):
        for j in range(min(len(b), n - i)):
            out[i + j] += Fraction(a[i]) * Fraction(b[j])
    return out
