from fractions import Fraction

import pytest
from gmpy2 import mpq
from hypothesis import given, settings, strategies as st

from catalytic.errors import AnalysisError
from catalytic.rings import XPoly, xpoly_conv_rows
from catalytic.series import (
    BiSeries,
    UniSeries,
    divided_difference,
    eval_numeric,
    series_add,
    series_div,
    series_mul,
    shift_u,
)
from oracles import naive_conv

rats = st.fractions(min_value=-8, max_value=8, max_denominator=9)
coeff_lists = st.lists(rats, min_size=1, max_size=8)


def to_uni(fracs):
    return UniSeries([mpq(f.numerator, f.denominator) for f in fracs])


@settings(max_examples=60, deadline=None)
@given(coeff_lists, coeff_lists)
def test_mul_matches_naive_convolution(a, b):
    n = min(len(a), len(b))
    got = series_mul(to_uni(a), to_uni(b))
    want = naive_conv(a, b, n)
    assert got.order == n
    for i in range(n):
        assert got.coeffs[i] == mpq(want[i].numerator, want[i].denominator)


@settings(max_examples=40, deadline=None)
@given(coeff_lists, coeff_lists)
def test_add_commutes_with_extraction(a, b):
    n = min(len(a), len(b))
    got = series_add(to_uni(a), to_uni(b))
    for i in range(n):
        assert got.coeffs[i] == mpq(Fraction(a[i] + b[i]).numerator,
                                    Fraction(a[i] + b[i]).denominator)


def random_biseries(draw_rows):
    return BiSeries([[mpq(f.numerator, f.denominator) for f in row] for row in draw_rows])


bi_rows = st.lists(st.lists(rats, min_size=2, max_size=5), min_size=1, max_size=5)


@settings(max_examples=50, deadline=None)
@given(bi_rows)
def test_divided_difference_reconstruction(rows):
    s = random_biseries(rows)
    d = divided_difference(s)
    # u * D + S(z,0) == S through (N_z, N_u - 1)
    for n in range(s.order_z):
        assert s.rows[n][0] == s.rows[n][0]
        for k in range(1, s.order_u - 1 + 1):
            lhs = d.rows[n][k - 1] if k - 1 < d.order_u else 0
            assert lhs == s.rows[n][k]


@settings(max_examples=50, deadline=None)
@given(bi_rows, rats)
def test_shift_involution(rows, c):
    s = random_biseries(rows)
    cq = mpq(c.numerator, c.denominator)
    assert shift_u(shift_u(s, cq), -cq) == s


def test_shift_involution_concrete():
    s = BiSeries([[mpq(1), mpq(2), mpq(3)], [mpq(0), mpq(1), mpq(5)]])
    c = mpq(7, 3)
    back = shift_u(shift_u(s, c), -c)
    assert back == s


def test_shift_matches_binomial_expansion():
    # row u^2 shifted by 1 -> 1 + 2u + u^2
    s = BiSeries([[mpq(0), mpq(0), mpq(1)]])
    t = shift_u(s, mpq(1))
    assert t.rows[0] == [mpq(1), mpq(2), mpq(1)]


def test_series_div_is_inverse_of_mul():
    a = UniSeries([mpq(1), mpq(3), mpq(-2), mpq(5)])
    b = UniSeries([mpq(2), mpq(-1), mpq(4), mpq(1)])
    q = series_div(series_mul(a, b), b)
    assert q == a


def test_series_div_rejects_zero_constant():
    with pytest.raises(AnalysisError):
        series_div(UniSeries([mpq(1)]), UniSeries([mpq(0)]))


def test_eval_numeric_geometric_series():
    n = 40
    s = UniSeries([mpq(1)] * n)
    val, tail = eval_numeric(s, mpq(1, 2), bits=128, bound=1)
    # 1/(1-z) at 1/2 = 2, truncation error 2^-39
    assert abs(val - 2) < 1e-10
    assert tail > 0


def test_eval_numeric_enforces_bound():
    s = UniSeries([mpq(1)] * 5)
    with pytest.raises(AnalysisError):
        eval_numeric(s, 2, bits=128, bound=1)


def test_eval_numeric_bivariate():
    # S = 1 + z*u: at (1/2, 3) -> 5/2
    s = BiSeries([[mpq(1), mpq(0)], [mpq(0), mpq(1)]])
    val, _ = eval_numeric(s, mpq(1, 2), u=3, bits=128, bound=10)
    assert abs(val - mpq(5, 2)) < 1e-30


def test_orders_validated():
    with pytest.raises(AnalysisError):
        UniSeries([], order=0)
    with pytest.raises(AnalysisError):
        BiSeries([[mpq(1)]], order_z=0)


def _conv_brute(pairs, n_u):
    # reference: plain ring arithmetic, one XPoly per partial product
    out = [XPoly() for _ in range(n_u)]
    for ra, rb in pairs:
        for k1 in range(min(len(ra), n_u)):
            for k2 in range(min(len(rb), n_u - k1)):
                out[k1 + k2] = out[k1 + k2] + ra[k1] * rb[k2]
    return out


xpoly_rows = st.lists(
    st.lists(st.lists(rats, min_size=0, max_size=3), min_size=1, max_size=4),
    min_size=1, max_size=3)
count_rows = st.lists(
    st.lists(st.lists(st.integers(min_value=0, max_value=50),
                      min_size=0, max_size=3), min_size=1, max_size=4),
    min_size=1, max_size=3)


def _rows_of(data):
    return [[XPoly(cs) for cs in row] for row in data]


@settings(max_examples=60, deadline=None)
@given(xpoly_rows, xpoly_rows, st.integers(min_value=1, max_value=6))
def test_conv_rows_matches_brute_force(da, db, n_u):
    # mixed signs and denominators: exercises the flat fallback
    pairs = list(zip(_rows_of(da), _rows_of(db)))
    assert xpoly_conv_rows(pairs, n_u) == _conv_brute(pairs, n_u)


@settings(max_examples=60, deadline=None)
@given(count_rows, count_rows, st.integers(min_value=1, max_value=6))
def test_conv_rows_packed_route_matches(da, db, n_u):
    # nonnegative integers: exercises the packed-integer route
    pairs = list(zip(_rows_of(da), _rows_of(db)))
    assert xpoly_conv_rows(pairs, n_u) == _conv_brute(pairs, n_u)
