import pytest
from gmpy2 import mpq

from catalytic.engine import (
    default_u_order,
    eval_u1,
    m0_certified,
    solve_series,
    solve_series_marked,
    u1_series,
)
from catalytic.errors import NonWellFoundedError, TruncationUnstableError
from catalytic.model import parse_equation
from catalytic.rings import Jet, XPoly
from oracles import (
    catalan,
    catalan_gf_series,
    dyck_path_grid,
    motzkin_number,
    motzkin_path_grid,
    planar_map_count,
    simple_map_series,
)

MOTZKIN = parse_equation("M = 1 + z*(u+1)*M + z*D")
DYCK = parse_equation("M = 1 + z*u*M + z*D")
PLANAR = parse_equation("M = 1 + z*(u+1)^2*M^2 + z*(u+1)*M + z*(u+1)*D")
TRIANG = parse_equation("M = 1 + u*M + z*(1+M)*D")
SIMPLE = parse_equation(
    "M = z*(u+1)^2*(M+1)^2 + z*(u+1)*(M+D+1)"
    " - z*(u+1)*(M+1)*(M-u*D+1) - M*(M-u*D)")


def test_motzkin_grid_equals_path_dp():
    n = 31
    sol = solve_series(MOTZKIN, n, n + 6)
    grid = motzkin_path_grid(n, n + 6)
    for i in range(n):
        for k in range(n + 6):
            assert sol.m.rows[i][k] == grid[i][k], (i, k)
    assert sol.residual_ok


def test_dyck_grid_equals_path_dp():
    n = 31
    sol = solve_series(DYCK, n, n + 6)
    grid = dyck_path_grid(n, n + 6)
    for i in range(n):
        for k in range(n + 6):
            assert sol.m.rows[i][k] == grid[i][k], (i, k)


def test_motzkin_m0_sum_formula():
    sol = solve_series(MOTZKIN, 25, 30)
    for n in range(25):
        assert sol.m0.coeffs[n] == motzkin_number(n)


def test_planar_m0_factorial_formula():
    sol = solve_series(PLANAR, 12, 30)
    for n in range(12):
        assert sol.m0.coeffs[n] == planar_map_count(n)


def test_constant_q_fixed_point():
    eq = parse_equation("M = 1 + u^2")
    sol = solve_series(eq, 4, 5)
    assert sol.m.rows[0] == [mpq(1), mpq(0), mpq(1), mpq(0), mpq(0)]
    assert all(c == 0 for row in sol.m.rows[1:] for c in row)


def test_simple_maps_m0_matches_closed_form():
    n = 20
    sol = solve_series(SIMPLE, n, 2 * n + 4)
    want = simple_map_series(n)
    assert sol.m0.coeffs[0] == want[0] - 1
    for i in range(1, n):
        assert sol.m0.coeffs[i] == want[i], i


def test_triangulation_grade0_row():
    sol = solve_series(TRIANG, 5, 12)
    assert all(c == 1 for c in sol.m.rows[0])
    assert sol.residual_ok


def test_non_well_founded_detection():
    for text in ("M = 1 + M*M", "M = 1 + 2*M", "M = 1 + D", "M = 1/4 + M^2"):
        with pytest.raises(NonWellFoundedError):
            solve_series(parse_equation(text), 4, 6)


def test_stability_under_order_growth():
    small = solve_series(PLANAR, 8, 20)
    big = solve_series(PLANAR, 12, 30)
    for n in range(8):
        for k in range(20):
            assert small.m.rows[n][k] == big.m.rows[n][k]


def test_positivity_of_positive_equations():
    for eq in (MOTZKIN, DYCK, PLANAR, TRIANG):
        sol = solve_series(eq, 15, 25)
        assert all(c >= 0 for row in sol.m.rows for c in row)


def test_eval_u1_planar():
    # row sums of the shifted planar solution give M(z,2): weighted maps
    sol = solve_series(PLANAR, 8, 24)
    u1 = eval_u1(sol)
    assert [int(c) for c in u1.coeffs[:4]] == [1, 6, 68, 942]


def test_eval_u1_unstable_for_unbounded_rows():
    sol = solve_series(TRIANG, 6, 12)
    with pytest.raises(TruncationUnstableError):
        eval_u1(sol)


def test_m0_certified_matches_plain_solve():
    m0 = m0_certified(MOTZKIN, 20)
    for n in range(20):
        assert m0.coeffs[n] == motzkin_number(n)


def test_u1_section_matches_grid_row_sums():
    n = 12
    sol = solve_series(PLANAR, n, 30)
    sect = u1_series(PLANAR, n, sol.m0)
    sums = eval_u1(sol)
    assert sect.coeffs == sums.coeffs


def test_u1_section_simple_maps_closed_form():
    n = 25
    m0 = solve_series(SIMPLE, n, 2 * n + 4).m0
    sect = u1_series(SIMPLE, n, m0)
    want = simple_map_series(n)
    # S(z,1) - 1 = section of the decremented equation... the section at u=1
    # of M = S(z, u+1) - 1 is S(z,2) - 1, so instead check m0 against the
    # closed form (S(z,1) - 1) and the section against the grid row sums.
    wide = solve_series(SIMPLE, n, 2 * n + 8)
    assert sect.coeffs == wide.m.row_sum_series().coeffs[:n]
    assert m0.coeffs[0] == want[0] - 1
    assert m0.coeffs[1:] == [mpq(w.numerator, w.denominator) for w in want[1:]]


def test_marked_solve_x_free_equation_is_constant_in_x():
    sol = solve_series_marked(MOTZKIN, 8, 12)
    for row in sol.m.rows:
        for c in row:
            assert isinstance(c, XPoly) and c.degree() <= 0


def test_marked_vertex_count_first_coefficients():
    eq = parse_equation("M = x + z*(u+1)^2*M^2 + z*(u+1)*M + z*(u+1)*D")
    sol = solve_series_marked(eq, 3, 10)
    # [z^0] M(z,x,0) = x (the vertex map), [z^1] = x + x^2:
    # the loop keeps one vertex, the bridge has two.
    assert sol.m0.coeffs[0] == XPoly([0, 1])
    assert sol.m0.coeffs[1] == XPoly([0, 1, 1])
    # setting x=1 reproduces the unmarked solve
    plain = solve_series(parse_equation(
        "M = 1 + z*(u+1)^2*M^2 + z*(u+1)*M + z*(u+1)*D"), 3, 10)
    for n in range(3):
        for k in range(10):
            assert sol.m.rows[n][k].at(mpq(1)) == plain.m.rows[n][k]


def test_marked_planar_z2_at_x1():
    eq = parse_equation("M = x + z*(u+1)^2*M^2 + z*(u+1)*M + z*(u+1)*D")
    sol = solve_series_marked(eq, 3, 10)
    assert sol.m0.coeffs[2].at(mpq(1)) == 9


def test_jet_ring_matches_xpoly_derivatives():
    eq = parse_equation("M = x + z*(u+1)^2*M^2 + z*(u+1)*M + z*(u+1)*D")
    solx = solve_series_marked(eq, 6, 16)
    solj = solve_series(eq, 6, 16, ring="jet")
    for n in range(6):
        px = solx.m0.coeffs[n]
        pj = solj.m0.coeffs[n]
        assert isinstance(pj, Jet)
        assert pj.value() == px.at(mpq(1))
        # derivative of the x-polynomial at 1
        dval = sum(k * c for k, c in enumerate(px.coeffs))
        assert pj.d1() == dval


def test_dyck_m0_is_interleaved_catalan():
    sol = solve_series(DYCK, 21, 25)
    for n in range(21):
        want = catalan(n // 2) if n % 2 == 0 else 0
        assert sol.m0.coeffs[n] == want
    # cross-check the Catalan generating series oracle itself
    cat = catalan_gf_series(10)
    assert [c for c in cat[:5]] == [1, 1, 2, 5, 14]


def test_default_u_order_scales_with_growth():
    assert default_u_order(PLANAR, 10) >= 2 * 10
    assert default_u_order(MOTZKIN, 10) >= 10
