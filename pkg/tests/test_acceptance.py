"""End-to-end acceptance gate.

One test per numbered criterion.  Each appends a single pass/fail line
to RESULTS, which conftest echoes after the run, and states its
tolerances inline.  Expected values come from tests/oracles.py or from
closed forms written out here; nothing is read back from the package.
"""

import time
from contextlib import contextmanager
from math import comb

import gmpy2
import pytest
from gmpy2 import mpfr, mpq

from catalytic import corpus
from catalytic.clt import clt, rho_of_x
from catalytic.engine import solve_series
from catalytic.linear import (empirical_radius, kernel_identity_check,
                              kernel_solve, linear_asymptotics)
from catalytic.model import classify, linear_decomposition, parse_equation
from catalytic.nonlinear import (_float_series, critical_point, derive_system,
                                 nonlinear_asymptotics, puiseux_expansion,
                                 system_m0, system_series)
from catalytic.numeric import precision
from catalytic.poly import MultiPoly
from oracles import (motzkin_number, planar_map_count, simple_map_series)

RESULTS = []


@contextmanager
def criterion(num, desc):
    try:
        yield
    except BaseException:
        RESULTS.append(f"criterion {num}: FAIL  {desc}")
        raise
    RESULTS.append(f"criterion {num}: PASS  {desc}")


def eq(name):
    return parse_equation(corpus.load(name).text)


def dec(name):
    return linear_decomposition(eq(name))


def test_criterion_1_exact_coefficients():
    with criterion(1, "exact coefficients match closed forms, n <= 50"):
        t0 = time.time()
        got = solve_series(eq("planar-maps"), 51).m0.coeffs
        assert [int(c) for c in got] == [planar_map_count(n)
                                         for n in range(51)]
        got = solve_series(eq("motzkin"), 51).m0.coeffs
        assert [int(c) for c in got] == [motzkin_number(n) for n in range(51)]
        got = solve_series(eq("simple-maps"), 51).m0.coeffs
        closed = [mpq(f.numerator, f.denominator)
                  for f in simple_map_series(51)]
        # the corpus entry drops the edgeless map
        assert got[0] == closed[0] - 1
        assert all(got[n] == closed[n] for n in range(1, 51))
        assert time.time() - t0 < 30


def test_criterion_2_linear_singular_analysis():
    with criterion(2, "Motzkin and Dyck singular analysis, n_fit = 5000"):
        t0 = time.time()
        data = linear_asymptotics(dec("motzkin"), 5000, 256)
        with precision(256):
            rt3 = gmpy2.sqrt(mpfr(3))
            assert abs(data.z0 - mpq(1, 3)) <= mpfr("1e-20")
            assert abs(data.u0 - 1) <= mpfr("1e-20")
            assert abs(data.puiseux[0] - 3) <= mpfr("1e-8")
            assert abs(data.puiseux[1] + 3 * rt3) <= mpfr("1e-8")
            cref = 3 * rt3 / (2 * gmpy2.sqrt(gmpy2.const_pi()))
            assert abs(data.constants[0] / cref - 1) <= mpfr("0.005")
        data = linear_asymptotics(dec("dyck"), 5000, 256)
        assert data.b == 2 and data.residues == [0]
        with precision(256):
            cref = 2 * gmpy2.sqrt(mpfr(2)) / gmpy2.sqrt(gmpy2.const_pi())
            assert abs(data.constants[0] / cref - 1) <= mpfr("0.01")
        assert time.time() - t0 < 60


def test_criterion_3_planar_pipeline():
    with criterion(3, "planar map pipeline end to end"):
        t0 = time.time()
        e = eq("planar-maps")
        sys_ = derive_system(e)
        cp = critical_point(sys_)
        pe = puiseux_expansion(sys_, cp)
        with precision(512):
            assert abs(cp.z0 - mpq(1, 12)) <= mpfr("1e-20")
            assert abs(pe.a0 - mpq(4, 3)) <= mpfr("1e-8")
            assert abs(pe.a2 + mpq(4, 3)) <= mpfr("1e-8")
            assert abs(pe.a3 - mpq(8, 3)) <= mpfr("1e-8")
            assert pe.y1_residual <= mpfr("1e-6") * pe.a3
        af = nonlinear_asymptotics(e, cp, pe, 1200, 256)
        assert af.exponent == mpq(-5, 2)
        with precision(256):
            cref = 2 / gmpy2.sqrt(gmpy2.const_pi())
            assert abs(af.constants[0] / cref - 1) <= mpfr("0.001")
            assert af.transfer_gap <= mpfr("1e-3")
        assert time.time() - t0 < 120


def test_criterion_4_engine_system_agreement():
    with criterion(4, "f - w*u equals M(z,0) exactly, n = 30"):
        for name in ("planar-maps", "bipartite-v", "two-connected",
                     "triangulations-tilde"):
            e = eq(name)
            f, w, u = system_series(derive_system(e), 30)
            # system_series runs through z^30 inclusive, so 31 coefficients
            m0 = solve_series(e, 31).m0.coeffs
            assert system_m0(f, w, u) == list(m0), name


def test_criterion_5_certificates_all_positive_nonlinear():
    with criterion(5, "det and Perron certificates at 256 bits"):
        covered = []
        for name in corpus.list_entries():
            e = parse_equation(corpus.load(name).text)
            if classify(e).label != "NONLINEAR_GENERIC" or not e.positive:
                continue
            cp = critical_point(derive_system(e), 256)
            with precision(256):
                assert abs(cp.det_residual) <= mpfr("1e-30"), name
                assert abs(cp.perron_root - 1) <= mpfr("1e-20"), name
            covered.append(name)
        assert covered == ["bipartite-v", "planar-maps",
                           "planar-maps-vertices", "triangulations-tilde",
                           "two-connected"]


def quartic(x, z):
    return (768*x**4*z**4 - 1536*x**3*z**4 - 512*x**3*z**3 + 2304*x**2*z**4
            + 768*x**2*z**3 - 1536*x*z**4 + 96*x**2*z**2 + 768*x*z**3
            + 768*z**4 - 96*x*z**2 - 512*z**3 + 96*z**2 - 1)


def test_criterion_6_vertex_limit_law():
    with criterion(6, "vertex-count limit law and critical curve"):
        t0 = time.time()
        e = eq("planar-maps-vertices")
        rep = clt(e, moment_point="u0")
        with precision(256):
            assert abs(rep.rho1 - mpq(1, 12)) <= mpfr("1e-8")
            assert abs(rep.rho_d1 + mpq(1, 24)) <= mpfr("1e-8")
            assert abs(rep.rho_d2 - mpq(19, 384)) <= mpfr("1e-8")
            assert abs(rep.mu - mpq(1, 2)) <= mpfr("1e-8")
            assert abs(rep.sigma2 - mpq(5, 32)) <= mpfr("1e-8")
        assert rep.clt_applicable
        assert [n for n, _, _ in rep.empirical] == list(range(1, 31))
        for n, mean, _ in rep.empirical:
            assert mean == mpq(n, 2) + 1, n
        for xv in ("0.9", "1.1"):
            with precision(256):
                x = mpfr(xv)
                z = rho_of_x(e, x).z0
                assert abs(quartic(x, z)) <= mpfr("1e-12"), xv
        assert time.time() - t0 < 120


def test_criterion_7_lattice_rational_forms():
    with criterion(7, "lattice walk rational forms, coefficients to n = 99"):
        z = MultiPoly.var("z")
        one = MultiPoly.const(1)
        for k0 in (1, 2, 3):
            sol = kernel_solve(dec(f"lattice-deg-2-k{k0}"), 100)
            num, den = sol.rational_form
            zpow = one
            for _ in range(k0):
                zpow = zpow * z
            dpow = one
            for _ in range(k0 + 1):
                dpow = dpow * (one - z * z)
            assert num == zpow and den == dpow, k0
            for n in range(100):
                if n >= k0 and (n - k0) % 2 == 0:
                    want = comb((n - k0) // 2 + k0, k0)
                else:
                    want = 0
                assert sol.m0_formula[n] == want, (k0, n)
        sol = kernel_solve(dec("lattice-deg-3"), 100)
        num, den = sol.rational_form
        assert num == one and den == one - z * z
        for n in range(100):
            assert sol.m0_formula[n] == (1 if n % 2 == 0 else 0), n


def test_criterion_8_negative_coefficient_branch():
    with criterion(8, "branch hint under negative coefficients"):
        e = eq("simple-maps")
        sys_ = derive_system(e)
        with pytest.warns(UserWarning, match="negative coefficients"):
            cp = critical_point(sys_, 256, expect_z0="0.125")
        with precision(256):
            assert abs(cp.z0 - mpq(1, 8)) <= mpfr("1e-10")
        assert cp.mode == "generic" and cp.perron_root is None
        pe = puiseux_expansion(sys_, cp)
        af = nonlinear_asymptotics(e, cp, pe, 1200, 256)
        assert af.singular_exponent == mpq(3, 2)
        assert af.exponent == mpq(-5, 2)


def test_criterion_9_property_suites():
    with criterion(9, "positivity, kernel identity, monotone curve, "
                      "truncation stability"):
        # coefficient positivity through n = 60, every positive entry
        for name in corpus.list_entries():
            entry = corpus.load(name)
            e = parse_equation(entry.text)
            if not e.positive:
                continue
            ring = "xpoly" if entry.kind == "marked" else "rat"
            sol = solve_series(e, 61, ring=ring)
            for row in sol.m.rows:
                for c in row:
                    if ring == "xpoly":
                        assert all(q >= 0 for q in c.coeffs), name
                    else:
                        assert c >= 0, name
        # kernel identity through n = 40, every linear entry
        for name in ("motzkin", "dyck", "lattice-deg-2-k1",
                     "lattice-deg-2-k2", "lattice-deg-2-k3", "lattice-deg-3"):
            d = dec(name)
            assert kernel_identity_check(d, kernel_solve(d, 40), 40), name
        # critical curve strictly decreasing on a sampled grid
        e = eq("planar-maps-vertices")
        grid = []
        with precision(256):
            for xv in ("0.8", "0.9", "1.0", "1.1", "1.2"):
                grid.append(rho_of_x(e, mpfr(xv)).z0)
        assert all(a > b for a, b in zip(grid, grid[1:]))
        # radius estimates tighten as the truncation grows
        sys_ = derive_system(eq("planar-maps"))
        errs = []
        with precision(256):
            for n in (200, 400, 800):
                _, _, _, m0f = _float_series(sys_, n, 256)
                r = empirical_radius(m0f, 1, 0, n // 2, n, 256)
                errs.append(abs(r - mpq(1, 12)))
            assert errs[2] < errs[1] < errs[0]
            assert errs[2] * 12 <= mpfr("1e-3")
