import pytest
from gmpy2 import mpq

from catalytic.errors import NotApplicableError, ParseError
from catalytic.model import (
    FORM_BMJ,
    FORM_GENERALIZED,
    CatalyticEquation,
    build_symbolic_system,
    classify,
    dependency_digraph,
    linear_decomposition,
    parse_equation,
)
from catalytic.poly import MultiPoly

MOTZKIN = "M = 1 + z*(u+1)*M + z*D"
PLANAR = "M = 1 + z*(u+1)^2*M^2 + z*(u+1)*M + z*(u+1)*D"
SIMPLE = ("M = z*(u+1)^2*(M+1)^2 + z*(u+1)*(M+D+1)"
          " - z*(u+1)*(M+1)*(M-u*D+1) - M*(M-u*D)")


def test_parse_motzkin_shape():
    eq = parse_equation(MOTZKIN)
    assert eq.form == FORM_BMJ and eq.linear and eq.positive
    dec = linear_decomposition(eq)
    assert dec.q0 == MultiPoly.const(1)
    assert dec.q1 == MultiPoly.var("u") + 1
    assert dec.q2 == MultiPoly.const(1)


def test_parse_planar_q():
    eq = parse_equation(PLANAR)
    u1 = MultiPoly.var("u") + 1
    want = (u1 ** 2 * MultiPoly.var("a0") ** 2 + u1 * MultiPoly.var("a0")
            + u1 * MultiPoly.var("a1"))
    assert eq.form == FORM_BMJ
    assert eq.f0 == MultiPoly.const(1)
    assert eq.q == want
    assert all(eq.hypotheses[k] for k in
               ("q_a1_nonzero", "q_a0u_nonzero", "nonlinear",
                "f0_prime_at_0_zero", "q_a1_at_origin_nonzero"))


def test_parse_rational_literals_and_comments():
    eq = parse_equation("# a comment\nM = 1/2 + z*M  # trailing\n")
    assert eq.f0 == MultiPoly.const(mpq(1, 2))


def test_parse_error_positions():
    with pytest.raises(ParseError) as exc:
        parse_equation("M = 1 + y")
    assert exc.value.diagnostics["col"] == 9
    with pytest.raises(ParseError):
        parse_equation("M = z^(2)")
    with pytest.raises(ParseError):
        parse_equation("M = z^1/2")
    with pytest.raises(ParseError):
        parse_equation("N = 1")
    with pytest.raises(ParseError):
        parse_equation("M = 2z")
    with pytest.raises(ParseError):
        parse_equation("M = ")


def test_constant_equation():
    eq = parse_equation("M = 1")
    assert eq.form == FORM_BMJ and eq.q.is_zero()


def test_generalized_detection():
    eq = parse_equation("M = 1 + u*M + z*(1+M)*D")
    assert eq.form == FORM_GENERALIZED
    assert eq.q == eq.rhs


def test_classification_table():
    cases = {
        MOTZKIN: "LINEAR_GENERIC",
        "M = 1 + z*u*M + z*D": "LINEAR_GENERIC",           # up/down walk
        "M = u + z^2*M + z*D": "LINEAR_DEGENERATE_2",
        "M = 1 + z*z*M + z*(u+1)*D": "LINEAR_DEGENERATE_1",
        "M = 1 + z*(z+u)*M + z*u*D": "LINEAR_DEGENERATE_3",
        PLANAR: "NONLINEAR_GENERIC",
        "M = 1 + z*(M^2 + D)": "NONLINEAR_DEGENERATE",
        "M = u^2 + z*(D^2*z + D)": "NONLINEAR_DEGENERATE",
        "M = 1 + z*M^2": "NONLINEAR_DEGENERATE",
        SIMPLE: "GENERIC_MODE",
    }
    for text, want in cases.items():
        assert classify(parse_equation(text)).label == want, text


def test_nonlinear_degenerate_details():
    assert classify(parse_equation("M = 1 + z*(M^2 + D)")).detail == "flat_u"
    assert classify(parse_equation("M = u^2 + z*(D^2*z + D)")).detail == "difference_only"
    # the first bullet takes precedence when several apply
    assert classify(parse_equation("M = 1 + z*M^2")).detail == "flat_u"
    assert classify(parse_equation("M = 1 + z*u*M^2")).detail == "no_difference"


def test_roundtrip_print_parse():
    for text in (MOTZKIN, PLANAR, SIMPLE,
                 "M = u^3 + z^2*M + z*D",
                 "M = 1 + u*M + z*(1+M)*D",
                 "M = z^2*(u+1) + z*(u+1)*M + (u+1)*(z+M)*D",
                 "M = x + z*(u+1)^2*M^2 + z*(u+1)*M + z*(u+1)*D",
                 "M = 1/3 - 2/7*z*M + z*D"):
        eq = parse_equation(text)
        again = parse_equation(eq.to_dsl())
        assert again.rhs == eq.rhs, text


def test_positivity_preserved_by_shift():
    eq = parse_equation(PLANAR)
    shifted = CatalyticEquation(eq.rhs.shift_u(mpq(1)))
    assert shifted.positive


def test_dependency_digraph_planar_cycle():
    eq = parse_equation(PLANAR)
    edges, strong = dependency_digraph(eq)
    assert strong
    assert ("w", "f") in edges and ("f", "u") in edges and ("u", "w") in edges


def test_dependency_digraph_negative_control():
    # Q = a1^2 z has Q_a0u = 0; only w -> f and w -> u edges appear
    eq = parse_equation("M = 1 + z*D^2")
    edges, strong = dependency_digraph(eq)
    assert not strong
    assert ("w", "f") in edges and ("w", "u") in edges


def test_dependency_digraph_linear_rejected():
    with pytest.raises(NotApplicableError):
        dependency_digraph(parse_equation(MOTZKIN))


def test_symbolic_system_bmj_shape():
    # for M = F0 + z Q: rhs_u = z u Q_a0 + z Q_a1, rhs_w = F0' + z Q_u + w z Q_a0
    eq = parse_equation(PLANAR)
    sys = build_symbolic_system(eq)
    z, u, w = MultiPoly.var("z"), MultiPoly.var("u"), MultiPoly.var("a1")
    q = eq.q
    assert sys["u"] == u * z * q.partial("a0") + z * q.partial("a1")
    want_w = eq.f0.partial("u") + z * q.partial("u") + w * z * q.partial("a0")
    assert sys["w"] == want_w
