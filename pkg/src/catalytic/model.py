"""Equation text format, data model, and classifier.

An input is a single functional equation for a bivariate series M(z,u),
written as `M = <expr>` over the tokens M, D, z, u, x with `+ - * ^`,
parentheses, integer and rational literals `p/q`, and `#` comments.
D stands for the divided difference (M(z,u) - M(z,0)) / u; equations
whose divided difference sits at another base point must be rewritten
with shift_u before being fed in.

Internally the right-hand side is one expanded MultiPoly with a0 in
place of M and a1 in place of D. Two shapes are distinguished:

- BMJ: every monomial touching a0 or a1 carries a factor z, so the
  equation is M = F0(u,x) + z*Q(M, D, z, u, x).
- GENERALIZED: some a0/a1 monomial has no z factor; the right side is
  kept whole as R(M, D, z, u, x).
"""

from gmpy2 import mpq

from .errors import AnalysisError, NotApplicableError, ParseError
from .poly import MultiPoly

FORM_BMJ = "BMJ"
FORM_GENERALIZED = "GENERALIZED"

LINEAR_DEGENERATE_1 = "LINEAR_DEGENERATE_1"
LINEAR_DEGENERATE_2 = "LINEAR_DEGENERATE_2"
LINEAR_DEGENERATE_3 = "LINEAR_DEGENERATE_3"
LINEAR_GENERIC = "LINEAR_GENERIC"
NONLINEAR_DEGENERATE = "NONLINEAR_DEGENERATE"
NONLINEAR_GENERIC = "NONLINEAR_GENERIC"
GENERIC_MODE = "GENERIC_MODE"


# ---------------------------------------------------------------------------
# lexer / parser

_VAR_TOKENS = {"M", "D", "z", "u", "x"}


class _Token:
    __slots__ = ("kind", "text", "line", "col")

    def __init__(self, kind, text, line, col):
        self.kind = kind
        self.text = text
        self.line = line
        self.col = col


def _tokenize(text):
    toks = []
    line, col = 1, 1
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch == "#":
            while i < n and text[i] != "\n":
                i += 1
            continue
        if ch == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        if ch.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            if j < n and text[j] == "/" and j + 1 < n and text[j + 1].isdigit():
                j += 1
                while j < n and text[j].isdigit():
                    j += 1
            toks.append(_Token("number", text[i:j], line, col))
            col += j - i
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            name = text[i:j]
            if name not in _VAR_TOKENS:
                raise ParseError(
                    f"unknown name {name!r}; allowed are M, D, z, u, x",
                    line=line, col=col)
            toks.append(_Token("name", name, line, col))
            col += j - i
            i = j
            continue
        if ch in "+-*^()=":
            toks.append(_Token(ch, ch, line, col))
            i += 1
            col += 1
            continue
        raise ParseError(f"unexpected character {ch!r}", line=line, col=col)
    toks.append(_Token("eof", "", line, col))
    return toks


class _Parser:
    def __init__(self, toks):
        self.toks = toks
        self.pos = 0

    def peek(self):
        return self.toks[self.pos]

    def next(self):
        t = self.toks[self.pos]
        self.pos += 1
        return t

    def expect(self, kind, what):
        t = self.peek()
        if t.kind != kind:
            raise ParseError(f"expected {what}, found {t.text or 'end of input'!r}",
                             line=t.line, col=t.col)
        return self.next()

    def parse_equation(self):
        head = self.expect("name", "'M' on the left-hand side")
        if head.text != "M":
            raise ParseError("left-hand side must be the single symbol M",
                             line=head.line, col=head.col)
        self.expect("=", "'='")
        rhs = self.parse_expr()
        t = self.peek()
        if t.kind != "eof":
            raise ParseError(f"unexpected trailing input {t.text!r}",
                             line=t.line, col=t.col)
        return rhs

    def parse_expr(self):
        acc = self.parse_term()
        while self.peek().kind in ("+", "-"):
            op = self.next()
            term = self.parse_term()
            acc = acc + term if op.kind == "+" else acc - term
        return acc

    def parse_term(self):
        sign = 1
        while self.peek().kind in ("+", "-"):
            if self.next().kind == "-":
                sign = -sign
        acc = self.parse_factor()
        while self.peek().kind == "*":
            self.next()
            acc = acc * self.parse_factor()
        return acc * sign if sign < 0 else acc

    def parse_factor(self):
        base = self.parse_atom()
        if self.peek().kind == "^":
            caret = self.next()
            t = self.peek()
            if t.kind == "-":
                raise ParseError("negative exponents are not allowed",
                                 line=t.line, col=t.col)
            num = self.expect("number", "an integer exponent")
            if "/" in num.text:
                raise ParseError(f"exponent must be an integer, got {num.text}",
                                 line=num.line, col=num.col)
            _ = caret
            base = base ** int(num.text)
        return base

    def parse_atom(self):
        t = self.peek()
        if t.kind == "number":
            self.next()
            if "/" in t.text:
                p, q = t.text.split("/")
                if int(q) == 0:
                    raise ParseError("zero denominator in rational literal",
                                     line=t.line, col=t.col)
                return MultiPoly.const(mpq(int(p), int(q)))
            return MultiPoly.const(int(t.text))
        if t.kind == "name":
            self.next()
            slot = {"M": "a0", "D": "a1", "z": "z", "u": "u", "x": "x"}[t.text]
            return MultiPoly.var(slot)
        if t.kind == "(":
            self.next()
            inner = self.parse_expr()
            self.expect(")", "')'")
            return inner
        if t.kind == "-":
            self.next()
            return -self.parse_factor()
        raise ParseError(f"expected a value, found {t.text or 'end of input'!r}",
                         line=t.line, col=t.col)


# ---------------------------------------------------------------------------
# equation record


class CatalyticEquation:
    """Parsed and expanded equation with recomputed shape flags.

    Fields: rhs (the full right-hand side), f0 (the z-free, M/D-free
    part, a polynomial in u and x), q (for BMJ the polynomial Q with the
    z factor divided out; for GENERALIZED the whole right side R), form,
    positive, linear, and the hypothesis record used by the singular
    analysis.
    """

    def __init__(self, rhs):
        self.rhs = rhs
        alpha_no_z = rhs.filter_terms(
            lambda e: (e[0] > 0 or e[1] > 0) and e[2] == 0)
        self.form = FORM_GENERALIZED if alpha_no_z else FORM_BMJ
        self.f0 = rhs.filter_terms(
            lambda e: e[0] == 0 and e[1] == 0 and e[2] == 0)
        if self.form == FORM_BMJ:
            self.q = (rhs - self.f0).divide_z()
        else:
            self.q = rhs
        self.positive = rhs.min_coefficient() >= 0
        self.linear = rhs.total_alpha_degree() <= 1
        self.hypotheses = self._hypotheses()

    def _hypotheses(self):
        q = self.q
        f0 = self.f0
        f0_at_0 = f0.eval_point({"u": mpq(0), "x": mpq(1)}) if f0 else mpq(0)
        q_a1 = q.partial("a1")
        try:
            q_a1_origin = q_a1.eval_point(
                {"a0": f0_at_0, "a1": mpq(0), "z": mpq(0), "u": mpq(0), "x": mpq(1)})
        except AnalysisError:
            q_a1_origin = mpq(0)
        f0_prime = f0.partial("u")
        f0_prime_0 = (f0_prime.eval_point({"u": mpq(0), "x": mpq(1)})
                      if f0_prime else mpq(0))
        return {
            "q_a1_nonzero": not q_a1.is_zero(),
            "q_a0u_nonzero": not q.partial("a0").partial("u").is_zero(),
            "nonlinear": self.rhs.total_alpha_degree() >= 2,
            "f0_prime_at_0_zero": f0_prime_0 == 0,
            "q_a1_at_origin_nonzero": q_a1_origin != 0,
        }

    def x_marked(self):
        return self.rhs.has_var("x")

    def to_dsl(self):
        return f"M = {self.rhs.to_dsl()}"

    def __repr__(self):
        return f"CatalyticEquation({self.to_dsl()!r}, form={self.form})"


def parse_equation(text):
    """Parse equation text into a CatalyticEquation.

    Errors carry line/col positions in their diagnostics.
    """
    rhs = _Parser(_tokenize(text)).parse_equation()
    return CatalyticEquation(rhs)


def partial(p, var):
    """Formal partial derivative of a MultiPoly; var in {a0,a1,z,u,x}."""
    return p.partial(var)


# ---------------------------------------------------------------------------
# classification


class LinearDecomposition:
    """Q0 + z*M*Q1 + z*D*Q2 split of a linear BMJ equation."""

    def __init__(self, q0, q1, q2):
        self.q0 = q0
        self.q1 = q1
        self.q2 = q2

    def __repr__(self):
        return (f"LinearDecomposition(q0={self.q0.to_dsl()}, "
                f"q1={self.q1.to_dsl()}, q2={self.q2.to_dsl()})")


class Classification:
    """Label plus the evidence that produced it."""

    def __init__(self, label, hypotheses, decomposition=None, detail=None):
        self.label = label
        self.hypotheses = hypotheses
        self.decomposition = decomposition
        self.detail = detail

    def __repr__(self):
        extra = f", detail={self.detail}" if self.detail else ""
        return f"Classification({self.label}{extra})"


def linear_decomposition(eq):
    """Split a linear BMJ equation per Q0 + z*M*Q1 + z*D*Q2."""
    if not eq.linear or eq.form != FORM_BMJ:
        raise NotApplicableError("linear decomposition needs a linear equation "
                                 "with every M/D monomial carrying a z factor")
    rhs = eq.rhs
    q0 = rhs.filter_terms(lambda e: e[0] == 0 and e[1] == 0)
    q1 = rhs.coefficient_in("a0", 1).divide_z()
    q2 = rhs.coefficient_in("a1", 1).divide_z()
    return LinearDecomposition(q0, q1, q2)


def classify(eq):
    """Classify an equation for routing to the analyzers.

    Order of tests: non-positive coefficients first (GENERIC_MODE), then
    the linear kernel-method classes with their three degenerate shapes,
    then the nonlinear classes with the three degenerate reductions.
    GENERALIZED equations always route to the nonlinear system machinery.
    """
    hyp = dict(eq.hypotheses)
    if not eq.positive:
        return Classification(GENERIC_MODE, hyp)
    if eq.linear and eq.form == FORM_BMJ:
        dec = linear_decomposition(eq)
        q0_u_free = not dec.q0.has_var("u")
        q1_u_free = not dec.q1.has_var("u")
        if q0_u_free and q1_u_free:
            return Classification(LINEAR_DEGENERATE_1, hyp, dec)
        if q1_u_free and dec.q2.degree("u") <= 1:
            return Classification(LINEAR_DEGENERATE_2, hyp, dec)
        if dec.q2.coefficient_in("u", 0).is_zero():
            return Classification(LINEAR_DEGENERATE_3, hyp, dec)
        return Classification(LINEAR_GENERIC, hyp, dec)
    if eq.form == FORM_BMJ:
        q, f0 = eq.q, eq.f0
        if q.partial("u").is_zero() and f0.partial("u").is_zero():
            return Classification(NONLINEAR_DEGENERATE, hyp, detail="flat_u")
        if q.partial("u").is_zero() and q.partial("a0").is_zero():
            return Classification(NONLINEAR_DEGENERATE, hyp, detail="difference_only")
        if q.partial("a1").is_zero():
            return Classification(NONLINEAR_DEGENERATE, hyp, detail="no_difference")
    return Classification(NONLINEAR_GENERIC, hyp)


# ---------------------------------------------------------------------------
# the three-function fixed-point system and its dependency digraph


def build_symbolic_system(eq):
    """Right-hand sides of the singular system as polynomials.

    Unknowns map to slots: f -> a0, w -> a1, u -> u; z stays z and x
    stays x. The equations are
        f = R(f, w, z, u),
        u = u * R_a0 + R_a1,
        w = R_u + w * R_a0,
    with R the whole right-hand side of the input equation.
    """
    r = eq.rhs
    r_a0 = r.partial("a0")
    r_a1 = r.partial("a1")
    r_u = r.partial("u")
    u = MultiPoly.var("u")
    w = MultiPoly.var("a1")
    return {
        "f": r,
        "u": u * r_a0 + r_a1,
        "w": r_u + w * r_a0,
    }


def dependency_digraph(eq):
    """Edges X -> Y when the Y equation of the system references X.

    Returns (edges, strongly_connected). Only meaningful for nonlinear
    equations; linear ones raise.
    """
    if eq.linear:
        raise NotApplicableError("dependency digraph applies to nonlinear equations")
    system = build_symbolic_system(eq)
    slot = {"f": "a0", "w": "a1", "u": "u"}
    nodes = ("f", "u", "w")
    edges = []
    for target, rhs in system.items():
        for source in nodes:
            if rhs.has_var(slot[source]):
                edges.append((source, target))
    return edges, _strongly_connected(nodes, edges)


def _strongly_connected(nodes, edges):
    """Single strongly connected component check (Tarjan's algorithm)."""
    adj = {n: [] for n in nodes}
    for a, b in edges:
        if a != b:
            adj[a].append(b)
    index = {}
    low = {}
    on_stack = set()
    stack = []
    sccs = []
    counter = [0]

    def visit(v):
        index[v] = low[v] = counter[0]
        counter[0] += 1
        stack.append(v)
        on_stack.add(v)
        for wv in adj[v]:
            if wv not in index:
                visit(wv)
                low[v] = min(low[v], low[wv])
            elif wv in on_stack:
                low[v] = min(low[v], index[wv])
        if low[v] == index[v]:
            comp = []
            while True:
                n = stack.pop()
                on_stack.discard(n)
                comp.append(n)
                if n == v:
                    break
            sccs.append(comp)

    for n in nodes:
        if n not in index:
            visit(n)
    return len(sccs) == 1 and len(sccs[0]) == len(nodes)
