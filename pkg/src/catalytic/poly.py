"""Sparse exact polynomials in (a0, a1, z, u, x).

a0 stands for the unknown bivariate function and a1 for its divided
difference with respect to u at 0; z, u are the intrinsic variables and
x an optional marking variable. Exponent vectors are 5-tuples keyed in
that order; coefficients are exact rationals and zero coefficients are
never stored.
"""

from gmpy2 import mpq

from .errors import AnalysisError

VARS = ("a0", "a1", "z", "u", "x")
_IDX = {name: i for i, name in enumerate(VARS)}


def _as_rat(c):
    if isinstance(c, mpq) or isinstance(c, int):
        return mpq(c)
    raise AnalysisError(f"polynomial coefficients must be rational, got {type(c).__name__}")


class MultiPoly:
    """Polynomial with rational coefficients over the five fixed variables."""

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        clean = {}
        if terms:
            for expo, c in terms.items():
                c = _as_rat(c)
                if c != 0:
                    clean[tuple(expo)] = c
        self.terms = clean

    @classmethod
    def zero(cls):
        return cls()

    @classmethod
    def const(cls, c):
        return cls({(0, 0, 0, 0, 0): mpq(c)})

    @classmethod
    def var(cls, name):
        expo = [0] * 5
        expo[_IDX[name]] = 1
        return cls({tuple(expo): mpq(1)})

    @classmethod
    def monomial(cls, coeff, a0=0, a1=0, z=0, u=0, x=0):
        return cls({(a0, a1, z, u, x): mpq(coeff)})

    def is_zero(self):
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def __eq__(self, other):
        return isinstance(other, MultiPoly) and self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __add__(self, other):
        if not isinstance(other, MultiPoly):
            other = MultiPoly.const(other)
        out = dict(self.terms)
        for expo, c in other.terms.items():
            s = out.get(expo, mpq(0)) + c
            if s == 0:
                out.pop(expo, None)
            else:
                out[expo] = s
        res = MultiPoly.__new__(MultiPoly)
        res.terms = out
        return res

    __radd__ = __add__

    def __neg__(self):
        res = MultiPoly.__new__(MultiPoly)
        res.terms = {expo: -c for expo, c in self.terms.items()}
        return res

    def __sub__(self, other):
        if not isinstance(other, MultiPoly):
            other = MultiPoly.const(other)
        return self + (-other)

    def __rsub__(self, other):
        return MultiPoly.const(other) + (-self)

    def __mul__(self, other):
        if not isinstance(other, MultiPoly):
            c = mpq(other)
            if c == 0:
                return MultiPoly.zero()
            res = MultiPoly.__new__(MultiPoly)
            res.terms = {expo: v * c for expo, v in self.terms.items()}
            return res
        out = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                expo = (e1[0] + e2[0], e1[1] + e2[1], e1[2] + e2[2],
                        e1[3] + e2[3], e1[4] + e2[4])
                s = out.get(expo, mpq(0)) + c1 * c2
                if s == 0:
                    out.pop(expo, None)
                else:
                    out[expo] = s
        res = MultiPoly.__new__(MultiPoly)
        res.terms = out
        return res

    __rmul__ = __mul__

    def __pow__(self, k):
        if not isinstance(k, int) or k < 0:
            raise AnalysisError(f"polynomial powers must be nonnegative integers, got {k}")
        res = MultiPoly.const(1)
        base = self
        while k:
            if k & 1:
                res = res * base
            base = base * base
            k >>= 1
        return res

    def partial(self, name):
        """Partial derivative with respect to one variable."""
        i = _IDX[name]
        out = {}
        for expo, c in self.terms.items():
            e = expo[i]
            if e == 0:
                continue
            nexpo = expo[:i] + (e - 1,) + expo[i + 1:]
            out[nexpo] = out.get(nexpo, mpq(0)) + c * e
        res = MultiPoly.__new__(MultiPoly)
        res.terms = {k: v for k, v in out.items() if v != 0}
        return res

    def degree(self, name):
        i = _IDX[name]
        return max((expo[i] for expo in self.terms), default=0)

    def total_alpha_degree(self):
        return max((expo[0] + expo[1] for expo in self.terms), default=0)

    def has_var(self, name):
        i = _IDX[name]
        return any(expo[i] > 0 for expo in self.terms)

    def coefficient_in(self, name, k):
        """The cofactor polynomial of name^k (that variable removed)."""
        i = _IDX[name]
        out = {}
        for expo, c in self.terms.items():
            if expo[i] == k:
                out[expo[:i] + (0,) + expo[i + 1:]] = c
        res = MultiPoly.__new__(MultiPoly)
        res.terms = out
        return res

    def filter_terms(self, keep):
        """Subpolynomial of the terms whose exponent tuple passes `keep`."""
        res = MultiPoly.__new__(MultiPoly)
        res.terms = {expo: c for expo, c in self.terms.items() if keep(expo)}
        return res

    def divide_z(self):
        """Divide by z; every term must carry a z factor."""
        out = {}
        for expo, c in self.terms.items():
            if expo[2] == 0:
                raise AnalysisError("polynomial is not divisible by z")
            out[expo[:2] + (expo[2] - 1,) + expo[3:]] = c
        res = MultiPoly.__new__(MultiPoly)
        res.terms = out
        return res

    def shift_u(self, c):
        """Substitute u <- u + c exactly by binomial expansion."""
        c = mpq(c)
        if c == 0:
            return self
        d = self.degree("u")
        binom = [[mpq(0)] * (d + 1) for _ in range(d + 1)]
        for k in range(d + 1):
            binom[k][0] = mpq(1)
            for j in range(1, k + 1):
                binom[k][j] = binom[k - 1][j - 1] + (binom[k - 1][j] if j <= k - 1 else 0)
        powc = [mpq(1)]
        for _ in range(d):
            powc.append(powc[-1] * c)
        out = {}
        for expo, coeff in self.terms.items():
            k = expo[3]
            for j in range(k + 1):
                nexpo = expo[:3] + (j,) + expo[4:]
                s = out.get(nexpo, mpq(0)) + coeff * binom[k][j] * powc[k - j]
                if s == 0:
                    out.pop(nexpo, None)
                else:
                    out[nexpo] = s
        res = MultiPoly.__new__(MultiPoly)
        res.terms = out
        return res

    def eval_point(self, vals):
        """Evaluate at a point given as {var: value}; values form any ring.

        Variables that actually occur must all be supplied. Powers are
        cached per variable so repeated Newton evaluations stay cheap.
        """
        caches = {}
        for name in VARS:
            if self.has_var(name):
                if name not in vals:
                    raise AnalysisError(f"missing value for variable {name}")
                caches[name] = [1, vals[name]]
        total = 0
        for expo, c in self.terms.items():
            term = c
            for i, e in enumerate(expo):
                if e == 0:
                    continue
                cache = caches[VARS[i]]
                while len(cache) <= e:
                    cache.append(cache[-1] * cache[1])
                term = term * cache[e]
            total = total + term
        return total

    def min_coefficient(self):
        return min(self.terms.values(), default=mpq(0))

    def sorted_terms(self):
        return sorted(self.terms.items())

    def to_dsl(self):
        """Render in the equation syntax (M for a0, D for a1)."""
        if not self.terms:
            return "0"
        names = ("M", "D", "z", "u", "x")
        parts = []
        for expo, c in self.sorted_terms():
            factors = []
            for i, e in enumerate(expo):
                if e == 1:
                    factors.append(names[i])
                elif e > 1:
                    factors.append(f"{names[i]}^{e}")
            mag = abs(c)
            if mag != 1 or not factors:
                factors.insert(0, str(mag))
            mono = "*".join(factors)
            parts.append(("-" if c < 0 else "+", mono))
        first_sign, first = parts[0]
        text = (first_sign if first_sign == "-" else "") + first
        for sign, mono in parts[1:]:
            text += f" {sign} {mono}"
        return text

    def __repr__(self):
        return f"MultiPoly({self.to_dsl()})"
