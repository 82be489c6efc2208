"""Coefficient rings for marked solves.

The series and engine code only ever uses ring arithmetic, so swapping
the rational coefficients for one of these turns a plain solve into a
marked one:

- XPoly: dense polynomial in the marking variable x, exact. One solve
  yields every [x^k z^n u^j] coefficient.
- Jet: second-order Taylor jet at x=1, i.e. f mod (x-1)^3. Much cheaper
  than XPoly when only the first two factorial moments are needed.
"""

from gmpy2 import mpq, mpz

from .errors import AnalysisError

_Q0 = mpq(0)
_Z0 = mpz(0)


def _lift(other):
    if isinstance(other, (int, mpq)):
        return mpq(other)
    return None


class XPoly:
    """Dense exact polynomial in x, canonical (no trailing zeros)."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs=()):
        cs = [mpq(c) for c in coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        self.coeffs = cs

    @classmethod
    def _raw(cls, cs):
        # internal: cs entries are already mpq, only trimming is needed
        while cs and cs[-1] == 0:
            cs.pop()
        self = cls.__new__(cls)
        self.coeffs = cs
        return self

    @classmethod
    def const(cls, c):
        return cls([c])

    @classmethod
    def x(cls):
        return cls([0, 1])

    def at(self, xval):
        acc = 0
        for c in reversed(self.coeffs):
            acc = acc * xval + c
        return acc

    def degree(self):
        return len(self.coeffs) - 1 if self.coeffs else -1

    def __add__(self, other):
        s = _lift(other)
        if s is not None:
            other = XPoly([s])
        elif not isinstance(other, XPoly):
            return NotImplemented
        a, b = self.coeffs, other.coeffs
        if len(a) < len(b):
            a, b = b, a
        out = [a[i] + b[i] for i in range(len(b))]
        out.extend(a[len(b):])
        return XPoly._raw(out)

    __radd__ = __add__

    def __neg__(self):
        return XPoly([-c for c in self.coeffs])

    def __sub__(self, other):
        s = _lift(other)
        if s is not None:
            other = XPoly([s])
        elif not isinstance(other, XPoly):
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        s = _lift(other)
        if s is not None:
            if s == 0:
                return XPoly([])
            return XPoly._raw([c * s for c in self.coeffs])
        if not isinstance(other, XPoly):
            return NotImplemented
        if not self.coeffs or not other.coeffs:
            return XPoly([])
        out = [_Q0] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a == 0:
                continue
            for j, b in enumerate(other.coeffs):
                out[i + j] += a * b
        return XPoly._raw(out)

    __rmul__ = __mul__

    def __eq__(self, other):
        s = _lift(other)
        if s is not None:
            if not self.coeffs:
                return s == 0
            return len(self.coeffs) == 1 and self.coeffs[0] == s
        if not isinstance(other, XPoly):
            return NotImplemented
        return self.coeffs == other.coeffs

    def __hash__(self):
        return hash(tuple(self.coeffs))

    def __repr__(self):
        return f"XPoly({[str(c) for c in self.coeffs]})"


class Jet:
    """Taylor jet a + b*(x-1) + c*(x-1)^2, multiplied mod (x-1)^3."""

    __slots__ = ("a", "b", "c")

    def __init__(self, a, b=0, c=0):
        self.a = mpq(a)
        self.b = mpq(b)
        self.c = mpq(c)

    @classmethod
    def x(cls):
        return cls(1, 1, 0)

    @classmethod
    def const(cls, v):
        return cls(v)

    def value(self):
        return self.a

    def d1(self):
        """First derivative in x at x=1."""
        return self.b

    def d2(self):
        """Second derivative in x at x=1."""
        return 2 * self.c

    def __add__(self, other):
        s = _lift(other)
        if s is not None:
            return Jet(self.a + s, self.b, self.c)
        if not isinstance(other, Jet):
            return NotImplemented
        return Jet(self.a + other.a, self.b + other.b, self.c + other.c)

    __radd__ = __add__

    def __neg__(self):
        return Jet(-self.a, -self.b, -self.c)

    def __sub__(self, other):
        s = _lift(other)
        if s is not None:
            return Jet(self.a - s, self.b, self.c)
        if not isinstance(other, Jet):
            return NotImplemented
        return Jet(self.a - other.a, self.b - other.b, self.c - other.c)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        s = _lift(other)
        if s is not None:
            return Jet(self.a * s, self.b * s, self.c * s)
        if not isinstance(other, Jet):
            return NotImplemented
        return Jet(self.a * other.a,
                   self.a * other.b + self.b * other.a,
                   self.a * other.c + self.b * other.b + self.c * other.a)

    __rmul__ = __mul__

    def __eq__(self, other):
        s = _lift(other)
        if s is not None:
            return self.a == s and self.b == 0 and self.c == 0
        if not isinstance(other, Jet):
            return NotImplemented
        return self.a == other.a and self.b == other.b and self.c == other.c

    def __hash__(self):
        return hash((self.a, self.b, self.c))

    def __repr__(self):
        return f"Jet({self.a}, {self.b}, {self.c})"


def lift_rat(ring, value):
    """Embed an exact rational into the requested coefficient ring."""
    if ring == "rat":
        return mpq(value)
    if ring == "xpoly":
        return XPoly.const(value)
    if ring == "jet":
        return Jet.const(value)
    raise AnalysisError(f"unknown coefficient ring {ring!r}")


def ring_x(ring):
    """The image of the marking variable x in the requested ring."""
    if ring == "rat":
        return mpq(1)
    if ring == "xpoly":
        return XPoly.x()
    if ring == "jet":
        return Jet.x()
    raise AnalysisError(f"unknown coefficient ring {ring!r}")


_XP_ZERO = XPoly()


def _packed_conv_rows(pairs, n_u):
    """Packed-integer evaluation of the same sum; see xpoly_conv_rows.

    Each x-polynomial is packed into one integer with a fixed slot width
    so products become single big-integer multiplies. Only valid for
    nonnegative integer coefficients (no borrows between slots); returns
    None when any coefficient disqualifies the batch.
    """
    bits = 1
    for ra, rb in pairs:
        for row in (ra, rb):
            for p in row:
                for c in p.coeffs:
                    if c < 0 or c.denominator != 1:
                        return None
                    b = c.numerator.bit_length()
                    if b > bits:
                        bits = b
    # slot width: worst product of two coefficients plus 48 bits of
    # headroom for every accumulation this batch could perform
    slot_bits = ((2 * bits + 48 + 7) // 8) * 8
    nb = slot_bits // 8

    def pack(row, limit):
        out = []
        for p in row[:limit]:
            cs = p.coeffs
            if not cs:
                out.append(None)
                continue
            buf = bytearray(len(cs) * nb)
            for t, c in enumerate(cs):
                if c:
                    v = int(c)
                    buf[t * nb:t * nb + (v.bit_length() + 7) // 8] = \
                        v.to_bytes((v.bit_length() + 7) // 8, "little")
            out.append(mpz(int.from_bytes(buf, "little")))
        return out

    acc = [_Z0] * n_u
    for ra, rb in pairs:
        pa = pack(ra, n_u)
        pb = pack(rb, n_u)
        for k1, va in enumerate(pa):
            if va is None:
                continue
            for k2 in range(min(len(pb), n_u - k1)):
                vb = pb[k2]
                if vb is not None:
                    acc[k1 + k2] += va * vb
    out = []
    for s in acc:
        if s == 0:
            out.append(_XP_ZERO)
            continue
        ln = (s.bit_length() + slot_bits - 1) // slot_bits
        raw = int(s).to_bytes(ln * nb, "little")
        out.append(XPoly._raw([mpq(int.from_bytes(raw[t * nb:(t + 1) * nb],
                                                  "little"))
                               for t in range(ln)]))
    return out


def xpoly_conv_rows(pairs, n_u):
    """Sum of truncated u-convolutions over (row_a, row_b) pairs.

    Rows are lists of XPoly. Counting solves (nonnegative integer
    coefficients) go through the packed-integer route; anything else
    accumulates into flat coefficient lists, wrapping each output slot
    once instead of allocating an XPoly per partial product. Dense
    marked solves spend most of their time here.
    """
    pairs = list(pairs)
    packed = _packed_conv_rows(pairs, n_u)
    if packed is not None:
        return packed
    acc = [None] * n_u
    for ra, rb in pairs:
        for k1 in range(min(len(ra), n_u)):
            cs1 = ra[k1].coeffs
            if not cs1:
                continue
            for k2 in range(min(len(rb), n_u - k1)):
                cs2 = rb[k2].coeffs
                if not cs2:
                    continue
                slot = acc[k1 + k2]
                if slot is None:
                    slot = acc[k1 + k2] = []
                need = len(cs1) + len(cs2) - 1
                if len(slot) < need:
                    slot.extend([_Q0] * (need - len(slot)))
                for i1, av in enumerate(cs1):
                    if av:
                        for i2, bv in enumerate(cs2):
                            if bv:
                                slot[i1 + i2] += av * bv
    return [_XP_ZERO if s is None else XPoly._raw(s) for s in acc]
