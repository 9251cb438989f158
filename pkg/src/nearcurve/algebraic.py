"""Real algebraic numbers and simple number fields.

A real algebraic number is an irreducible integer polynomial together with a
rational interval holding exactly one of its roots. Comparisons against
rationals are exact: the interval is refined until it excludes the rational,
unless the rational is itself the root.
"""
from __future__ import annotations

from fractions import Fraction
from functools import cmp_to_key, reduce
from math import gcd

import mpmath
import sympy
from mpmath.ctx_iv import MPIntervalContext
from sympy import QQ, ZZ, Poly

T = sympy.Symbol("t")


def to_fraction(v) -> Fraction:
    v = sympy.Rational(v)
    return Fraction(int(v.p), int(v.q))


def to_rational(q: Fraction) -> sympy.Rational:
    return sympy.Rational(q.numerator, q.denominator)


def univariate(p, gen=None) -> Poly:
    """``p`` as a Poly in ``T`` over QQ."""
    if isinstance(p, Poly):
        return Poly.from_list(p.all_coeffs(), T, domain=QQ)
    if gen is None:
        return Poly(p, T, domain=QQ)
    return Poly(sympy.sympify(p).subs(gen, T), T, domain=QQ)


def integer_primitive(p: Poly) -> Poly:
    """Integer polynomial with coprime coefficients and positive leading term."""
    coeffs = [to_fraction(c) for c in p.all_coeffs()]
    den = reduce(lambda a, b: a * b // gcd(a, b), (c.denominator for c in coeffs), 1)
    ints = [int(c * den) for c in coeffs]
    g = reduce(gcd, ints, 0) or 1
    if ints and ints[0] < 0:
        g = -g
    return Poly.from_list([c // g for c in ints], T, domain=ZZ)


def ivctx(bits: int) -> MPIntervalContext:
    """A private interval context, so concurrent callers never share precision."""
    ctx = MPIntervalContext()
    ctx.prec = bits
    return ctx


def iv_rational(q: Fraction, ctx):
    return ctx.mpf(q.numerator) / q.denominator


class AlgebraicNumber:
    """Real root of the irreducible ``poly`` lying in the closed interval [lo, hi]."""

    __slots__ = ("poly", "lo", "hi")

    def __init__(self, poly: Poly, lo: Fraction, hi: Fraction):
        self.poly = integer_primitive(poly)
        self.lo = Fraction(lo)
        self.hi = Fraction(hi)
        if self.poly.degree() == 1:
            a, b = (to_fraction(c) for c in self.poly.all_coeffs())
            self.lo = self.hi = -b / a

    @classmethod
    def rational(cls, q) -> "AlgebraicNumber":
        q = Fraction(q)
        return cls(Poly.from_list([q.denominator, -q.numerator], T, domain=ZZ), q, q)

    @property
    def exact(self) -> Fraction | None:
        return self.lo if self.lo == self.hi else None

    @property
    def degree(self) -> int:
        return self.poly.degree()

    def refine(self, width) -> "AlgebraicNumber":
        """Shrink the interval (in place) to width at most ``width``; returns self."""
        width = Fraction(width)
        if self.exact is not None or self.hi - self.lo <= width:
            return self
        s, t = self.poly.refine_root(to_rational(self.lo), to_rational(self.hi), eps=to_rational(width))
        self.lo, self.hi = to_fraction(s), to_fraction(t)
        return self

    def compare(self, q) -> int:
        """Sign of self - q, decided exactly."""
        q = Fraction(q)
        a = self
        if a.exact is not None:
            return (a.exact > q) - (a.exact < q)
        # a minimal polynomial of degree > 1 has no rational roots
        while a.lo <= q <= a.hi:
            a.refine((a.hi - a.lo) / 4)
        return 1 if a.lo > q else -1

    def same_as(self, other: "AlgebraicNumber") -> bool:
        """Exact equality. Distinct irreducible polynomials share no root."""
        if self.poly != other.poly:
            return False
        lo, hi = max(self.lo, other.lo), min(self.hi, other.hi)
        if lo > hi:
            return False
        # each interval isolates one root, so one root in the overlap means the same root
        return self.poly.count_roots(to_rational(lo), to_rational(hi)) == 1

    def __lt__(self, other):
        if isinstance(other, AlgebraicNumber):
            if self.hi < other.lo:
                return True
            if other.hi < self.lo:
                return False
            if self.same_as(other):
                return False
            if other.exact is not None:
                return self.compare(other.exact) < 0
            if self.exact is not None:
                return other.compare(self.exact) > 0
            a, b = self, other
            for _ in range(400):
                a = a.refine((a.hi - a.lo) / 4)
                b = b.refine((b.hi - b.lo) / 4)
                if a.hi < b.lo:
                    return True
                if b.hi < a.lo:
                    return False
            raise ArithmeticError("could not separate algebraic numbers")
        return self.compare(other) < 0

    def interval(self, ctx):
        """Interval in ``ctx`` containing the number."""
        lo = iv_rational(self.lo, ctx)
        hi = iv_rational(self.hi, ctx)
        return ctx.mpf([lo.a, hi.b])

    def enclosure(self, bits: int, ctx=None):
        """Interval of width about 2**-bits."""
        a = self.refine(Fraction(1, 1 << bits))
        return a.interval(ctx or ivctx(bits + 16))

    def __float__(self):
        a = self.refine(Fraction(1, 1 << 60))
        return float((a.lo + a.hi) / 2)

    def __repr__(self):
        if self.exact is not None:
            return f"AlgebraicNumber({self.exact})"
        return f"AlgebraicNumber({self.poly.as_expr()}, [{self.lo}, {self.hi}])"

    def to_dict(self) -> dict:
        return {
            "minpoly": [str(int(c)) for c in self.poly.all_coeffs()],
            "interval": [str(self.lo), str(self.hi)],
            "approx": mpmath.nstr(mpmath.mpf(float(self)), 17),
        }


def real_roots(p, lo=None, hi=None) -> list[AlgebraicNumber]:
    """Real roots of ``p`` (any univariate Poly) in the closed range [lo, hi], ascending."""
    p = univariate(p)
    if p.is_zero:
        raise ValueError("zero polynomial has no isolated roots")
    if p.degree() <= 0:
        return []
    out = []
    for fac, _ in sympy.factor_list(p)[1]:
        fac = integer_primitive(univariate(fac))
        if fac.degree() <= 0:
            continue
        for (s, t), _ in fac.intervals():
            a = AlgebraicNumber(fac, to_fraction(s), to_fraction(t))
            if lo is not None and a.compare(lo) < 0:
                continue
            if hi is not None and a.compare(hi) > 0:
                continue
            out.append(a)
    out.sort(key=cmp_to_key(lambda a, b: -1 if a < b else (1 if b < a else 0)))
    return out


def simplest_between(a: Fraction, b: Fraction) -> Fraction:
    """Rational with the smallest denominator in the open interval (a, b)."""
    a, b = Fraction(a), Fraction(b)
    if not a < b:
        raise ValueError("empty interval")
    lo_int = a.numerator // a.denominator + 1
    hi_int = -((-b.numerator) // b.denominator) - 1
    if lo_int <= hi_int:
        if lo_int <= 0 <= hi_int:
            return Fraction(0)
        return Fraction(lo_int if lo_int > 0 else hi_int)
    n = lo_int - 1
    a, b = a - n, b - n
    # Stern-Brocot descent inside (0, 1)
    ln, ld, rn, rd = 0, 1, 1, 1
    while True:
        m = Fraction(ln + rn, ld + rd)
        if m <= a:
            ln, ld = m.numerator, m.denominator
        elif m >= b:
            rn, rd = m.numerator, m.denominator
        else:
            return m + n


def point_between(x: AlgebraicNumber, y: AlgebraicNumber) -> Fraction:
    """A simple rational strictly between x < y."""
    while True:
        lo = x.exact if x.exact is not None else x.hi
        hi = y.exact if y.exact is not None else y.lo
        if lo < hi and (x.exact is not None or x.compare(lo) < 0) and (y.exact is not None or y.compare(hi) > 0):
            return simplest_between(lo, hi)
        if x.exact is not None and y.exact is not None:
            raise ValueError("numbers are not ordered")
        if x.exact is None:
            x = x.refine((x.hi - x.lo) / 4)
        if y.exact is None:
            y = y.refine((y.hi - y.lo) / 4)


class NumberField:
    """Q[t]/(r) for an irreducible r; elements are QQ Polys of degree < deg r."""

    def __init__(self, r: Poly):
        self.r = univariate(r).monic()
        self.degree = self.r.degree()
        self.one = Poly(1, T, domain=QQ)
        self.zero = Poly(0, T, domain=QQ)

    def el(self, p) -> Poly:
        return univariate(p).rem(self.r)

    def mul(self, a: Poly, b: Poly) -> Poly:
        return (a * b).rem(self.r)

    def inv(self, a: Poly) -> Poly:
        return a.invert(self.r)

    def pow(self, a: Poly, e: int) -> Poly:
        out = self.one
        for _ in range(e):
            out = self.mul(out, a)
        return out

    def eval_form(self, F, P) -> Poly:
        """Integer form ``F`` at a vector of field elements."""
        powers = [[self.one] for _ in P]
        for i, v in enumerate(P):
            for _ in range(F.degree):
                powers[i].append(self.mul(powers[i][-1], v))
        total = self.zero
        for e, c in F.items():
            term = Poly(c, T, domain=QQ)
            for i, k in enumerate(e):
                if k:
                    term = self.mul(term, powers[i][k])
            total = total + term
        return total.rem(self.r)

    def is_rational(self, a: Poly) -> bool:
        return a.degree() <= 0

    def evaluate(self, a: Poly, x: AlgebraicNumber, bits: int):
        """Interval enclosure of a(x) for a real root x of r."""
        ctx = ivctx(bits + 32)
        xi = x.enclosure(bits, ctx)
        v = ctx.mpf(0)
        for c in a.all_coeffs():
            v = v * xi + iv_rational(to_fraction(c), ctx)
        return v
