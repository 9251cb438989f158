"""Exact integer forms in two or three variables.

Everything here works with Python integers, so evaluations never overflow
(a quintic at height 2**12 is already past 64 bits).
"""
from __future__ import annotations

import json
import random
from fractions import Fraction
from functools import reduce
from itertools import combinations_with_replacement
from math import gcd
from typing import Iterable, Mapping, Sequence

import sympy

from .errors import PreconditionError

VARNAMES = {2: ("x", "y"), 3: ("x", "y", "z")}


def monomials(nvars: int, degree: int) -> list[tuple[int, ...]]:
    """Exponent tuples of total degree ``degree`` in graded-lex order.

    For three variables and degree 2 this is x^2, xy, xz, y^2, yz, z^2.
    """
    out = []
    for combo in combinations_with_replacement(range(nvars), degree):
        e = [0] * nvars
        for i in combo:
            e[i] += 1
        out.append(tuple(e))
    out.sort(reverse=True)
    return out


def gcd_all(values: Iterable[int]) -> int:
    return reduce(gcd, (abs(v) for v in values), 0)


def is_primitive(p: Sequence[int]) -> bool:
    return gcd_all(p) == 1


class IntegerForm:
    """Homogeneous polynomial with integer coefficients.

    ``terms`` maps exponent tuples to nonzero integers. The zero form is the
    empty map with a declared degree.
    """

    __slots__ = ("nvars", "degree", "_terms", "_hash")

    def __init__(self, nvars: int, degree: int, terms: Mapping[Sequence[int], int] | None = None):
        if nvars not in (2, 3):
            raise ValueError(f"forms in {nvars} variables are not supported")
        if degree < 0:
            raise ValueError("degree must be non-negative")
        clean: dict[tuple[int, ...], int] = {}
        for e, c in (terms or {}).items():
            e = tuple(int(v) for v in e)
            if len(e) != nvars or min(e) < 0:
                raise ValueError(f"bad exponent tuple {e}")
            if sum(e) != degree:
                raise ValueError(f"term {e} does not have degree {degree}")
            c = int(c)
            if c:
                clean[e] = clean.get(e, 0) + c
                if clean[e] == 0:
                    del clean[e]
        self.nvars = nvars
        self.degree = degree
        self._terms = tuple(sorted(clean.items(), reverse=True))
        self._hash = None

    # -- construction helpers -------------------------------------------------

    @classmethod
    def parse(cls, text: str, nvars: int | None = None) -> "IntegerForm":
        """Build a form from an expression such as ``"x^5 + y^5 - z^5"``."""
        expr = sympy.sympify(text.replace("^", "**"))
        names = [str(s) for s in expr.free_symbols]
        if nvars is None:
            nvars = 3 if "z" in names else 2
        gens = sympy.symbols(VARNAMES[nvars])
        unknown = set(names) - set(VARNAMES[nvars])
        if unknown:
            raise ValueError(f"unknown variables {sorted(unknown)}")
        poly = sympy.Poly(expr, *gens)
        if poly.is_zero:
            raise ValueError("use IntegerForm(nvars, degree) for the zero form")
        if not poly.is_homogeneous:
            raise ValueError("expression is not homogeneous")
        terms = {}
        for monom, c in poly.terms():
            if not c.is_integer:
                raise ValueError("coefficients must be integers")
            terms[monom] = int(c)
        return cls(nvars, poly.total_degree(), terms)

    @classmethod
    def from_json(cls, doc: str | dict) -> "IntegerForm":
        if isinstance(doc, str):
            doc = json.loads(doc)
        terms = {tuple(t["e"]): int(t["c"]) for t in doc["terms"]}
        return cls(int(doc["nvars"]), int(doc["degree"]), terms)

    @classmethod
    def load(cls, path) -> "IntegerForm":
        with open(path) as fh:
            return cls.from_json(json.load(fh))

    def to_dict(self) -> dict:
        return {
            "nvars": self.nvars,
            "degree": self.degree,
            "terms": [{"e": list(e), "c": str(c)} for e, c in self._terms],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), separators=(", ", ": "))

    # -- basic protocol -----------------------------------------------------

    @property
    def terms(self) -> dict[tuple[int, ...], int]:
        return dict(self._terms)

    def items(self) -> tuple[tuple[tuple[int, ...], int], ...]:
        return self._terms

    def coefficient(self, e: Sequence[int]) -> int:
        return self.terms.get(tuple(e), 0)

    def is_zero(self) -> bool:
        return not self._terms

    def __eq__(self, other):
        if not isinstance(other, IntegerForm):
            return NotImplemented
        if self.is_zero() and other.is_zero():
            return self.nvars == other.nvars
        return (self.nvars, self.degree, self._terms) == (other.nvars, other.degree, other._terms)

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.nvars, self.degree if self._terms else -1, self._terms))
        return self._hash

    def __repr__(self):
        return f"IntegerForm({self})"

    def __str__(self):
        if not self._terms:
            return "0"
        names = VARNAMES[self.nvars]
        parts = []
        for e, c in self._terms:
            mono = "*".join(n if p == 1 else f"{n}^{p}" for n, p in zip(names, e) if p)
            if not mono:
                parts.append(str(c))
            elif c == 1:
                parts.append(mono)
            elif c == -1:
                parts.append("-" + mono)
            else:
                parts.append(f"{c}*{mono}")
        return " + ".join(parts).replace("+ -", "- ")

    # -- arithmetic -----------------------------------------------------------

    def __add__(self, other: "IntegerForm") -> "IntegerForm":
        if other.is_zero():
            return self
        if self.is_zero():
            return other
        if other.degree != self.degree or other.nvars != self.nvars:
            raise ValueError("can only add forms of equal degree and arity")
        t = self.terms
        for e, c in other._terms:
            t[e] = t.get(e, 0) + c
        return IntegerForm(self.nvars, self.degree, t)

    def __neg__(self):
        return IntegerForm(self.nvars, self.degree, {e: -c for e, c in self._terms})

    def __sub__(self, other: "IntegerForm") -> "IntegerForm":
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, int):
            return IntegerForm(self.nvars, self.degree, {e: c * other for e, c in self._terms})
        if not isinstance(other, IntegerForm):
            return NotImplemented
        if other.nvars != self.nvars:
            raise ValueError("arity mismatch")
        t: dict[tuple[int, ...], int] = {}
        for e1, c1 in self._terms:
            for e2, c2 in other._terms:
                e = tuple(a + b for a, b in zip(e1, e2))
                t[e] = t.get(e, 0) + c1 * c2
        return IntegerForm(self.nvars, self.degree + other.degree, t)

    __rmul__ = __mul__

    def content(self) -> int:
        return gcd_all(c for _, c in self._terms)

    def primitive_part(self) -> "IntegerForm":
        """Divide out the content and make the leading coefficient positive."""
        if self.is_zero():
            return self
        g = self.content()
        if self._terms[0][1] < 0:
            g = -g
        return IntegerForm(self.nvars, self.degree, {e: c // g for e, c in self._terms})

    def height(self) -> int:
        return max((abs(c) for _, c in self._terms), default=0)

    # -- evaluation and calculus ----------------------------------------------

    def __call__(self, *p):
        return evaluate(self, p)

    def substitute(self, matrix: Sequence[Sequence[int]]) -> "IntegerForm":
        """The form X -> F(matrix @ X)."""
        gens = sympy.symbols(VARNAMES[self.nvars])
        images = [sum(int(matrix[i][j]) * gens[j] for j in range(self.nvars)) for i in range(self.nvars)]
        expr = self.as_expr(images)
        return from_sympy(expr, self.nvars, self.degree)

    def as_expr(self, images=None):
        gens = images if images is not None else sympy.symbols(VARNAMES[self.nvars])
        return sympy.Add(*[c * sympy.Mul(*[g**p for g, p in zip(gens, e)]) for e, c in self._terms])

    def as_poly(self) -> sympy.Poly:
        gens = sympy.symbols(VARNAMES[self.nvars])
        return sympy.Poly.from_dict(dict(self._terms) or {(0,) * self.nvars: 0}, *gens, domain="ZZ")


def from_sympy(expr, nvars: int, degree: int | None = None) -> IntegerForm:
    gens = sympy.symbols(VARNAMES[nvars])
    poly = sympy.Poly(sympy.expand(expr), *gens)
    if poly.is_zero:
        return IntegerForm(nvars, degree or 0)
    terms = {m: int(c) for m, c in poly.terms()}
    return IntegerForm(nvars, poly.total_degree() if degree is None else degree, terms)


def evaluate(F: IntegerForm, p: Sequence) -> int:
    """Exact value of ``F`` at ``p``.

    Integer points give integers; Fractions or mpmath numbers also work since
    only ring operations are used.
    """
    if len(p) != F.nvars:
        raise PreconditionError(f"point has {len(p)} coordinates, form has {F.nvars} variables")
    total = 0
    for e, c in F.items():
        term = c
        for v, k in zip(p, e):
            if k:
                term = term * v**k
        total += term
    return total


def partial_derivative(F: IntegerForm, i: int) -> IntegerForm:
    if not 0 <= i < F.nvars:
        raise IndexError(f"variable index {i} out of range")
    t = {}
    for e, c in F.items():
        if e[i]:
            e2 = list(e)
            e2[i] -= 1
            t[tuple(e2)] = c * e[i]
    return IntegerForm(F.nvars, max(F.degree - 1, 0), t)


def gradient(F: IntegerForm) -> list[IntegerForm]:
    return [partial_derivative(F, i) for i in range(F.nvars)]


def hessian_form(F: IntegerForm) -> IntegerForm:
    """Determinant of the 3x3 matrix of second partials, degree 3(k-2)."""
    if F.nvars != 3:
        raise PreconditionError("the Hessian is defined here for ternary forms")
    if F.degree < 2:
        raise PreconditionError("need degree at least 2")
    g = gradient(F)
    h = [[partial_derivative(g[i], j) for j in range(3)] for i in range(3)]
    det = (
        h[0][0] * (h[1][1] * h[2][2] - h[1][2] * h[2][1])
        - h[0][1] * (h[1][0] * h[2][2] - h[1][2] * h[2][0])
        + h[0][2] * (h[1][0] * h[2][1] - h[1][1] * h[2][0])
    )
    if det.is_zero():
        return IntegerForm(3, 3 * (F.degree - 2))
    return det


class BivariatePolynomial:
    """Polynomial g(x, y) with rational coefficients (the affine curve)."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Mapping[tuple[int, int], int | Fraction]):
        self.coeffs = {tuple(k): Fraction(v) for k, v in coeffs.items() if v}

    @classmethod
    def parse(cls, text: str) -> "BivariatePolynomial":
        x, y = sympy.symbols("x y")
        poly = sympy.Poly(sympy.sympify(text.replace("^", "**")), x, y)
        return cls({m: Fraction(int(c.p), int(c.q)) for m, c in poly.terms()})

    @classmethod
    def from_poly(cls, poly: sympy.Poly) -> "BivariatePolynomial":
        return cls({m: Fraction(int(c.p), int(c.q)) for m, c in poly.terms()})

    @property
    def degree(self) -> int:
        return max((i + j for i, j in self.coeffs), default=0)

    def __call__(self, x, y):
        return sum(c * x**i * y**j for (i, j), c in self.coeffs.items())

    def __eq__(self, other):
        return isinstance(other, BivariatePolynomial) and self.coeffs == other.coeffs

    def __repr__(self):
        return f"BivariatePolynomial({self.as_poly().as_expr()})"

    def as_poly(self) -> sympy.Poly:
        x, y = sympy.symbols("x y")
        d = {k: sympy.Rational(v.numerator, v.denominator) for k, v in self.coeffs.items()}
        return sympy.Poly.from_dict(d or {(0, 0): 0}, x, y, domain="QQ")

    def integer_multiple(self) -> "BivariatePolynomial":
        """Same zero set with coprime integer coefficients."""
        den = reduce(lambda a, b: a * b // gcd(a, b), (c.denominator for c in self.coeffs.values()), 1)
        ints = {k: int(c * den) for k, c in self.coeffs.items()}
        g = gcd_all(ints.values()) or 1
        return BivariatePolynomial({k: v // g for k, v in ints.items()})

    def homogenize(self, degree: int | None = None) -> IntegerForm:
        g = self.integer_multiple()
        k = self.degree if degree is None else degree
        return IntegerForm(3, k, {(i, j, k - i - j): int(c) for (i, j), c in g.coeffs.items()})

    def swap(self) -> "BivariatePolynomial":
        return BivariatePolynomial({(j, i): c for (i, j), c in self.coeffs.items()})


def dehomogenize(F: IntegerForm, var: int = 2) -> BivariatePolynomial:
    """Set variable ``var`` to 1, keeping the other two in their order."""
    if F.nvars != 3:
        raise PreconditionError("dehomogenize expects a ternary form")
    keep = [i for i in range(3) if i != var]
    t: dict[tuple[int, int], int] = {}
    for e, c in F.items():
        k = (e[keep[0]], e[keep[1]])
        t[k] = t.get(k, 0) + c
    return BivariatePolynomial(t)


# -- singularity ---------------------------------------------------------------


class SingularityVerdict:
    NONSINGULAR = "nonsingular-certified"
    SINGULAR = "singular-with-witness"
    INCONCLUSIVE = "inconclusive"

    def __init__(self, status: str, witness: tuple[int, int, int] | None = None, note: str = ""):
        self.status = status
        self.witness = witness
        self.note = note

    def __repr__(self):
        return f"SingularityVerdict({self.status!r}, witness={self.witness})"

    def to_dict(self):
        return {"status": self.status, "witness": list(self.witness) if self.witness else None, "note": self.note}


def _common_rational_zero(polys: list[sympy.Poly]) -> list[Fraction] | None:
    """Rational roots shared by univariate polynomials (zero polys ignored)."""
    live = [p for p in polys if not p.is_zero]
    if not live:
        return [Fraction(0)]
    g = live[0]
    for p in live[1:]:
        g = sympy.gcd(g, p)
    if g.degree() <= 0:
        return None
    roots = [Fraction(int(r.p), int(r.q)) for r in sympy.roots(g, filter="Q") if r.is_rational]
    return roots or None


def singularity_scan(F: IntegerForm, budget: int = 4, seed: int = 0) -> SingularityVerdict:
    """Decide whether the partials of ``F`` have a common projective zero.

    Works chart by chart: in ``z = 1`` the resultants of pairs of partials in
    ``y`` must share a root, on ``z = 0`` we intersect univariate polynomials,
    and the point (1:0:0) is checked directly. If an affine chart cannot be
    settled, random unimodular changes of coordinates are tried up to
    ``budget`` times before giving up with an inconclusive verdict.
    """
    if F.nvars != 3:
        raise PreconditionError("singularity_scan expects a ternary form")
    if F.is_zero():
        return SingularityVerdict(SingularityVerdict.SINGULAR, (1, 0, 0), "zero form")
    x, y, z = sympy.symbols("x y z")
    rng = random.Random(seed)
    matrix = [[1, 0, 0], [0, 1, 0], [0, 0, 1]]
    for attempt in range(budget + 1):
        G = F if attempt == 0 else F.substitute(matrix)
        verdict = _scan_once(G, x, y, z)
        if verdict.status == SingularityVerdict.SINGULAR:
            w = _apply(matrix, verdict.witness)
            g = gcd_all(w) or 1
            w = tuple(v // g for v in w)
            assert all(evaluate(d, w) == 0 for d in gradient(F))
            return SingularityVerdict(SingularityVerdict.SINGULAR, w)
        if verdict.status == SingularityVerdict.NONSINGULAR:
            return verdict
        matrix = _random_unimodular(rng)
    return SingularityVerdict(SingularityVerdict.INCONCLUSIVE, None, "budget exhausted")


def _apply(m, v):
    return tuple(sum(m[i][j] * v[j] for j in range(3)) for i in range(3))


def _random_unimodular(rng: random.Random):
    while True:
        m = [[rng.randint(-3, 3) for _ in range(3)] for _ in range(3)]
        d = sympy.Matrix(m).det()
        if d in (1, -1):
            return m


def _scan_once(F: IntegerForm, x, y, z) -> SingularityVerdict:
    grads = [d.as_expr() for d in gradient(F)]
    verdict = _scan_affine(F, grads, x, y, z)
    if verdict.status != SingularityVerdict.NONSINGULAR:
        return verdict
    # line z = 0, chart y = 1
    line = [sympy.Poly(g.subs({y: 1, z: 0}), x) for g in grads]
    line_live = [p for p in line if not p.is_zero]
    if not line_live:
        return SingularityVerdict(SingularityVerdict.SINGULAR, (0, 1, 0))
    for r in _common_rational_zero(line) or []:
        pt = (r.numerator, r.denominator, 0)
        if all(evaluate(d, pt) == 0 for d in gradient(F)):
            return SingularityVerdict(SingularityVerdict.SINGULAR, pt)
    gl = line_live[0]
    for p in line_live[1:]:
        gl = sympy.gcd(gl, p)
    if gl.degree() > 0:
        return SingularityVerdict(SingularityVerdict.INCONCLUSIVE, None, "line at infinity")
    # the point (1:0:0)
    if all(evaluate(d, (1, 0, 0)) == 0 for d in gradient(F)):
        return SingularityVerdict(SingularityVerdict.SINGULAR, (1, 0, 0))
    return verdict


def _scan_affine(F, grads, x, y, z) -> SingularityVerdict:
    aff = [sympy.Poly(g.subs(z, 1), x, y) for g in grads]
    aff = [p for p in aff if not p.is_zero]
    if not aff:
        return SingularityVerdict(SingularityVerdict.SINGULAR, (0, 0, 1))
    # univariate eliminants in x vanishing at every common zero
    elim = [sympy.Poly(p.as_expr(), x) for p in aff if p.degree(y) == 0]
    ydep = [p for p in aff if p.degree(y) > 0]
    for i in range(len(ydep)):
        for j in range(i + 1, len(ydep)):
            elim.append(sympy.Poly(sympy.resultant(ydep[i].as_expr(), ydep[j].as_expr(), y), x))
    live = [r for r in elim if not r.is_zero]
    h = None
    if live:
        h = live[0]
        for r in live[1:]:
            h = sympy.gcd(h, r)
        if h.degree() <= 0 and len(ydep) + len(elim) > 1:
            return SingularityVerdict(SingularityVerdict.NONSINGULAR)
    cands = [Fraction(0)] if h is None else [
        Fraction(int(r.p), int(r.q)) for r in sympy.roots(h, filter="Q") if r.is_rational
    ]
    for r in cands:
        xr = sympy.Rational(r.numerator, r.denominator)
        fib = [sympy.Poly(p.as_expr().subs(x, xr), y) for p in aff]
        for s in _common_rational_zero(fib) or []:
            pt = (r.numerator * s.denominator, s.numerator * r.denominator, r.denominator * s.denominator)
            if all(evaluate(d, pt) == 0 for d in gradient(F)):
                return SingularityVerdict(SingularityVerdict.SINGULAR, pt)
    return SingularityVerdict(SingularityVerdict.INCONCLUSIVE, None, "unresolved common factor")
