"""Flexes and tangent lines of plane curves, graph patches and their jets.

Flexes are the common zeros of F and its Hessian. After a random unimodular
change of coordinates every common zero is affine and has its own
x-coordinate; the resultant in y then lists the x-coordinates, and the
degree-one subresultant gives y as a polynomial in x modulo each irreducible
factor. Everything about a conjugate class of flexes (coordinates, tangent,
contact order) is computed exactly in the number field of that factor.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from math import gcd, lcm

import mpmath
import sympy
from sympy import QQ, Poly

from .algebraic import (
    T,
    AlgebraicNumber,
    NumberField,
    integer_primitive,
    iv_rational,
    ivctx,
    point_between,
    real_roots,
    to_fraction,
    to_rational,
    univariate,
)
from .errors import CertificationError, PreconditionError
from .forms import (
    BivariatePolynomial,
    IntegerForm,
    SingularityVerdict,
    _random_unimodular,
    from_sympy,
    gcd_all,
    gradient,
    hessian_form,
    singularity_scan,
)

DEFAULT_PREC = 128
MAX_PREC = 4096
CROSSCHECK_DEGREE = 8

_x, _y, _z, _s = sympy.symbols("x y z s")


def _endpoints(v):
    prec = getattr(getattr(v, "ctx", None), "prec", 53)
    with mpmath.workprec(prec + 8):
        return mpmath.mpf(v.a), mpmath.mpf(v.b), prec + 8


def mid(v):
    """Midpoint of an mpmath interval as a plain mpf."""
    a, b, prec = _endpoints(v)
    with mpmath.workprec(prec):
        return (a + b) / 2


def width(v):
    """Width of an mpmath interval as a plain mpf (rounded up)."""
    a, b, prec = _endpoints(v)
    with mpmath.workprec(prec):
        return mpmath.fsub(b, a, rounding="u")


def _normalize(v):
    """Primitive integer vector with first nonzero entry positive."""
    den = 1
    for c in v:
        den = den * Fraction(c).denominator // gcd(den, Fraction(c).denominator)
    ints = [int(Fraction(c) * den) for c in v]
    g = gcd_all(ints) or 1
    ints = [c // g for c in ints]
    for c in ints:
        if c:
            if c < 0:
                ints = [-d for d in ints]
            break
    return tuple(ints)


def _line_str(v) -> str:
    parts = []
    for c, name in zip(v, "xyz"):
        if not c:
            continue
        sign = "-" if c < 0 else "+"
        mag = "" if abs(c) == 1 else str(abs(c))
        parts.append(f"{sign}{mag}{name}")
    s = "".join(parts)
    return s[1:] if s.startswith("+") else s


@dataclass
class FlexClass:
    """A Galois orbit of flexes, all given by one irreducible polynomial r(t)."""

    minpoly: Poly
    point: tuple
    tangent: tuple
    contact: int
    line_matrix: tuple
    real_roots: list = field(default_factory=list)

    @property
    def degree(self) -> int:
        return self.minpoly.degree()

    def contains(self, p) -> bool:
        """Whether the integer point lies on the tangent lines of this class.

        For an irreducible r the answer is the same for every conjugate line:
        a.p1 + b.p2 + c.p3 reduced mod r vanishes identically or nowhere.
        """
        return all(r[0] * p[0] + r[1] * p[1] + r[2] * p[2] == 0 for r in self.line_matrix)

    def rational_tangent(self):
        """Coprime integer coefficients if the tangent lines are one rational line.

        (a : b : c) is rational exactly when a, b, c are one field element times
        a rational vector, i.e. when the coefficient matrix has rank one.
        """
        rows = [r for r in self.line_matrix if any(r)]
        u = rows[0]
        for r in rows[1:]:
            if any(r[i] * u[j] != r[j] * u[i] for i in range(3) for j in range(3)):
                return None
        return _normalize(u)

    def line_form(self) -> IntegerForm:
        """Product of the conjugate tangent lines, as a primitive integer form."""
        a, b, c = (p.as_expr().subs(T, _s) for p in self.tangent)
        r = self.minpoly.as_expr().subs(T, _s)
        res = sympy.resultant(r, a * _x + b * _y + c * _z, _s)
        res = sympy.Poly(res, _x, _y, _z)
        res = sympy.sqf_part(res)
        den = lcm(*[int(sympy.Rational(v).q) for v in res.coeffs()])
        G = from_sympy(res.as_expr() * den, 3)
        return G.primitive_part()

    def to_dict(self) -> dict:
        return {
            "minpoly": [str(int(c)) for c in self.minpoly.all_coeffs()],
            "degree": self.degree,
            "contact": self.contact,
            "point": [[str(c) for c in p.all_coeffs()] for p in self.point],
            "tangent": [[str(c) for c in p.all_coeffs()] for p in self.tangent],
            "line_matrix": [[str(v) for v in row] for row in self.line_matrix],
            "real_roots": [a.to_dict() for a in self.real_roots],
        }


@dataclass
class Flex:
    """A real flex: class index, the root picking it, enclosures, contact order."""

    cls: int
    root: AlgebraicNumber
    point: tuple
    tangent: tuple
    contact: int
    rational_point: tuple | None = None
    rational_tangent: tuple | None = None

    def to_dict(self) -> dict:
        return {
            "class": self.cls,
            "root": self.root.to_dict(),
            "point": [mpmath.nstr(mid(v), 20) for v in self.point],
            "tangent": [mpmath.nstr(mid(v), 20) for v in self.tangent],
            "contact": self.contact,
            "rational_point": list(self.rational_point) if self.rational_point else None,
            "rational_tangent": list(self.rational_tangent) if self.rational_tangent else None,
        }


@dataclass
class FlexReport:
    form: IntegerForm
    classes: list
    flexes: list
    nu_max: int
    rational_tangents: list
    verdict: str = SingularityVerdict.NONSINGULAR

    @property
    def count(self) -> int:
        """Number of distinct (complex) flexes."""
        return sum(c.degree for c in self.classes)

    def lines_through(self, p) -> list[int]:
        """Indices of the classes whose tangent lines contain the integer point."""
        return [i for i, c in enumerate(self.classes) if c.contains(p)]

    def class_label(self, i: int) -> str:
        c = self.classes[i]
        t = c.rational_tangent()
        if t is not None and c.degree == 1:
            return _line_str(t)
        return f"class{i}[deg{c.degree}]"

    @cached_property
    def conjugate_product_form(self) -> IntegerForm:
        """Integer form vanishing exactly on the union of all tangent lines."""
        out = IntegerForm(3, 0, {(0, 0, 0): 1})
        for c in self.classes:
            out = out * c.line_form()
        return out.primitive_part()

    def to_dict(self) -> dict:
        return {
            "form": self.form.to_dict(),
            "singularity": self.verdict,
            "flex_count": self.count,
            "nu_max": self.nu_max,
            "rational_tangents": [_line_str(t) for t in self.rational_tangents],
            "flexes": [f.to_dict() for f in self.flexes],
            "classes": [c.to_dict() for c in self.classes],
        }


def _degree_one_subresultant(f, h):
    for s in sympy.subresultants(f.as_expr(), h.as_expr(), _y):
        p = Poly(s, _y)
        if p.degree() == 1:
            c1, c0 = p.all_coeffs()
            return univariate(c1, _x), univariate(c0, _x)
    return None


def _try_frame(F: IntegerForm, U):
    """Flex classes computed in the frame X = U X'; None if U is not generic."""
    k = F.degree
    Fp = F.substitute(U)
    Hp = hessian_form(Fp)
    h = Hp.degree
    if Fp.coefficient((0, k, 0)) == 0 or Hp.coefficient((0, h, 0)) == 0:
        return None
    f = Poly(Fp.as_expr().subs(_z, 1), _x, _y)
    g = Poly(Hp.as_expr().subs(_z, 1), _x, _y)
    R = univariate(sympy.resultant(f.as_expr(), g.as_expr(), _y), _x)
    if R.is_zero or R.degree() != k * h:
        return None
    sub = _degree_one_subresultant(g, f)
    if sub is None:
        return None
    s1, s0 = sub
    grads = gradient(F)
    classes = []
    for r, mult in sympy.factor_list(R)[1]:
        r = integer_primitive(univariate(r))
        if r.degree() <= 0:
            continue
        K = NumberField(r)
        a1 = K.el(s1)
        if a1.is_zero:
            return None
        # projective point (t : -s0/s1 : 1) scaled by s1, avoiding an inverse
        Pp = (K.mul(K.el(T), a1), -K.el(s0), a1)
        P = tuple(K.el(sum((U[i][j] * Pp[j] for j in range(3)), K.zero)) for i in range(3))
        if not K.eval_form(F, P).is_zero:
            raise AssertionError("elimination produced a point off the curve")
        tangent = tuple(K.eval_form(d, P) for d in grads)
        if all(c.is_zero for c in tangent):
            raise PreconditionError("singular point on the curve")
        dot = K.zero
        for a, b in zip(tangent, P):
            dot = dot + K.mul(a, b)
        assert dot.rem(K.r).is_zero  # the tangent passes through the flex
        classes.append((r, mult, P, tangent, K))
    return classes


def _contact_order(F: IntegerForm, K: NumberField, P, tangent) -> int:
    """Vanishing order at s = 0 of F(P + s v), v a second point of the tangent."""

    def cross(a, b):
        return (
            K.mul(a[1], b[2]) - K.mul(a[2], b[1]),
            K.mul(a[2], b[0]) - K.mul(a[0], b[2]),
            K.mul(a[0], b[1]) - K.mul(a[1], b[0]),
        )

    units = [tuple(K.one if i == j else K.zero for j in range(3)) for i in range(3)]
    v = None
    for cand in [cross(tangent, P)] + [cross(tangent, e) for e in units]:
        cand = tuple(c.rem(K.r) for c in cand)
        if all(c.is_zero for c in cand):
            continue
        if all(c.rem(K.r).is_zero for c in cross(P, cand)):
            continue
        v = cand
        break
    assert v is not None
    k = F.degree
    # each coordinate is a polynomial of degree one in s over K
    lin = [[P[i], v[i]] for i in range(3)]

    def smul(a, b):
        out = [K.zero] * min(len(a) + len(b) - 1, k + 1)
        for i, ai in enumerate(a):
            if ai.is_zero:
                continue
            for j, bj in enumerate(b):
                if i + j <= k and not bj.is_zero:
                    out[i + j] = out[i + j] + K.mul(ai, bj)
        return out

    pw = []
    for i in range(3):
        row = [[K.one]]
        for _ in range(k):
            row.append(smul(row[-1], lin[i]))
        pw.append(row)
    total = [K.zero] * (k + 1)
    for e, c in F.items():
        term = smul(smul(pw[0][e[0]], pw[1][e[1]]), pw[2][e[2]])
        for j, t in enumerate(term):
            total[j] = total[j] + t * c
    for j, t in enumerate(total):
        if not t.rem(K.r).is_zero:
            return j
    return k + 1  # the line is a component of the curve


def flex_report(
    F: IntegerForm,
    precision: int = DEFAULT_PREC,
    override: bool = False,
    seed: int = 0,
    attempts: int = 40,
) -> FlexReport:
    """All flexes of the plane curve F = 0, with tangents and contact orders."""
    if F.nvars != 3:
        raise PreconditionError("flex_report expects a ternary form")
    verdict = singularity_scan(F)
    if verdict.status != SingularityVerdict.NONSINGULAR and not override:
        raise PreconditionError(f"curve not certified nonsingular: {verdict.status}")
    if F.degree <= 2:
        return FlexReport(F, [], [], 0, [], verdict.status)
    rng = random.Random(seed)
    found = None
    for attempt in range(attempts):
        U = [[1, 0, 0], [0, 1, 0], [0, 0, 1]] if attempt == 0 else _random_unimodular(rng)
        found = _try_frame(F, U)
        if found is not None:
            break
    if found is None:
        raise CertificationError("no generic coordinate frame found for flex elimination")
    classes = []
    for r, mult, P, tangent, K in found:
        # at a smooth flex the curve meets its Hessian with multiplicity
        # (contact order - 2); in a generic frame that is the root multiplicity
        nu = 2 + mult
        if r.degree() <= CROSSCHECK_DEGREE:
            assert _contact_order(F, K, P, tangent) == nu
        rows = []
        d = r.degree()
        for j in range(d):
            rows.append(tuple(to_fraction(c.nth(j)) for c in tangent))
        den = 1
        for row in rows:
            for v in row:
                den = den * v.denominator // gcd(den, v.denominator)
        rows = tuple(tuple(int(v * den) for v in row) for row in rows)
        classes.append(FlexClass(r, P, tangent, nu, rows, real_roots(r)))
    classes.sort(key=lambda c: (c.degree, [int(v) for v in c.minpoly.all_coeffs()]))
    flexes = []
    rational_tangents = []
    for i, c in enumerate(classes):
        K = NumberField(c.minpoly)
        rt = c.rational_tangent()
        for root in c.real_roots:
            pt = tuple(_enclose(K, p, root, precision) for p in c.point)
            tg = tuple(_enclose(K, p, root, precision) for p in c.tangent)
            rp = None
            if c.degree == 1:
                rp = _normalize([to_fraction(p.eval(root.exact)) for p in c.point])
            flexes.append(Flex(i, root, pt, tg, c.contact, rp, rt))
            if rt is not None and rt not in rational_tangents:
                rational_tangents.append(rt)
    flexes.sort(key=lambda f: (f.rational_point is None, f.rational_point or (), f.cls))
    nu_max = max((c.contact for c in classes), default=0)
    return FlexReport(F, classes, flexes, nu_max, rational_tangents, verdict.status)


def _enclose(K: NumberField, p: Poly, root: AlgebraicNumber, bits: int):
    v = K.evaluate(p, root, bits)
    b = bits
    while width(v) > mpmath.mpf(2) ** (-bits // 2) * max(1, abs(mid(v))):
        b *= 2
        if b > MAX_PREC:
            raise CertificationError("flex enclosure did not reach the requested width")
        v = K.evaluate(p, root, b)
    return v


# -- graph patches ---------------------------------------------------------------


def _as_xy(g) -> Poly:
    if isinstance(g, BivariatePolynomial):
        return g.as_poly()
    if isinstance(g, Poly):
        return Poly(g.as_expr(), _x, _y, domain=QQ)
    return Poly(sympy.sympify(g), _x, _y, domain=QQ)


def _swap(G: Poly) -> Poly:
    return Poly(G.as_expr().subs({_x: _y, _y: _x}, simultaneous=True), _x, _y, domain=QQ)


def _fiber(G: Poly, x0: Fraction) -> Poly:
    return univariate(G.as_expr().subs(_x, to_rational(x0)), _y)


def _res_y(G: Poly, Q: Poly) -> Poly:
    if Q.is_zero:
        return Poly(0, T, domain=QQ)
    if Q.degree(_y) == 0:
        return univariate(Q.as_expr() ** max(G.degree(_y), 1), _x)
    return univariate(sympy.resultant(G.as_expr(), Q.as_expr(), _y), _x)


def _iv_eval(P: Poly, X, Y, ctx):
    total = ctx.mpf(0)
    for (i, j), c in P.terms():
        c = to_fraction(c)
        total += iv_rational(c, ctx) * X**i * Y**j
    return total


def _branch_roots(G: Poly, x0: Fraction) -> list[AlgebraicNumber]:
    fib = _fiber(G, x0)
    if fib.is_zero:
        raise PreconditionError("the curve contains the whole fibre line")
    return real_roots(fib, Fraction(-1), Fraction(1))


@dataclass
class CurvePatch:
    """One branch of g = 0 that is a graph over [lo, hi] with |f|, |f'| <= 1.

    ``axis`` is the graph parameter: "x" means y = f(x), "y" means x = f(y).
    The branch is the ``rank``-th (ascending) of the ``nbranches`` roots of
    g(param, .) in [-1, 1]; that count is constant on the open interval, so
    the rank pins the branch down exactly. ``box`` is a float bounding box in
    (param, value) coordinates, for display only.
    """

    g: Poly
    axis: str
    lo: AlgebraicNumber
    hi: AlgebraicNumber
    rank: int
    nbranches: int
    sample: Fraction
    box: tuple = ()
    bounded_f: bool = True
    bounded_df: bool = True

    @property
    def local(self) -> Poly:
        """g with the graph parameter as first variable."""
        return self.g if self.axis == "x" else _swap(self.g)

    @property
    def degree(self) -> int:
        return self.g.total_degree()

    def inner(self, width_bits: int = 40) -> tuple[Fraction, Fraction]:
        """Rational interval inside [lo, hi], within 2**-width_bits of each end."""
        eps = Fraction(1, 1 << width_bits)
        lo = self.lo.exact if self.lo.exact is not None else self.lo.refine(eps).hi
        hi = self.hi.exact if self.hi.exact is not None else self.hi.refine(eps).lo
        return lo, hi

    def contains(self, x0) -> bool:
        return self.lo.compare(x0) <= 0 and self.hi.compare(x0) >= 0

    def value(self, x0) -> AlgebraicNumber:
        """f(x0) as an algebraic number."""
        x0 = Fraction(x0)
        if not self.contains(x0):
            raise PreconditionError(f"{x0} is outside the patch interval")
        roots = _branch_roots(self.local, x0)
        if len(roots) != self.nbranches:
            raise PreconditionError("branch rank is ambiguous at this endpoint")
        return roots[self.rank]

    @classmethod
    def single_branch(cls, g, lo, hi) -> "CurvePatch":
        """The graph y = f(x) over [lo, hi] when g(x, .) has one root in [-1, 1] there.

        No slope bound is certified, so both bound flags are off.
        """
        G = _as_xy(g)
        lo, hi = Fraction(lo), Fraction(hi)
        cuts = [AlgebraicNumber.rational(lo)]
        cuts += [c for c in _critical_params(G) if c.compare(lo) > 0 and c.compare(hi) < 0]
        cuts.append(AlgebraicNumber.rational(hi))
        samples = [lo, hi] + [point_between(a, b) for a, b in zip(cuts, cuts[1:])]
        for x0 in samples:
            if len(_branch_roots(G, x0)) != 1:
                raise PreconditionError("g has more than one branch over the interval")
        box = (float(lo), float(hi), -1.0, 1.0)
        return cls(G, "x", AlgebraicNumber.rational(lo), AlgebraicNumber.rational(hi), 0, 1,
                   (lo + hi) / 2, box, bounded_f=False, bounded_df=False)

    def to_dict(self) -> dict:
        return {
            "axis": self.axis,
            "interval": [self.lo.to_dict(), self.hi.to_dict()],
            "rank": self.rank,
            "nbranches": self.nbranches,
            "sample": str(self.sample),
            "box": [float(v) for v in self.box],
        }


def _slope_class(G: Poly, x0: Fraction, y: AlgebraicNumber, precision: int) -> int:
    """-1 if |dy/dx| < 1 at (x0, y), +1 if > 1, 0 if it equals 1 to full precision."""
    gx, gy = G.diff(_x), G.diff(_y)
    bits = precision
    while bits <= MAX_PREC:
        ctx = ivctx(bits + 32)
        X = iv_rational(x0, ctx)
        Y = y.enclosure(bits, ctx)
        a = abs(_iv_eval(gx, X, Y, ctx))
        b = abs(_iv_eval(gy, X, Y, ctx))
        if a.b < b.a:
            return -1
        if a.a > b.b:
            return 1
        bits *= 2
    return 0


def _critical_params(G: Poly) -> list[AlgebraicNumber]:
    gx, gy = G.diff(_x), G.diff(_y)
    polys = [
        _res_y(G, gy),
        _res_y(G, gx),
        _res_y(G, gx - gy),
        _res_y(G, gx + gy),
        univariate(G.as_expr().subs(_y, 1), _x),
        univariate(G.as_expr().subs(_y, -1), _x),
        univariate(Poly(G.as_expr(), _y).LC(), _x),
    ]
    prod = Poly(1, T, domain=QQ)
    for p in polys:
        if not p.is_zero and p.degree() > 0:
            prod = prod * sympy.sqf_part(p)
    pts = [AlgebraicNumber.rational(-1), AlgebraicNumber.rational(1)]
    if prod.degree() > 0:
        pts += [r for r in real_roots(prod, Fraction(-1), Fraction(1)) if r.exact not in (-1, 1)]
    pts.sort(key=lambda a: float(a))
    return pts


def _graph_patches(G: Poly, axis: str, precision: int) -> list[CurvePatch]:
    if G.degree(_y) <= 0:
        return []
    crit = _critical_params(G)
    out = []
    for c0, c1 in zip(crit, crit[1:]):
        m = point_between(c0, c1)
        roots = _branch_roots(G, m)
        for rank, y in enumerate(roots):
            if _slope_class(G, m, y, precision) > 0:
                continue
            box = (float(c0), float(c1), -1.0, 1.0)
            out.append(CurvePatch(G if axis == "x" else _swap(G), axis, c0, c1, rank, len(roots), m, box))
    return out


def subdivide_unit_square(g, precision: int = DEFAULT_PREC) -> list[CurvePatch]:
    """Cover {g = 0} in [-1, 1]^2 by graph patches with |f|, |f'| <= 1.

    The parameter line is cut where a branch meets a square edge, where
    g_x, g_y or g_x -+ g_y vanishes on the curve, and where the leading
    coefficient in the other variable vanishes. Between cuts every branch
    keeps its rank and its slope stays on one side of 1 in absolute value;
    flat branches become x-patches and steep ones (seen from the other
    axis) y-patches.
    """
    G = _as_xy(g)
    if G.is_zero:
        raise PreconditionError("zero polynomial")
    sq = Poly(sympy.sqf_part(G), _x, _y, domain=QQ)
    if sq.total_degree() != G.total_degree():
        raise PreconditionError("g must be squarefree")
    return _graph_patches(G, "x", precision) + _graph_patches(_swap(G), "y", precision)


_JET_CACHE: dict = {}


def jet_polynomials(G: Poly, order: int) -> list[Poly]:
    """P_1..P_order with f^(l) = P_l / g_y^(2l-1) along g(x, f(x)) = 0."""
    key = (tuple(sorted((m, str(c)) for m, c in G.terms())), order)
    if key in _JET_CACHE:
        return _JET_CACHE[key]
    gx, gy = G.diff(_x), G.diff(_y)
    gxy, gyy = gx.diff(_y), gy.diff(_y)
    P = -gx
    out = [P]
    for l in range(1, order):
        P = (P.diff(_x) * gy - P.diff(_y) * gx) * gy - (2 * l - 1) * P * (gxy * gy - gyy * gx)
        out.append(P)
    _JET_CACHE[key] = out
    return out


def implicit_jet(patch: CurvePatch, x0, order: int, tol=1e-30, precision: int = DEFAULT_PREC):
    """Certified enclosures of f(x0), f'(x0), ..., f^(order)(x0).

    Returns mpmath intervals. Precision doubles from ``precision`` until all
    widths are below ``tol`` (relative for values above 1), up to the cap.
    """
    x0 = Fraction(x0)
    G = patch.local
    y = patch.value(x0)
    Ps = jet_polynomials(G, max(order, 1))
    gy = G.diff(_y)
    tol = mpmath.mpf(tol)
    bits = precision
    while bits <= MAX_PREC:
        ctx = ivctx(bits + 32)
        X = iv_rational(x0, ctx)
        Y = y.enclosure(bits, ctx)
        d = _iv_eval(gy, X, Y, ctx)
        if d.a <= 0 <= d.b:
            bits *= 2
            continue
        vals = [Y]
        for l in range(1, order + 1):
            vals.append(_iv_eval(Ps[l - 1], X, Y, ctx) / d ** (2 * l - 1))
        if all(width(v) <= tol * max(1, abs(mid(v))) for v in vals):
            return vals
        bits *= 2
    raise CertificationError("implicit jet did not reach the requested width")


def _derivative_sign(patch, x0, l, level, precision) -> int:
    """Sign of |f^(l)(x0)| - level, certified."""
    bits = precision
    while bits <= MAX_PREC:
        v = implicit_jet(patch, x0, l, tol=mpmath.mpf(2) ** (-bits // 2), precision=bits)[l]
        a = abs(v)
        if a.a > level:
            return 1
        if a.b < level:
            return -1
        bits *= 2
    raise CertificationError("derivative sits on the threshold")


@dataclass
class BPInterval:
    lo: AlgebraicNumber
    hi: AlgebraicNumber
    verdicts: dict

    def to_dict(self):
        return {"lo": float(self.lo), "hi": float(self.hi), "verdicts": {str(k): v for k, v in self.verdicts.items()}}


def bp_subdivide(patch: CurvePatch, thresholds, precision: int = DEFAULT_PREC):
    """Split the patch interval so each |f^(l)| stays on one side of C_l.

    Cuts come from the resultant of g with P_l -+ C_l g_y^(2l-1); pieces
    whose verdicts agree are merged again. Returns (pieces, bound, within)
    with bound = 2 d^2 K^2.
    """
    K = len(thresholds)
    if K < 1 or any(Fraction(c) <= 0 for c in thresholds):
        raise PreconditionError("need K >= 1 positive thresholds")
    G = patch.local
    gy = G.diff(_y)
    Ps = jet_polynomials(G, K)
    cuts = []
    for l, C in enumerate(thresholds, 1):
        C = to_rational(Fraction(C))
        for sign in (1, -1):
            Q = Ps[l - 1] - sign * C * gy ** (2 * l - 1)
            r = _res_y(G, Q)
            if r.is_zero or r.degree() <= 0:
                continue
            for a in real_roots(r):
                if patch.lo < a and a < patch.hi:
                    cuts.append(a)
    cuts.sort(key=lambda a: float(a))
    uniq = []
    for a in cuts:
        if uniq and not (uniq[-1] < a):
            continue
        uniq.append(a)
    ends = [patch.lo] + uniq + [patch.hi]
    pieces = []
    for a, b in zip(ends, ends[1:]):
        m = point_between(a, b)
        verdict = {}
        for l, C in enumerate(thresholds, 1):
            s = _derivative_sign(patch, m, l, mpmath.mpf(Fraction(C).numerator) / Fraction(C).denominator, precision)
            verdict[l] = ">=" if s > 0 else "<="
        if pieces and pieces[-1].verdicts == verdict:
            pieces[-1] = BPInterval(pieces[-1].lo, b, verdict)
        else:
            pieces.append(BPInterval(a, b, verdict))
    bound = 2 * patch.degree**2 * K**2
    return pieces, bound, len(pieces) <= bound


# -- sublevel sets ---------------------------------------------------------------


def _as_univariate(h) -> Poly:
    if isinstance(h, Poly):
        return univariate(h)
    if isinstance(h, (list, tuple)):
        return Poly.from_list([to_rational(Fraction(c)) for c in reversed(h)], T, domain=QQ)
    expr = sympy.sympify(h)
    syms = list(expr.free_symbols)
    return univariate(expr, syms[0] if syms else None)


@dataclass
class SublevelResult:
    measure: float
    enclosure: object
    bound: float
    passed: bool


def _pieces(ps, a: Fraction, b: Fraction):
    pts = [AlgebraicNumber.rational(a), AlgebraicNumber.rational(b)]
    for p in ps:
        if not p.is_zero and p.degree() > 0:
            pts += [r for r in real_roots(p, a, b) if r.exact not in (a, b)]
    pts.sort(key=lambda r: float(r))
    out = []
    for u, v in zip(pts, pts[1:]):
        if u < v:
            out.append((u, v))
    return out


def sublevel_measure(h, interval, delta, k: int, C, precision: int = DEFAULT_PREC) -> SublevelResult:
    """Lebesgue measure of {x in I : |h(x)| <= delta} and the derivative bound.

    Requires |h^(k)| >= C on I, which is certified first. The bound checked
    is 2e((k+1)!)^(1/k) (delta/C)^(1/k).
    """
    H = _as_univariate(h)
    a, b = (Fraction(v) for v in interval)
    delta, C = Fraction(delta), Fraction(C)
    if not a < b or delta < 0 or C <= 0 or k < 1:
        raise PreconditionError("need a < b, delta >= 0, C > 0, k >= 1")
    Hk = H
    for _ in range(k):
        Hk = Hk.diff(T)
    c2 = to_rational(C)
    for u, v in _pieces([Hk**2 - c2**2], a, b):
        m = point_between(u, v)
        if abs(to_fraction(Hk.eval(to_rational(m)))) < C:
            raise PreconditionError("|h^(k)| >= C does not hold on the interval")
    d = to_rational(delta)
    ctx = ivctx(precision + 32)
    total = ctx.mpf(0)
    for u, v in _pieces([H - d, H + d], a, b):
        m = point_between(u, v)
        if abs(to_fraction(H.eval(to_rational(m)))) <= delta:
            total += v.enclosure(precision, ctx) - u.enclosure(precision, ctx)
    total = ctx.mpf([max(total.a, 0), total.b])
    with mpmath.workprec(precision):
        bound = 2 * mpmath.e * mpmath.factorial(k + 1) ** (mpmath.mpf(1) / k) * (
            mpmath.mpf(delta.numerator) / delta.denominator / (mpmath.mpf(C.numerator) / C.denominator)
        ) ** (mpmath.mpf(1) / k)
        passed = total.b <= bound
        return SublevelResult(float(mid(total)), total, float(bound), bool(passed))


# -- dual curve ------------------------------------------------------------------


@dataclass
class DualValue:
    y: Fraction
    h: object
    g: object
    g1: object
    g2: object


def _exact(m) -> Fraction:
    """Exact value of a binary float (an interval endpoint may arrive as a point interval)."""
    with mpmath.workprec(getattr(getattr(m, "ctx", None), "prec", 53) + 8):
        sign, man, exp, _ = mpmath.mpf(m)._mpf_
    return (-1) ** sign * Fraction(man) * Fraction(2) ** exp


def _fprime_monotone(patch: CurvePatch, precision: int) -> int:
    """Sign of f'' on the patch, after certifying it never changes."""
    G = patch.local
    P2 = jet_polynomials(G, 2)[1]
    r = _res_y(G, P2)
    cuts = []
    if not r.is_zero and r.degree() > 0:
        cuts = [a for a in real_roots(r) if patch.lo < a and a < patch.hi]
    cuts.sort(key=lambda a: float(a))
    ends = [patch.lo] + cuts + [patch.hi]
    signs = set()
    for u, v in zip(ends, ends[1:]):
        if not u < v:
            continue
        m = point_between(u, v)
        bits = precision
        while True:
            f2 = implicit_jet(patch, m, 2, tol=mpmath.mpf(2) ** (-bits // 2), precision=bits)[2]
            if f2.a > 0 or f2.b < 0:
                signs.add(1 if f2.a > 0 else -1)
                break
            bits *= 2
            if bits > MAX_PREC:
                raise CertificationError("could not sign f''")
    if len(signs) != 1:
        raise PreconditionError("f' is not invertible on this patch (f'' changes sign)")
    return signs.pop()


def legendre_dual(patch: CurvePatch, y0, precision: int = DEFAULT_PREC, steps: int = 80) -> DualValue:
    """g(y) = y h(y) - f(h(y)) and its first two derivatives, h = (f')^-1."""
    y0 = Fraction(y0)
    sgn = _fprime_monotone(patch, precision)
    lo, hi = patch.inner()

    def side(x):
        # sign of f'(x) - y0 times the monotonicity sign
        bits = precision
        while bits <= MAX_PREC:
            v = implicit_jet(patch, x, 1, tol=mpmath.mpf(2) ** (-bits // 2), precision=bits)[1]
            if _exact(v.a) > y0:
                return sgn
            if _exact(v.b) < y0:
                return -sgn
            bits *= 2
        return 0

    s_lo, s_hi = side(lo), side(hi)
    if s_lo > 0 or s_hi < 0:
        raise PreconditionError(f"slope {y0} is not attained on the patch")
    for _ in range(steps):
        if s_lo == 0:
            hi = lo
            break
        if s_hi == 0:
            lo = hi
            break
        m = (lo + hi) / 2
        s = side(m)
        if s == 0:
            lo = hi = m
            break
        if s < 0:
            lo = m
        else:
            hi = m
    x = (lo + hi) / 2
    jet = implicit_jet(patch, x, 2, precision=precision)
    with mpmath.workprec(precision):
        X = mpmath.mpf(x.numerator) / x.denominator
        Y = mpmath.mpf(y0.numerator) / y0.denominator
        f0, f2 = mid(jet[0]), mid(jet[2])
        # the slope error at x is below 2**-steps; the formulas below are
        # evaluated at x itself
        g = Y * X - f0
        return DualValue(y0, X, g, X, 1 / f2)
