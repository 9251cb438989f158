import math
from fractions import Fraction

import mpmath
import pytest

from conftest import form
from nearcurve.errors import PreconditionError
from nearcurve.forms import BivariatePolynomial, evaluate, hessian_form
from nearcurve.geometry import (
    CurvePatch, bp_subdivide, flex_report, implicit_jet, legendre_dual, mid, sublevel_measure,
    subdivide_unit_square,
)


def fifth_patch():
    return [p for p in subdivide_unit_square(BivariatePolynomial.parse("x^5+y^5-1")) if p.axis == "x"][0]


def f5(x):
    return (1 - x**5) ** 0.2


def test_flexes_F5(F5_flexes):
    R = F5_flexes
    assert R.nu_max == 5
    assert sorted(R.rational_tangents) == sorted([(0, 1, -1), (1, 0, -1), (1, 1, 0)])
    pts = {f.rational_point for f in R.flexes}
    assert {(0, 1, 1), (1, 0, 1), (1, -1, 0)} <= {tuple(p) for p in pts if p} | {tuple(-v for v in p) for p in pts if p}
    assert R.count <= 3 * 5 * 3
    for c in R.classes:
        assert 3 <= c.contact <= 5


def test_flex_points_are_zeros(F5_flexes, F5):
    H = hessian_form(F5)
    for f in F5_flexes.flexes:
        if f.rational_point:
            assert evaluate(F5, f.rational_point) == 0
            assert evaluate(H, f.rational_point) == 0


def test_flexes_cubic(E3):
    R = flex_report(E3)
    assert R.nu_max == 3
    assert R.count <= 9
    assert all(c.contact == 3 for c in R.classes)


def test_conjugate_product_vanishes_on_tangents(F5_flexes):
    P = F5_flexes.conjugate_product_form
    for t in F5_flexes.rational_tangents:
        # a point on the line a x + b y + c z = 0
        a, b, c = t
        p = (b, -a, 0) if (a or b) else (1, 0, 0)
        assert P(*p) == 0


def test_report_json_stable(F5_flexes):
    import json

    d = F5_flexes.to_dict()
    assert json.dumps(d) == json.dumps(flex_report(form("F5")).to_dict())


def test_circle_patches():
    P = subdivide_unit_square(BivariatePolynomial.parse("x^2+y^2-1/2"))
    assert len(P) == 8
    for p in P:
        lo, hi = p.inner()
        for i in range(1, 40):
            x = lo + (hi - lo) * Fraction(i, 40)
            f0, f1 = (mid(v) for v in implicit_jet(p, x, 1, tol=1e-12))
            assert abs(f0) <= 1 and abs(f1) <= 1 + 1e-12


def test_fifth_root_patches():
    P = subdivide_unit_square(BivariatePolynomial.parse("x^5+y^5-1"))
    ends = sorted(float(p.hi) for p in P)
    c = 0.5 ** 0.2
    assert all(abs(e - c) < 1e-12 for e in ends)
    assert all(p.lo.exact == 0 for p in P)


def test_jet_closed_forms():
    P = [p for p in subdivide_unit_square(BivariatePolynomial.parse("x^2+y^2-1/2")) if p.axis == "x" and p.rank == 1]
    p = [q for q in P if q.contains(0)][0]
    f0, f1, f2 = (mid(v) for v in implicit_jet(p, 0, 2))
    with mpmath.workprec(200):
        r = mpmath.sqrt(mpmath.mpf(1) / 2)
        assert abs(f0 - r) < 1e-25 and abs(f1) < 1e-25 and abs(f2 + 2 * r) < 1e-25
    jet = [mid(v) for v in implicit_jet(fifth_patch(), 0, 5)]
    assert abs(jet[0] - 1) < 1e-25
    assert all(abs(v) < 1e-25 for v in jet[1:5])
    assert abs(jet[5] + 24) < 1e-20


def test_jet_finite_differences():
    p = fifth_patch()
    h = 1e-7
    for x in (Fraction(1, 10), Fraction(1, 3), Fraction(7, 10)):
        jet = [float(mid(v)) for v in implicit_jet(p, x, 2)]
        xf = float(x)
        assert abs(jet[0] - f5(xf)) < 1e-14
        fd = (f5(xf + h) - f5(xf - h)) / (2 * h)
        assert abs(jet[1] - fd) <= 1e-6 * max(1, abs(jet[1]))


def test_jet_outside_patch():
    with pytest.raises(PreconditionError):
        implicit_jet(fifth_patch(), Fraction(9, 10), 1)


def test_bp_subdivide_fifth_root():
    pieces, bound, ok = bp_subdivide(fifth_patch(), [1, 1, 1])
    assert ok and bound == 450 and len(pieces) == 3
    table = [tuple(pc.verdicts[l] for l in (1, 2, 3)) for pc in pieces]
    assert table == [("<=", "<=", "<="), ("<=", "<=", ">="), ("<=", ">=", ">=")]
    # check the verdicts against float derivatives of (1 - x^5)^(1/5)
    mpmath.mp.dps = 30
    for pc in pieces:
        lo, hi = float(pc.lo), float(pc.hi)
        for i in range(1, 10):
            x = lo + (hi - lo) * i / 10
            for l in (1, 2, 3):
                d = abs(mpmath.diff(lambda t: (1 - t**5) ** (mpmath.mpf(1) / 5), x, l))
                assert (d >= 1) == (pc.verdicts[l] == ">=")


def test_bp_subdivide_circle_bound():
    P = subdivide_unit_square(BivariatePolynomial.parse("x^2+y^2-1/2"))
    for p in P:
        pieces, bound, ok = bp_subdivide(p, [1, 1])
        assert bound == 32 and ok and len(pieces) <= 32


def test_bp_single_interval():
    p = CurvePatch.single_branch(BivariatePolynomial.parse("y-x^2/2"), 0, 1)
    pieces, _, _ = bp_subdivide(p, [2, Fraction(1, 2)])
    assert [pc.verdicts[2] for pc in pieces] == [">="]


def test_sublevel_examples():
    r = sublevel_measure("x**2", (-1, 1), Fraction(1, 100), 2, 2)
    assert abs(r.measure - 0.2) < 1e-12 and r.passed
    assert abs(r.bound - 2 * math.e * math.sqrt(6) * math.sqrt(0.005)) < 1e-9
    r = sublevel_measure("x", (-1, 1), Fraction(1, 10), 1, 1)
    assert abs(r.measure - 0.2) < 1e-12 and r.measure <= 2 * math.e * 2 * 0.1
    assert sublevel_measure("x**2", (-1, 1), 0, 2, 2).measure == 0


def test_sublevel_requires_derivative_bound():
    with pytest.raises(PreconditionError):
        sublevel_measure("x**3", (-1, 1), Fraction(1, 10), 2, 1)


def test_legendre_parabola():
    p = CurvePatch.single_branch(BivariatePolynomial.parse("y-x^2/2"), -1, 1)
    for y in (Fraction(-1, 2), Fraction(0), Fraction(1, 3)):
        d = legendre_dual(p, y)
        assert abs(d.g - float(y) ** 2 / 2) < 1e-12
        assert abs(d.g2 - 1) < 1e-12


def test_legendre_rejects_flex():
    p = CurvePatch.single_branch(BivariatePolynomial.parse("y-x^3"), Fraction(-1, 2), Fraction(1, 2))
    with pytest.raises(PreconditionError):
        legendre_dual(p, 0)
