import csv
import io
import math
from fractions import Fraction

import pytest

from oracles import Grid
from nearcurve import experiments
from nearcurve.counting import CountQuery
from nearcurve.errors import PreconditionError
from nearcurve.experiments import (
    SLACK, BoundSpec, bound_exponents, bound_terms, fit_and_report, fit_exponent, tangent_exponent,
)

# (B, N, N*) for F5 at tau = 5/2; frozen from the full scan, the B = 64 row re-derived by the grid oracle
GOLDEN_F5_TAU25 = [(64, 1980, 12), (128, 5520, 36), (256, 15168, 72), (512, 41604, 84), (1024, 122052, 156)]


def rows(text):
    return [(int(r["B"]), int(r["N"]), int(r["N_star"])) for r in csv.DictReader(io.StringIO(text))]


def test_bound_examples():
    assert bound_exponents(BoundSpec("thm-main", 5, 4)) == Fraction(25, 24)
    assert bound_exponents(BoundSpec("thm-main", 5, 2)) == Fraction(71, 40)
    assert bound_exponents(BoundSpec("cor-threshold", 16)) == 6
    assert bound_exponents(BoundSpec("cor-threshold", 7)) == Fraction(9, 2)
    assert abs(bound_exponents(BoundSpec("cor-threshold", 10)) - 1.5 * math.sqrt(10)) < 1e-12
    assert tangent_exponent(Fraction(5, 2), 5) == Fraction(3, 2)


def test_bound_preconditions():
    with pytest.raises(PreconditionError):
        BoundSpec("thm-main", 4, 3)
    with pytest.raises(PreconditionError):
        BoundSpec("thm-main", 5, Fraction(3, 2))
    with pytest.raises(PreconditionError):
        BoundSpec("nonsense", 5, 3)


def tau_grid():
    return [Fraction(n, 8) for n in range(16, 97)]


def test_generic_below_main():
    for k in range(5, 13):
        for tau in tau_grid():
            assert bound_exponents(BoundSpec("thm-generic", k, tau)) <= bound_exponents(BoundSpec("thm-main", k, tau))


def test_large_tau_clause():
    for k in range(5, 13):
        for tau in [t for t in tau_grid() if t >= Fraction(3721, 1000)] + [Fraction(3721, 1000)]:
            t = bound_terms(k, tau)
            assert bound_exponents(BoundSpec("thm-main", k, tau)) == max(t[0], t[3])


def test_fit_synthetic():
    f = fit_exponent([(b, round(b**1.5)) for b in (4, 16, 64, 256)])
    assert abs(f.slope - 1.5) < 1e-9 and f.residual < 1e-9
    with pytest.raises(PreconditionError):
        fit_exponent([(64, 10)])
    with pytest.raises(PreconditionError):
        fit_exponent([(64, 10), (64, 11), (128, 3)])


def test_single_b_plan(F5):
    with pytest.raises(PreconditionError):
        fit_and_report([CountQuery(F5, 64, Fraction(5, 2))])
    with pytest.raises(PreconditionError):
        fit_and_report([])


def test_golden_rows(F5, F5_flexes):
    plan = [CountQuery(F5, B, Fraction(5, 2)) for B, _, _ in GOLDEN_F5_TAU25[:3]]
    res = fit_and_report(plan, F5_flexes, form_id="F5")
    assert rows(res.csv) == GOLDEN_F5_TAU25[:3]
    assert res.slack == SLACK
    # the B = 64 row from the grid oracle: N* drops points on x + y = 0, x = z, y = z
    pts = Grid(F5, 64).points_gamma(64, 2**15)
    n_star = sum(1 for x, y, z in pts if x + y != 0 and x != z and y != z)
    assert (64, len(pts), n_star) == GOLDEN_F5_TAU25[0]


def test_deterministic_csv(F5, F5_flexes, tmp_path):
    plan = [CountQuery(F5, B, Fraction(5, 2)) for B in (16, 32, 64)]
    a = fit_and_report(plan, F5_flexes, csv_path=tmp_path / "a.csv", plot_path=tmp_path / "a.svg")
    b = fit_and_report(plan[::-1], F5_flexes, csv_path=tmp_path / "b.csv", threads=4)
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
    assert a.fit == b.fit
    svg = (tmp_path / "a.svg").read_text()
    assert svg.startswith("<svg") and svg.rstrip().endswith("</svg>")


def test_partial_csv_flushed(F5, F5_flexes, tmp_path, monkeypatch):
    real = experiments.count_gamma
    calls = []

    def failing(q, *args, **kw):
        calls.append(q.B)
        if len(calls) == 3:
            raise RuntimeError("worker died")
        return real(q, *args, **kw)

    monkeypatch.setattr(experiments, "count_gamma", failing)
    out = tmp_path / "part.csv"
    plan = [CountQuery(F5, B, Fraction(5, 2)) for B in (16, 32, 64)]
    with pytest.raises(RuntimeError):
        fit_and_report(plan, F5_flexes, csv_path=out)
    assert [b for b, _, _ in rows(out.read_text())] == [16, 32]


def test_without_flexes_fits_n(F5):
    res = fit_and_report([CountQuery(F5, B, Fraction(5, 2)) for B in (16, 32, 64)])
    assert [n for _, n in res.fit.samples] == [r.N for r in res.reports]
    assert res.bound == bound_exponents(BoundSpec("thm-main", 5, Fraction(5, 2)))
