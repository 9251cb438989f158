from fractions import Fraction

import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from oracles import gamma_first_min, sup_minima, sup_minima_box
from nearcurve.counting import CountQuery
from nearcurve.detmethod import BoxCover, Box, run_pipeline
from nearcurve.errors import PreconditionError
from nearcurve.lattice import (
    IntLattice, dyadic_level, gamma_lattice, gamma_minima, minima_histogram, sup, successive_minima,
)

# F5, tau = 5/2, B = 256, pipeline cover; frozen from the pipeline plus the box-search minima oracle
GOLDEN_HIST_B256 = {4: 8, 5: 23, 6: 14, 7: 12, 8: 9}
# count / (B^2 log2 B / L^2) over F5 covers at B = 2^6..2^10; observed at most 1.5
HIST_CONSTANT = 2


def int_basis(n, lo=-9, hi=9):
    row = st.lists(st.integers(lo, hi), min_size=n, max_size=n)
    return st.lists(row, min_size=n, max_size=n)


def nonsingular(rows):
    try:
        IntLattice(tuple(map(tuple, rows)))
    except PreconditionError:
        return False
    return True


def check_result(L, res):
    n = L.rank
    assert list(res.minima) == sorted(res.minima)
    for v, m in zip(res.vectors, res.minima):
        assert L.contains(v) and sup(v) == m
    lo = L.det / (2 if n == 2 else 6)
    assert lo <= res.product <= L.det
    if res.basis is not None:
        assert [sup(v) for v in res.basis] == list(res.minima)
        assert IntLattice(res.basis).det == L.det


def test_gamma_example():
    L, res = gamma_minima(4, 16, 0, 0)
    assert res.minima == (Fraction(1, 16), Fraction(1, 4), Fraction(1, 4))
    assert res.product == Fraction(4**2, 16**3) == L.det


def test_unit_lattices():
    assert successive_minima(IntLattice(((1, 0, 0), (0, 1, 0), (0, 0, 1)))).minima == (1, 1, 1)
    assert successive_minima(IntLattice(((1, 0), (0, 1)))).minima == (1, 1)


def test_mod3_lattice():
    # {(s, t): t = 0 mod 3}, given by a skewed basis
    res = successive_minima(IntLattice(((1, 3), (2, 3))))
    assert res.minima == (1, 3)
    assert set(res.basis) == {(1, 0), (0, 3)}


def test_invalid_lattices():
    with pytest.raises(PreconditionError):
        IntLattice(((1, 2), (2, 4)))
    with pytest.raises(PreconditionError):
        IntLattice(((1,),))
    with pytest.raises(PreconditionError):
        gamma_lattice(0, 4, 0, 0)


@settings(max_examples=120, deadline=None)
@given(int_basis(2, -30, 30))
def test_rank2_against_box_search(rows):
    assume(nonsingular(rows))
    L = IntLattice(tuple(map(tuple, rows)))
    res = successive_minima(L)
    check_result(L, res)
    assert tuple(int(m) for m in res.minima) == sup_minima_box(rows)


@settings(max_examples=120, deadline=None)
@given(int_basis(3))
def test_rank3_against_box_search(rows):
    assume(nonsingular(rows))
    L = IntLattice(tuple(map(tuple, rows)))
    res = successive_minima(L)
    check_result(L, res)
    assert tuple(int(m) for m in res.minima) == sup_minima_box(rows)


def test_coefficient_scan_agrees():
    rows = [[3, 1, 4], [1, 5, 9], [2, 6, 5]]
    assert sup_minima(rows, 4) == sup_minima_box(rows) == tuple(successive_minima(IntLattice(rows)).minima)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 40), st.integers(1, 300), st.integers(-60, 60), st.integers(-60, 60))
def test_gamma_determinant(M, B, r, s):
    L, res = gamma_minima(M, B, r, s)
    assert L.det == Fraction(M * M, B**3)
    check_result(L, res)
    assert res.minima[0] >= Fraction(1, B)
    assert res.minima[0] == gamma_first_min(M, B, r, s)


def test_dyadic_level():
    assert dyadic_level(Fraction(1)) == 0
    assert dyadic_level(Fraction(3, 2)) == 0
    assert dyadic_level(Fraction(2)) == 1
    assert dyadic_level(Fraction(1, 3)) == -2
    assert dyadic_level(Fraction(255)) == 7


def test_synthetic_single_bucket():
    cover = BoxCover(8, 1, [Box("z", 0, 0, [(0, 0, 1)]), Box("x", 0, 0, [(1, 0, 0)]), Box("y", 0, 0, [(0, 1, 0)])])
    h = minima_histogram(cover, 64)
    assert len(h.counts) == 1 and sum(h.counts.values()) == 3


def test_histogram_golden(F5):
    B = 256
    r = run_pipeline(CountQuery(F5, B, Fraction(5, 2)))
    h = minima_histogram(r.cover, B)
    assert h.counts == GOLDEN_HIST_B256
    assert all(g >= Fraction(1, B) for g in h.gamma1)
    assert all(c <= HIST_CONSTANT * h.bound_value(j) for j, c in h.counts.items())
    assert h.csv().splitlines()[0] == "L_exponent,count,bound_value"
    assert h.csv().splitlines()[1] == "4,8,2048"
    N = r.cover.denominator
    assert h.gamma1 == [gamma_first_min(N, B, box.v, box.w) for box in r.cover.boxes]
