import os
import subprocess
import sys

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import form
from nearcurve import _pykernels, kernels
from nearcurve.counting import form_table

needs_c = pytest.mark.skipif(kernels._ckernels is None, reason="compiled kernels not built")


def brute_window(c, T, lo, hi):
    out = []
    for z in range(lo, hi + 1):
        v = sum(a * z**i for i, a in enumerate(c))
        if abs(v) <= T:
            out.append(z)
    return out


def flatten(intervals):
    return [z for a, b in intervals for z in range(a, b + 1)]


@settings(max_examples=200, deadline=None)
@given(st.lists(st.integers(-40, 40), min_size=1, max_size=7), st.integers(0, 200), st.integers(-30, 0), st.integers(0, 30))
def test_solve_window_pure(c, T, lo, hi):
    assert flatten(_pykernels.solve_window(c, T, lo, hi)) == brute_window(c, T, lo, hi)


@needs_c
@settings(max_examples=200, deadline=None)
@given(st.lists(st.integers(-40, 40), min_size=1, max_size=7), st.integers(0, 200), st.integers(-30, 0), st.integers(0, 30))
def test_solve_window_compiled(c, T, lo, hi):
    assert kernels._ckernels.solve_window(c, T, lo, hi) == _pykernels.solve_window(c, T, lo, hi)


@pytest.mark.parametrize("name", ["F5", "Qp", "E3", "F5b", "F5c"])
@pytest.mark.parametrize("B,T", [(6, 0), (9, 3), (12, 40)])
def test_scan_pure_vs_naive(name, B, T):
    F = form(name)
    A = form_table(F)
    fast = _pykernels.scan(A, F.degree, B, T, -B, B, True, True)
    slow = _pykernels.scan_naive(A, F.degree, B, T, -B, B, True, True)
    assert fast[0] == slow[0]
    assert sorted(fast[1]) == sorted(slow[1])


@needs_c
@pytest.mark.parametrize("name", ["F5", "Qp", "E3", "F5b", "F5c"])
@pytest.mark.parametrize("threads", [1, 3])
def test_scan_compiled_vs_pure(name, threads):
    F = form(name)
    A = form_table(F)
    B, T = 20, 30
    n_c, s_c, tag = kernels.scan(A, F.degree, B, T, -B, B, True, True, threads=threads, backend="cython")
    n_p, s_p, _ = kernels.scan(A, F.degree, B, T, -B, B, True, True, backend="python")
    assert tag == "cython"
    assert n_c == n_p and s_c == s_p


def test_int128_guard():
    assert kernels.fits_int128([1, 1, -1], 5, 1024, 10**6)
    assert not kernels.fits_int128([1, 1, -1], 5, 10**9, 10**6)
    assert not kernels.fits_int128([10**20], 5, 10, 1)


def test_big_inputs_fall_back():
    F = form("F5")
    n, _, tag = kernels.scan(form_table(F), 5, 3, 10**30, -3, 3, True, False)
    assert tag == "python" and n > 0


def test_pure_python_env_switch():
    env = dict(os.environ, NEARCURVE_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "from nearcurve import kernels; print(kernels.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == _pykernels.BACKEND
