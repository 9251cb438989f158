"""Kernel selection: the compiled core when built and safe, else pure Python.

Set ``NEARCURVE_PURE_PYTHON=1`` to force the fallback.
"""
from __future__ import annotations

import os
from math import factorial

from . import _pykernels

try:
    if os.environ.get("NEARCURVE_PURE_PYTHON") == "1":
        raise ImportError("pure Python requested")
    from . import _ckernels
except ImportError:  # extension not built
    _ckernels = None

BACKEND = _ckernels.BACKEND if _ckernels is not None else _pykernels.BACKEND

_LIMIT = 1 << 120
_I64 = 1 << 62


def fits_int128(coeffs, k, B, T):
    """True if every intermediate of a fibre solve stays inside 128 bits.

    ``coeffs`` are the form's integer coefficients. Fibre coefficients are
    bounded by S*B^k (S = sum of |coeffs|), derivatives add at most k!, Horner
    partial sums at most another factor (k+1).
    """
    if k + 1 > 24 or T >= _I64 or B >= _I64:
        return False
    S = sum(abs(c) for c in coeffs)
    if S >= _I64:
        return False
    return (k + 1) * factorial(k) * S * max(B, 2) ** k * 4 < _LIMIT


def scan(A, k, B, T, x_lo, x_hi, annulus, collect, threads=1, backend=None):
    """Dispatch to the compiled or pure scan; returns (count, solutions, tag)."""
    flat = [v for row in A for v in row]
    use_c = _ckernels is not None and backend != "python" and fits_int128(flat, k, B, T)
    if backend == "cython" and not use_c:
        raise RuntimeError("compiled kernel unavailable for this input")
    if use_c:
        n, sols = _ckernels.scan(A, k, B, T, x_lo, x_hi, annulus, collect, threads)
        return n, sols, "cython"
    n, sols = _pykernels.scan(A, k, B, T, x_lo, x_hi, annulus, collect)
    return n, sols, "python"


def solve_window(c, T, lo, hi):
    if _ckernels is not None:
        B = max(abs(lo), abs(hi), 2)
        if len(c) <= 24 and all(abs(v) < _I64 for v in c) and T < _I64:
            k = max(len(c) - 1, 0)
            if (k + 1) * factorial(k) * sum(abs(v) for v in c) * B**k * 4 < _LIMIT:
                return _ckernels.solve_window(c, T, lo, hi)
    return _pykernels.solve_window(c, T, lo, hi)
