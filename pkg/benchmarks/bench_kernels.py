"""Compiled vs pure-Python fibre scan on F5 = x^5 + y^5 - z^5.

    python3 benchmarks/bench_kernels.py [--B 64,128,256] [--gamma 5/2] [--repeat 3]

Prints one CSV row per (backend, B) with the best wall time of the repeats,
and checks that both backends return the same count.
"""
import argparse
import time
from fractions import Fraction

from nearcurve import kernels
from nearcurve.counting import CountQuery, form_table
from nearcurve.forms import IntegerForm


def best_time(fn, repeat):
    best, out = float("inf"), None
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t)
    return best, out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--form", default="x^5+y^5-z^5")
    ap.add_argument("--B", default="64,128,256")
    ap.add_argument("--gamma", type=Fraction, default=Fraction(5, 2))
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    if kernels._ckernels is None:
        print("compiled kernels not built; only the fallback is available")
    F = IntegerForm.parse(args.form, nvars=3)
    A = form_table(F)
    print("backend,B,count,seconds,speedup")
    for B in [int(b) for b in args.B.split(",")]:
        T = CountQuery(F, B, args.gamma).T
        t_py, (n_py, _, _) = best_time(
            lambda: kernels.scan(A, F.degree, B, T, -B, B, True, False, backend="python"), args.repeat)
        print(f"python,{B},{n_py},{t_py:.4f},1.00")
        if kernels._ckernels is None:
            continue
        t_c, (n_c, _, _) = best_time(
            lambda: kernels.scan(A, F.degree, B, T, -B, B, True, False, backend="cython"), args.repeat)
        assert n_c == n_py, (B, n_c, n_py)
        print(f"cython,{B},{n_c},{t_c:.4f},{t_py / t_c:.2f}")


if __name__ == "__main__":
    main()
