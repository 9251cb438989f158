"""Exact counts of primitive integer points on and near plane curves."""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import ceil, floor, gcd

import numpy as np
import sympy

from . import kernels
from ._pykernels import scan_naive
from .algebraic import to_rational, univariate
from .errors import PreconditionError
from .forms import IntegerForm, SingularityVerdict, evaluate, singularity_scan

_X, _Y = sympy.symbols("x y")


def iroot(n: int, q: int) -> int:
    """floor(n ** (1/q)) for integers n >= 0, q >= 1."""
    if n < 0 or q < 1:
        raise ValueError("need n >= 0 and q >= 1")
    if n < 2 or q == 1:
        return n
    x = 1 << ((n.bit_length() + q - 1) // q)  # >= the root
    while True:
        y = ((q - 1) * x + n // x ** (q - 1)) // q
        if y >= x:
            break
        x = y
    while x**q > n:
        x -= 1
    while (x + 1) ** q <= n:
        x += 1
    return x


def threshold(B: int, gamma) -> int:
    """floor(B ** gamma) for rational gamma >= 0, exactly."""
    gamma = Fraction(gamma)
    if gamma < 0:
        raise PreconditionError("gamma must be non-negative")
    return iroot(B**gamma.numerator, gamma.denominator)


@dataclass(frozen=True)
class CountQuery:
    F: IntegerForm
    B: int
    gamma: Fraction

    def __post_init__(self):
        object.__setattr__(self, "gamma", Fraction(self.gamma))
        if self.F.nvars != 3:
            raise PreconditionError("counting needs a ternary form")
        if self.B < 1:
            raise PreconditionError("B must be at least 1")
        if not 0 <= self.gamma < self.F.degree:
            raise PreconditionError("need 0 <= gamma < k")

    @property
    def tau(self) -> Fraction:
        return self.F.degree - self.gamma

    @property
    def T(self) -> int:
        return threshold(self.B, self.gamma)


@dataclass
class CountReport:
    form_id: str
    B: int
    gamma: Fraction
    tau: Fraction
    N: int
    N_star: int | None
    per_line: dict = field(default_factory=dict)
    overlap: int = 0
    overcount: int = 0
    strategy: str = ""
    wall_ms: float | None = None
    override: bool = False

    @property
    def excluded_total(self) -> int | None:
        return None if self.N_star is None else self.N - self.N_star

    CSV_HEADER = "form_id,B,gamma,tau,N,N_star,excluded_total,overlap,strategy,wall_ms"

    def csv_row(self) -> str:
        vals = [
            self.form_id,
            self.B,
            self.gamma,
            self.tau,
            self.N,
            "" if self.N_star is None else self.N_star,
            "" if self.N_star is None else self.excluded_total,
            self.overlap,
            self.strategy,
            "" if self.wall_ms is None else f"{self.wall_ms:.1f}",
        ]
        return ",".join(str(v) for v in vals)


def form_table(F: IntegerForm):
    """A[j][i] = coefficient of x^i y^(k-j-i) z^j."""
    k = F.degree
    A = [[0] * (k - j + 1) for j in range(k + 1)]
    for (a, b, c), v in F.items():
        A[c][a] = v
    return A


def fiber(F: IntegerForm, x: int, y: int) -> list[int]:
    """Coefficients (constant first) of z -> F(x, y, z)."""
    c = [0] * (F.degree + 1)
    for (a, b, e), v in F.items():
        c[e] += v * x**a * y**b
    return c


def solve_z_intervals(F: IntegerForm, x: int, y: int, bound: int, lo=None, hi=None):
    """Disjoint integer intervals of z with |F(x, y, z)| <= bound."""
    c = fiber(F, x, y)
    while c and c[-1] == 0:
        c.pop()
    if lo is None or hi is None:
        if len(c) <= 1:
            if abs(c[0] if c else 0) <= bound:
                raise PreconditionError("F(x, y, .) is a constant within the bound: infinitely many z")
            return []
        # Cauchy bound for the roots of c -+ bound
        lead = abs(c[-1])
        R = 1 + (max(abs(v) for v in c[:-1]) + bound) // lead + 1
        lo, hi = -R, R
    return kernels.solve_window(c, bound, lo, hi)


def solve_z_range(F: IntegerForm, x: int, y: int, bound: int) -> set[int]:
    """The set of integers z with |F(x, y, z)| <= bound."""
    out = set()
    for a, b in solve_z_intervals(F, x, y, bound):
        out.update(range(a, b + 1))
    return out


@lru_cache(maxsize=64)
def _verdict(F: IntegerForm) -> str:
    return singularity_scan(F).status


def _check_form(F: IntegerForm, override: bool) -> bool:
    status = _verdict(F)
    if status == SingularityVerdict.NONSINGULAR:
        return False
    if status == SingularityVerdict.INCONCLUSIVE and override:
        return True
    if override:
        return True
    raise PreconditionError(f"form is {status}; pass override to count anyway")


def enumerate_solutions(F, B, T, annulus, threads=1, strategy="isolate", backend=None):
    """All primitive solutions in scan order, plus the strategy tag."""
    A = form_table(F)
    if strategy == "naive":
        n, sols = scan_naive(A, F.degree, B, T, -B, B, annulus, True)
        return sols, "naive"
    n, sols, tag = kernels.scan(A, F.degree, B, T, -B, B, annulus, True, threads=threads, backend=backend)
    assert n == len(sols)
    return sols, f"isolate-{tag}"


def _verify(F, sols, B, T, annulus):
    half2 = B
    for p in sols:
        m = max(abs(p[0]), abs(p[1]), abs(p[2]))
        assert m <= B and (not annulus or 2 * m > half2)
        assert gcd(gcd(p[0], p[1]), p[2]) == 1
        assert abs(evaluate(F, p)) <= T


def count_gamma(
    q: CountQuery,
    flexes=None,
    threads: int = 1,
    strategy: str = "isolate",
    form_id: str = "",
    timing: bool = False,
    override: bool = False,
    verify: bool = True,
    backend=None,
    return_solutions: bool = False,
):
    """N_gamma(F, B) and, given a flex report, N*_gamma(F, B).

    Counts primitive (x, y, z) with B/2 < max|coord| <= B and |F| <= floor(B^gamma);
    antipodal points count separately. With ``return_solutions`` the pair
    (report, solutions) is returned.
    """
    overridden = _check_form(q.F, override)
    t0 = time.perf_counter()
    sols, tag = enumerate_solutions(q.F, q.B, q.T, True, threads, strategy, backend)
    if verify:
        _verify(q.F, sols, q.B, q.T, True)
    N = len(sols)
    N_star = None
    per_line: dict = {}
    overlap = overcount = 0
    if flexes is not None:
        lines_of = [flexes.classes[i] for i in range(len(flexes.classes))]
        N_star = 0
        for p in sols:
            hit = [i for i, c in enumerate(lines_of) if c.contains(p)]
            if not hit:
                N_star += 1
                continue
            for i in hit:
                label = flexes.class_label(i)
                per_line[label] = per_line.get(label, 0) + 1
            nlines = sum(1 if lines_of[i].rational_tangent() is not None else lines_of[i].degree for i in hit)
            if nlines > 1:
                overlap += 1
            overcount += len(hit) - 1
    wall = (time.perf_counter() - t0) * 1000 if timing else None
    report = CountReport(form_id, q.B, q.gamma, q.tau, N, N_star, per_line, overlap, overcount, tag, wall, overridden)
    if return_solutions:
        return report, sols
    return report


def count_on_curve(F: IntegerForm, B: int, threads: int = 1, strategy: str = "isolate") -> int:
    """Primitive zeros of F with every coordinate at most B in absolute value."""
    if F.nvars != 3:
        raise PreconditionError("counting needs a ternary form")
    if strategy == "naive":
        n, _ = scan_naive(form_table(F), F.degree, B, 0, -B, B, False, False)
        return n
    n, _, _ = kernels.scan(form_table(F), F.degree, B, 0, -B, B, False, False, threads=threads)
    return n


# -- rational points near a graph ---------------------------------------------------


def _branch_table(patch, lo: Fraction, hi: Fraction, n: int = 257):
    xs = [lo + (hi - lo) * i / (n - 1) for i in range(n)]
    ys = [float(patch.value(x)) for x in xs]
    return np.array([float(x) for x in xs]), np.array(ys)


def _side(patch, x: Fraction, t: Fraction) -> int:
    """Sign of f(x) - t, exactly, by counting roots of g(x, .) in [-1, t]."""
    if t < -1:
        return 1
    if t > 1:
        return -1
    fib = sympy.sqf_part(univariate(patch.local.as_expr().subs(_X, to_rational(x)), _Y))
    tr = to_rational(t)
    below = fib.count_roots(-1, tr)
    if below >= patch.rank + 1:
        if below == patch.rank + 1 and fib.eval(tr) == 0:
            return 0
        return -1
    return 1


def count_close_rationals(patch, interval, B: int, delta, return_points: bool = False):
    """Primitive (a, b, q) with B/2 <= q <= B, a/q in I and |b/q - f(a/q)| <= delta/B.

    Candidate values of f come from float Newton steps; every decision that
    the float cannot make with a wide margin, and every counted point, is
    settled exactly by root counting.
    """
    lo, hi = (Fraction(v) for v in interval)
    delta = Fraction(delta)
    if delta < 0 or B < 1:
        raise PreconditionError("need delta >= 0 and B >= 1")
    if not (patch.contains(lo) and patch.contains(hi)) or lo > hi:
        raise PreconditionError("interval must lie inside the patch")
    G = patch.local
    terms = [(i, j, float(c)) for (i, j), c in G.terms()]
    gy_terms = [(i, j - 1, j * c) for i, j, c in terms if j > 0]
    tx, ty = _branch_table(patch, lo, hi)
    eps = float(delta) / B
    points = []
    margin = 1e-7

    def ev(ts, X, Y):
        out = np.zeros_like(X)
        for i, j, c in ts:
            out = out + c * X**i * Y**j
        return out

    for q in range((B + 1) // 2, B + 1):
        a0 = ceil(lo * q)
        a1 = floor(hi * q)
        if a0 > a1:
            continue
        A = np.arange(a0, a1 + 1)
        X = A / q
        Y = np.interp(X, tx, ty)
        for _ in range(40):
            d = ev(gy_terms, X, Y)
            step = ev(terms, X, Y) / d
            Y = Y - step
            if np.all(np.abs(step) < 1e-15):
                break
        bad = ~np.isfinite(Y) | (np.abs(Y - np.interp(X, tx, ty)) > 0.05)
        blo = np.ceil(q * (Y - eps) - margin).astype(np.int64)
        bhi = np.floor(q * (Y + eps) + margin).astype(np.int64)
        for idx in range(len(A)):
            a = int(A[idx])
            x = Fraction(a, q)
            if bad[idx]:
                fv = patch.value(x)
                lo_b = floor(q * (float(fv) - eps)) - 1
                hi_b = ceil(q * (float(fv) + eps)) + 1
            else:
                lo_b, hi_b = int(blo[idx]), int(bhi[idx])
            for b in range(lo_b, hi_b + 1):
                if gcd(gcd(a, b), q) != 1:
                    continue
                t = Fraction(b, q)
                # f >= t - delta/B and f <= t + delta/B
                if _side(patch, x, t - delta / B) >= 0 and _side(patch, x, t + delta / B) <= 0:
                    points.append((a, b, q))
    if return_points:
        return len(points), points
    return len(points)


# -- parallelepipeds ---------------------------------------------------------------


def count_parallelepiped(H: IntegerForm, B1, B2, B3, alpha, beta, zeta, return_points: bool = False):
    """Primitive zeros of H with |x - alpha z| <= B1, |y - (beta - zeta alpha) z - zeta x| <= B2, |z| <= B3."""
    if H.nvars != 3 or H.is_zero():
        raise PreconditionError("need a nonzero ternary form")
    B1, B2, B3 = Fraction(B1), Fraction(B2), Fraction(B3)
    alpha, beta, zeta = Fraction(alpha), Fraction(beta), Fraction(zeta)
    pts = []
    shear = beta - zeta * alpha
    for z in range(-floor(B3), floor(B3) + 1):
        for x in range(ceil(alpha * z - B1), floor(alpha * z + B1) + 1):
            c = shear * z + zeta * x
            ylo, yhi = ceil(c - B2), floor(c + B2)
            if ylo > yhi:
                continue
            # coefficients of y -> H(x, y, z)
            coeffs = [0] * (H.degree + 1)
            for (a, b, e), v in H.items():
                coeffs[b] += v * x**a * z**e
            for s, t in kernels.solve_window(coeffs, 0, ylo, yhi):
                for y in range(s, t + 1):
                    if gcd(gcd(x, y), z) == 1:
                        pts.append((x, y, z))
    if return_points:
        return len(pts), pts
    return len(pts)
