"""The approximate determinant method, run on actual solution sets.

Solutions of |F| <= B^gamma are normalised to points of [-1, 1]^2 in one of
three coordinate charts, dropped into half-open grid boxes, and for every
occupied box the smallest-degree form vanishing on all of its solutions is
found by exact integer elimination.
"""
from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb, factorial, gcd

import sympy

from .counting import CountQuery, count_gamma
from .errors import PreconditionError
from .forms import IntegerForm, evaluate, monomials, partial_derivative

DEFAULT_DMAX = 6
DEFAULT_EPS = 0.1
M0_CAP = 1 << 12

# -- simplex statistics ---------------------------------------------------------


@dataclass(frozen=True)
class SimplexSpec:
    m: int
    alpha: Fraction
    nu: Fraction

    def __post_init__(self):
        object.__setattr__(self, "alpha", Fraction(self.alpha))
        object.__setattr__(self, "nu", Fraction(self.nu))
        if self.m < 1 or self.alpha < 1 or self.nu < 1:
            raise PreconditionError("need m >= 1, alpha >= 1, nu >= 1")


@dataclass(frozen=True)
class SimplexStats:
    V: Fraction
    C: Fraction
    Sigma: int
    Phi: Fraction


def simplex_volume(m: int, alpha, nu) -> Fraction:
    return Fraction(nu) ** m / (Fraction(alpha) * factorial(m))


def simplex_moment(m: int, alpha, nu) -> Fraction:
    return Fraction(nu) ** (m + 1) / (Fraction(alpha) * (m + 1) * factorial(m - 1))


def _lattice_sums(m: int, alpha: Fraction, nu: Fraction) -> tuple[int, Fraction]:
    """Count and weight sum over x >= 0 with x_1 + ... + x_{m-1} + alpha x_m <= nu.

    Every lattice point is visited except along the innermost coordinate,
    whose admissible values form a run 0..r that is summed in one step.
    """
    count = 0
    weight = Fraction(0)

    def walk(i, used):
        # i coordinates among x_1..x_{m-1} still free; used = sum so far
        nonlocal count, weight
        room = budget - used
        if room < 0:
            return
        if i == 1:
            r = math.floor(room)
            count += r + 1
            weight += (r + 1) * (used + base) + Fraction(r * (r + 1), 2)
            return
        for v in range(math.floor(room) + 1):
            walk(i - 1, used + v)

    for xm in range(math.floor(nu / alpha) + 1):
        base = alpha * xm
        budget = nu - base
        if m == 1:
            count += 1
            weight += base
            continue
        walk(m - 1, 0)
    return count, weight


def simplex_stats(spec: SimplexSpec) -> SimplexStats:
    """Closed-form volume and moment; lattice count and weight by enumeration."""
    sigma, phi = _lattice_sums(spec.m, spec.alpha, spec.nu)
    return SimplexStats(
        simplex_volume(spec.m, spec.alpha, spec.nu),
        simplex_moment(spec.m, spec.alpha, spec.nu),
        sigma,
        phi,
    )


# -- parameters -------------------------------------------------------------------


def _exact_or_float(expr):
    expr = sympy.nsimplify(expr) if not isinstance(expr, sympy.Basic) else expr
    if expr.is_Rational:
        return Fraction(int(expr.p), int(expr.q))
    return float(expr)


def theta(n: int, k: int, gamma) -> Fraction | float:
    """Exponent of the number of auxiliary forms; 9/(4(k - gamma)) when n = 3."""
    tau = sympy.Rational(Fraction(k) - Fraction(gamma))
    n_ = sympy.Integer(n)
    val = (n_ - 2) * (n_ / (n_ - 1)) ** ((n_ - 1) / (n_ - 2)) * tau ** (-1 / (n_ - 2))
    return _exact_or_float(sympy.simplify(val))


def _power_le(base: int, exp: Fraction, value: int) -> bool:
    """value <= base**exp, exactly, for integers base, value >= 1."""
    return value ** exp.denominator <= base ** exp.numerator


def solve_alpha(M0M: int, k: int, B: int, tau: Fraction) -> Fraction | float:
    """alpha with (M0 M)^alpha = 2^-k B^tau; exact when the answer is rational."""
    if M0M < 2:
        raise PreconditionError("need M0 * M >= 2 to define alpha")
    approx = (float(tau) * math.log(B) - k * math.log(2)) / math.log(M0M)
    cand = Fraction(approx).limit_denominator(10**4)
    # (M0M)^(p/q) == B^tau / 2^k  <=>  (M0M)^(p d) 2^(k q d) == B^(tau_n q) with tau = tau_n/d
    p, q = cand.numerator, cand.denominator
    d, tn = tau.denominator, tau.numerator
    lhs_num = M0M ** (p * d) if p >= 0 else 1
    lhs_den = M0M ** (-p * d) if p < 0 else 1
    if lhs_num * 2 ** (k * q * d) == B ** (tn * q) * lhs_den:
        return cand
    return approx


@dataclass
class DMParameters:
    n: int
    k: int
    gamma: Fraction
    B: int
    M0: int
    theta: Fraction | float
    M: int
    alpha: Fraction | float
    M_window: tuple
    D: int
    s: int
    M_condition: bool

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "k": self.k,
            "gamma": str(self.gamma),
            "B": self.B,
            "M0": self.M0,
            "theta": str(self.theta),
            "M": self.M,
            "alpha": str(self.alpha),
            "M_window": [float(v) for v in self.M_window],
            "D": self.D,
            "s": self.s,
            "M_condition": self.M_condition,
        }


def default_M(n: int, k: int, gamma, B: int, M0: int = 1, lam: float = 0.0) -> int:
    """ceil(B^(tau/a) / (2^(k/a) M0)) with a = (1 - lam) ((n-1) tau / n)^((n-1)/(n-2))."""
    tau = float(Fraction(k) - Fraction(gamma))
    a = (1 - lam) * ((n - 1) * tau / n) ** ((n - 1) / (n - 2))
    return max(1, math.ceil(B ** (tau / a) / (2 ** (k / a) * M0)))


def dm_parameters(n: int, k: int, gamma, B: int, M0: int = 1, M: int | None = None,
                  D: int = DEFAULT_DMAX, eps: float = DEFAULT_EPS, lam: float = 0.0) -> DMParameters:
    """Parameters of the determinant method for (n, k, gamma, B) and a given M0."""
    gamma = Fraction(gamma)
    if n < 3:
        raise PreconditionError("need n >= 3")
    if not 0 <= gamma < k - Fraction(n, n - 1):
        raise PreconditionError(f"gamma must lie in [0, k - n/(n-1)) = [0, {k - Fraction(n, n - 1)})")
    tau = k - gamma
    th = theta(n, k, gamma)
    if M is None:
        M = default_M(n, k, gamma, B, M0, lam)
    alpha = solve_alpha(M0 * M, k, B, tau) if M0 * M >= 2 else math.inf
    window = (B ** float(th), B ** (float(th) + eps))
    cond = _power_le(B, tau, M * 2**k * M0)
    return DMParameters(n, k, gamma, B, M0, th, M, alpha, window, D, comb(D + n - 1, n - 1), cond)


# -- box covering ------------------------------------------------------------------

# chart name -> (dominant coordinate, the two normalised coordinates)
CHARTS = (("z", 2, (0, 1)), ("x", 0, (1, 2)), ("y", 1, (0, 2)))


def chart_of(p) -> tuple[str, int, tuple[int, int]]:
    m = max(abs(v) for v in p)
    for chart in CHARTS:
        if abs(p[chart[1]]) == m:
            return chart
    raise ValueError("zero vector")


@dataclass
class Box:
    chart: str
    v: int
    w: int
    points: list = field(default_factory=list)

    @property
    def key(self):
        return (self.chart, self.v, self.w)


@dataclass
class BoxCover:
    """Occupied half-open boxes [v/N, (v+1)/N) x [w/N, (w+1)/N) with N = M0 * M."""

    M: int
    M0: int
    boxes: list

    @property
    def denominator(self) -> int:
        return self.M0 * self.M

    def __len__(self):
        return len(self.boxes)

    def to_dict(self) -> dict:
        return {
            "M": self.M,
            "M0": self.M0,
            "denominator": self.denominator,
            "boxes": [{"chart": b.chart, "v": b.v, "w": b.w, "points": len(b.points)} for b in self.boxes],
        }


_CHART_ORDER = {"z": 0, "x": 1, "y": 2}


def assign_boxes(points, N: int) -> list[Box]:
    """Partition points into boxes of side 1/N; canonical order (chart, v, w)."""
    table: dict = {}
    for p in points:
        name, d, (i, j) = chart_of(p)
        # floor(N * p_i / p_d), exact
        v = (N * p[i]) // p[d] if p[d] > 0 else (-N * p[i]) // -p[d]
        w = (N * p[j]) // p[d] if p[d] > 0 else (-N * p[j]) // -p[d]
        key = (name, v, w)
        if key not in table:
            table[key] = Box(name, v, w)
        table[key].points.append(tuple(p))
    return [table[k] for k in sorted(table, key=lambda t: (_CHART_ORDER[t[0]], t[1], t[2]))]


def _sheet_ok(F: IntegerForm, grads, box: Box, N: int) -> bool:
    """Some in-chart partial of F keeps one strict sign on the box corners and its points."""
    name, d, (i, j) = next(c for c in CHARTS if c[0] == box.chart)
    k = F.degree
    probes = []
    for dv in (0, 1):
        for dw in (0, 1):
            q = [0, 0, 0]
            q[d], q[i], q[j] = N, box.v + dv, box.w + dw
            probes.append((tuple(q), 1))
    for p in box.points:
        # grad at p = p_d^(k-1) * grad at the normalised point
        probes.append((p, -1 if (p[d] < 0 and (k - 1) % 2) else 1))
    for idx in (i, j):
        signs = set()
        for q, flip in probes:
            v = evaluate(grads[idx], q) * flip
            signs.add((v > 0) - (v < 0))
            if 0 in signs or len(signs) > 1:
                break
        else:
            return True
    return False


def calibrate_M0(F: IntegerForm, points, M: int, start: int = 1, cap: int = M0_CAP) -> int:
    """Smallest M0 = start * 2^j with the one-sheet property in every occupied box."""
    grads = [partial_derivative(F, i) for i in range(3)]
    M0 = start
    while M0 <= cap:
        N = M0 * M
        if all(_sheet_ok(F, grads, b, N) for b in assign_boxes(points, N)):
            return M0
        M0 *= 2
    raise PreconditionError(f"no M0 up to {cap} gives one-sheet boxes")


def cover_boxes(q: CountQuery, M: int, M0: int | None = None, threads: int = 1, solutions=None) -> BoxCover:
    """Assign every primitive solution of the query to its box.

    With M0 absent it is calibrated on the solution set. ``solutions`` may be
    passed to skip the enumeration.
    """
    if M < 1:
        raise PreconditionError("M must be positive")
    if solutions is None:
        _, solutions = count_gamma(q, threads=threads, return_solutions=True)
    if M0 is None:
        M0 = calibrate_M0(q.F, solutions, M)
    return BoxCover(M, M0, assign_boxes(solutions, M0 * M))


# -- exact kernels -------------------------------------------------------------------


def _primitive(v):
    g = 0
    for a in v:
        g = gcd(g, a)
    if g == 0:
        return v
    first = next(a for a in v if a)
    if first < 0:
        g = -g
    return [a // g for a in v]


class Echelon:
    """Integer row echelon form grown one row at a time, without fractions.

    Rows are kept primitive; eliminating against a pivot row uses
    cross-multiplication followed by division by the content.
    """

    def __init__(self, ncols: int):
        self.ncols = ncols
        self.rows: list[list[int]] = []
        self.pivots: list[int] = []

    @property
    def rank(self) -> int:
        return len(self.rows)

    def add(self, row) -> bool:
        """Insert a row; True if it raised the rank."""
        row = list(row)
        for r, c in zip(self.rows, self.pivots):
            if row[c]:
                a, b = r[c], row[c]
                row = [a * x - b * y for x, y in zip(row, r)]
                row = _primitive(row)
        c = next((i for i, x in enumerate(row) if x), None)
        if c is None:
            return False
        # keep pivots sorted by column
        pos = sum(1 for p in self.pivots if p < c)
        self.rows.insert(pos, _primitive(row))
        self.pivots.insert(pos, c)
        return True

    def reduced(self) -> list[list[int]]:
        """Fully reduced echelon rows (zeros above every pivot), each primitive."""
        rows = [list(r) for r in self.rows]
        for i in range(len(rows) - 1, -1, -1):
            c = self.pivots[i]
            for j in range(i):
                if rows[j][c]:
                    a, b = rows[i][c], rows[j][c]
                    rows[j] = _primitive([a * x - b * y for x, y in zip(rows[j], rows[i])])
        return rows

    def kernel_vector(self) -> list[int] | None:
        """Canonical kernel vector: the basis vector of the first free column."""
        free = next((j for j in range(self.ncols) if j not in self.pivots), None)
        if free is None:
            return None
        rows = self.reduced()
        vec = [Fraction(0)] * self.ncols
        vec[free] = Fraction(1)
        for r, c in zip(rows, self.pivots):
            vec[c] = Fraction(-r[free], r[c])
        den = 1
        for v in vec:
            den = den * v.denominator // gcd(den, v.denominator)
        return _primitive([int(v * den) for v in vec])


def monomial_row(p, exps) -> list[int]:
    return [p[0] ** e[0] * p[1] ** e[1] * p[2] ** e[2] for e in exps]


@dataclass
class AuxiliaryForm:
    box: tuple
    D: int
    coefficients: list

    @property
    def form(self) -> IntegerForm:
        return IntegerForm(3, self.D, dict(zip(monomials(3, self.D), self.coefficients)))

    @property
    def bits(self) -> int:
        return max(abs(c).bit_length() for c in self.coefficients)

    def to_dict(self) -> dict:
        return {
            "box": list(self.box),
            "D": self.D,
            "coefficients": [str(c) for c in self.coefficients],
            "bits": self.bits,
        }


def fit_auxiliary_form(points, D: int, box=()) -> AuxiliaryForm | None:
    """Degree-D form with coprime integer coefficients vanishing at all points.

    Returns None when the evaluation matrix has full column rank.
    """
    if D < 1:
        raise PreconditionError("D must be at least 1")
    exps = monomials(3, D)
    ech = Echelon(len(exps))
    for p in points:
        ech.add(monomial_row(p, exps))
        if ech.rank == len(exps):
            return None
    vec = ech.kernel_vector()
    if vec is None:
        return None
    return AuxiliaryForm(tuple(box), D, vec)


# -- the pipeline ----------------------------------------------------------------------


@dataclass
class PipelineResult:
    params: DMParameters
    cover: BoxCover
    forms: list
    uncovered: list
    n_solutions: int

    @property
    def classification(self) -> dict:
        hist = {"1": 0, "2": 0, ">=3": 0}
        for a in self.forms:
            hist["1" if a.D == 1 else "2" if a.D == 2 else ">=3"] += 1
        return hist

    @property
    def complete(self) -> bool:
        return not self.uncovered

    def to_dict(self) -> dict:
        return {
            "parameters": self.params.to_dict(),
            "M0": self.cover.M0,
            "solutions": self.n_solutions,
            "occupied_boxes": len(self.cover),
            "classification": self.classification,
            "uncovered": [list(k) for k in self.uncovered],
            "boxes": [a.to_dict() for a in self.forms],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def _fit_box(box: Box, Dmax: int):
    for D in range(1, Dmax + 1):
        a = fit_auxiliary_form(box.points, D, box.key)
        if a is not None:
            return a
    return None


def run_pipeline(q: CountQuery, Dmax: int = DEFAULT_DMAX, M: int | None = None, M0: int | None = None,
                 threads: int = 1, override: bool = False, solutions=None) -> PipelineResult:
    """Cover the solutions of q by boxes and fit the lowest-degree form per box.

    Boxes with no form up to degree Dmax are listed in ``uncovered``.
    """
    k = q.F.degree
    if solutions is None:
        _, solutions = count_gamma(q, threads=threads, override=override, return_solutions=True)
    if M is None:
        M = default_M(3, k, q.gamma, q.B)
    if M0 is None:
        M0 = calibrate_M0(q.F, solutions, M)
    params = dm_parameters(3, k, q.gamma, q.B, M0=M0, M=M, D=Dmax)
    cover = BoxCover(M, M0, assign_boxes(solutions, M0 * M))
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            fits = list(pool.map(lambda b: _fit_box(b, Dmax), cover.boxes))
    else:
        fits = [_fit_box(b, Dmax) for b in cover.boxes]
    forms, uncovered = [], []
    for box, a in zip(cover.boxes, fits):
        if a is None:
            uncovered.append(box.key)
            continue
        f = a.form
        for p in box.points:
            assert evaluate(f, p) == 0, "auxiliary form misses a box solution"
        forms.append(a)
    return PipelineResult(params, cover, forms, uncovered, len(solutions))
