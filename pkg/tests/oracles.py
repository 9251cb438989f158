"""Independent brute-force oracles.

Nothing here calls the library's kernels or evaluators: forms are read as
raw (exponent, coefficient) items and evaluated with numpy or plain ints.
"""
from fractions import Fraction
from itertools import product
from math import comb, floor, gcd

import numpy as np
import sympy


class Grid:
    """All integer triples in [-R, R]^3 with F values, sup-norms and primitivity."""

    def __init__(self, F, R: int):
        r = np.arange(-R, R + 1, dtype=np.int64)
        X, Y, Z = np.meshgrid(r, r, r, indexing="ij")
        X, Y, Z = X.ravel(), Y.ravel(), Z.ravel()
        val = np.zeros_like(X, dtype=object) if F.degree * np.log2(R + 1) > 50 else np.zeros_like(X)
        for (a, b, c), v in F.items():
            val = val + v * X**a * Y**b * Z**c
        self.absF = np.abs(val)
        self.sup = np.maximum(np.maximum(np.abs(X), np.abs(Y)), np.abs(Z))
        self.prim = np.gcd(np.gcd(X, Y), Z) == 1
        self.X, self.Y, self.Z = X, Y, Z

    def count_gamma(self, B: int, T: int) -> int:
        m = self.prim & (2 * self.sup > B) & (self.sup <= B) & (self.absF <= T)
        return int(m.sum())

    def points_gamma(self, B: int, T: int):
        m = self.prim & (2 * self.sup > B) & (self.sup <= B) & (self.absF <= T)
        return sorted(zip(self.X[m].tolist(), self.Y[m].tolist(), self.Z[m].tolist()))

    def count_on_curve(self, B: int) -> int:
        m = self.prim & (self.sup <= B) & (self.absF == 0)
        return int(m.sum())


def floor_power(B: int, gamma: Fraction) -> int:
    """floor(B^gamma) by bisection on exact integer powers."""
    p, q = gamma.numerator, gamma.denominator
    target = B**p
    lo, hi = 0, B ** (-(-p // q)) + 1  # hi**q > target
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if mid**q <= target:
            lo = mid
        else:
            hi = mid
    return lo


def evaluate_raw(F, p) -> int:
    out = 0
    for e, c in F.items():
        term = c
        for v, k in zip(p, e):
            term *= v**k
        out += term
    return out


def simplex_points(m: int, alpha: Fraction, nu: Fraction):
    """All x in N^m with x_1 + ... + x_{m-1} + alpha x_m <= nu, by full box search."""
    top = floor(nu)
    for x in product(range(top + 1), repeat=m):
        if sum(x[:-1]) + alpha * x[-1] <= nu:
            yield x


def simplex_counts(m, alpha, nu):
    alpha, nu = Fraction(alpha), Fraction(nu)
    n, w = 0, Fraction(0)
    for x in simplex_points(m, alpha, nu):
        n += 1
        w += sum(x[:-1]) + alpha * x[-1]
    return n, w


def binomial_count(m: int, nu) -> int:
    return comb(floor(Fraction(nu)) + m, m)


def parabola_close(B: int, delta: Fraction, lo: Fraction, hi: Fraction) -> int:
    """Primitive (a, b, q) near y = x^2."""
    n = 0
    reach = int(delta / B) + 2
    for q in range((B + 1) // 2, B + 1):
        for a in range(-B * 4, B * 4 + 1):
            x = Fraction(a, q)
            if not lo <= x <= hi:
                continue
            for b in range(-reach * q, reach * q + 1):
                if gcd(gcd(a, b), q) == 1 and abs(Fraction(b, q) - x * x) <= delta / B:
                    n += 1
    return n


def fifth_root_close(B: int, delta: Fraction, lo: Fraction, hi: Fraction) -> int:
    """Primitive (a, b, q) near y = (1 - x^5)^(1/5), decided by exact fifth powers."""
    n = 0
    eps = delta / B
    for q in range((B + 1) // 2, B + 1):
        for a in range(floor(lo * q) - 1, floor(hi * q) + 2):
            x = Fraction(a, q)
            if not lo <= x <= hi:
                continue
            rhs = 1 - x**5
            for b in range(-q, 2 * q + 1):
                t = Fraction(b, q)
                # t - eps <= f(x) <= t + eps, and u -> u^5 is increasing
                if (t - eps) ** 5 <= rhs <= (t + eps) ** 5 and gcd(gcd(a, b), q) == 1:
                    n += 1
    return n


def parallelepiped(F, B1, B2, B3, alpha, beta, zeta) -> int:
    B1, B2, B3 = Fraction(B1), Fraction(B2), Fraction(B3)
    alpha, beta, zeta = Fraction(alpha), Fraction(beta), Fraction(zeta)
    R = int(floor(B3))
    X = int(floor(abs(alpha) * R + B1))
    Yr = int(floor(abs(beta - zeta * alpha) * R + abs(zeta) * X + B2))
    n = 0
    for z in range(-R, R + 1):
        for x in range(-X, X + 1):
            if abs(x - alpha * z) > B1:
                continue
            for y in range(-Yr, Yr + 1):
                if abs(y - (beta - zeta * alpha) * z - zeta * x) > B2:
                    continue
                if gcd(gcd(x, y), z) == 1 and evaluate_raw(F, (x, y, z)) == 0:
                    n += 1
    return n


def thue_count(F, basis, B: int, P: int) -> int:
    """Double loop over |s|, |t| <= B; membership by solving in the basis."""
    (a, b), (c, d) = basis
    det = a * d - b * c
    n = 0
    for s in range(-B, B + 1):
        for t in range(-B, B + 1):
            # (s, t) = u (a, b) + v (c, d)
            u_num, v_num = s * d - t * c, t * a - s * b
            if u_num % det or v_num % det:
                continue
            if gcd(s, t) != 1:
                continue
            if 1 <= abs(evaluate_raw(F, (s, t))) <= P:
                n += 1
    return n


def conic_zeros(Q, H: int) -> set:
    """Primitive zeros of a ternary quadratic with sup-norm <= H.

    For each x the y values are vectorized; z solves czz z^2 + lin z + const = 0.
    Needs a z^2 term. Every survivor is re-checked with exact integers.
    """
    A = dict(Q.items())
    czz = A.get((0, 0, 2), 0)
    assert czz != 0, "oracle needs a z^2 term"
    ys = np.arange(-H, H + 1, dtype=np.int64)
    out = set()
    for x in range(-H, H + 1):
        lin = A.get((1, 0, 1), 0) * x + A.get((0, 1, 1), 0) * ys
        const = A.get((2, 0, 0), 0) * x * x + A.get((1, 1, 0), 0) * x * ys + A.get((0, 2, 0), 0) * ys * ys
        disc = lin * lin - 4 * czz * const
        ok = disc >= 0
        r = np.zeros_like(disc)
        r[ok] = np.floor(np.sqrt(disc[ok].astype(np.float64))).astype(np.int64)
        for adj in (-1, 0, 1):
            rr = r + adj
            hit = ok & (rr >= 0) & (rr * rr == disc)
            for y, l, root in zip(ys[hit].tolist(), lin[hit].tolist(), rr[hit].tolist()):
                for sgn in (1, -1):
                    num = -l + sgn * root
                    if num % (2 * czz):
                        continue
                    z = num // (2 * czz)
                    p = (x, y, z)
                    if abs(z) <= H and gcd(gcd(x, y), z) == 1 and evaluate_raw(Q, p) == 0:
                        out.add(p)
    return out


def sup_minima(basis, R: int):
    """Sup-norm successive minima of an integer lattice by scanning coefficient vectors in [-R, R]^n."""
    n = len(basis)
    vecs = []
    for c in product(range(-R, R + 1), repeat=n):
        if any(c):
            v = tuple(sum(c[i] * basis[i][j] for i in range(n)) for j in range(n))
            vecs.append((max(abs(x) for x in v), v))
    vecs.sort()
    chosen = []
    for norm, v in vecs:
        M = np.array([w for _, w in chosen] + [v], dtype=float)
        if np.linalg.matrix_rank(M) == len(chosen) + 1:
            chosen.append((norm, v))
            if len(chosen) == n:
                break
    return tuple(nm for nm, _ in chosen)


def sup_minima_box(basis):
    """Sup-norm minima of an integer lattice from every integer vector in the box of the largest basis row.

    Membership: v is in the lattice iff v adj(B) = 0 mod det(B). The basis rows
    are independent, so every minimum is at most the largest row norm.
    """
    n = len(basis)
    R = int(max(max(abs(int(x)) for x in row) for row in basis))
    S = sympy.Matrix(basis)
    det = int(S.det())
    adj = np.array(S.adjugate().tolist(), dtype=np.int64)
    r = np.arange(-R, R + 1, dtype=np.int64)
    V = np.stack([g.ravel() for g in np.meshgrid(*([r] * n), indexing="ij")], axis=1)
    V = V[np.any(V != 0, axis=1)]
    V = V[np.all((V @ adj) % det == 0, axis=1)]
    norms = np.abs(V).max(axis=1)
    order = np.argsort(norms, kind="stable")
    chosen = []
    for i in order:
        M = np.array(chosen + [V[i]], dtype=float)
        if np.linalg.matrix_rank(M) == len(chosen) + 1:
            chosen.append(V[i])
            if len(chosen) == n:
                break
    return tuple(int(np.abs(v).max()) for v in chosen)


def gamma_first_min(M: int, B: int, v: int, w: int) -> Fraction:
    """First sup-norm minimum of {(M x - v z, M y - w z, z)}/B by a scan over z.

    For fixed z the best x, y are the nearest integers to v z / M, w z / M;
    z = 0 gives M / B, and no z beyond that can win.
    """
    best = M
    for z in range(1, M + 1):
        a = min(abs(M * x - v * z) for x in ((v * z) // M, (v * z) // M + 1))
        b = min(abs(M * y - w * z) for y in ((w * z) // M, (w * z) // M + 1))
        best = min(best, max(a, b, z))
    return Fraction(best, B)


def _floor_root5(v):
    """floor(v^(1/5)) for an int64 array, corrected by exact integer powers."""
    r = np.floor(np.sign(v) * np.abs(v).astype(np.float64) ** 0.2).astype(np.int64)
    for _ in range(3):
        r = np.where((r + 1) ** 5 <= v, r + 1, r)
        r = np.where(r**5 > v, r - 1, r)
    assert np.all(r**5 <= v) and np.all((r + 1) ** 5 > v)
    return r


def quintic_solutions(a: int, b: int, c: int, B: int, T: int):
    """Primitive (x, y, z) with |a x^5 + b y^5 - c z^5| <= T and B/2 < sup <= B, c > 0.

    For each (x, y) the admissible z form one interval, since z -> z^5 is
    increasing: (s - T)/c <= z^5 <= (s + T)/c with s = a x^5 + b y^5.
    Sized for B <= 1024 with small coefficients (int64 throughout).
    """
    r = np.arange(-B, B + 1, dtype=np.int64)
    X, Y = np.meshgrid(r, r, indexing="ij")
    X, Y = X.ravel(), Y.ravel()
    s = a * X**5 + b * Y**5
    # z^5 <= floor((s + T)/c) and z^5 >= ceil((s - T)/c)
    hi = _floor_root5(np.floor_divide(s + T, c))
    lo = -_floor_root5(np.floor_divide(-(s - T), c))
    lo, hi = np.maximum(lo, -B), np.minimum(hi, B)
    cnt = np.maximum(hi - lo + 1, 0)
    idx = np.repeat(np.arange(len(X)), cnt)
    start = np.repeat(np.cumsum(cnt) - cnt, cnt)
    Z = lo[idx] + (np.arange(len(idx)) - start)
    X, Y = X[idx], Y[idx]
    sup = np.maximum(np.maximum(np.abs(X), np.abs(Y)), np.abs(Z))
    keep = (2 * sup > B) & (np.gcd(np.gcd(X, Y), Z) == 1)
    return sorted(zip(X[keep].tolist(), Y[keep].tolist(), Z[keep].tolist()))
