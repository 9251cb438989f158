"""Pure-Python enumeration kernels (fallback for the compiled core).

The central routine finds every integer ``z`` in a window with
``|p(z)| <= T`` for an integer polynomial ``p``. The window is cut into
integer segments on whose real hull ``p`` is strictly monotone, found from
the bottom of the derivative chain upwards by integer bisection; on each
segment the answer is one interval located by two more bisections. Only
exact integer arithmetic is used.
"""
from __future__ import annotations

from math import gcd

BACKEND = "python"


def _trim(c):
    c = list(c)
    while c and c[-1] == 0:
        c.pop()
    return c


def _ev(c, z):
    v = 0
    for a in reversed(c):
        v = v * z + a
    return v


def _sgn(v):
    return (v > 0) - (v < 0)


def _split(q, segs):
    out = []
    for a, b in segs:
        sa = _sgn(_ev(q, a))
        sb = _sgn(_ev(q, b))
        if sa == 0 or sb == 0 or sa == sb:
            out.append((a, b))
            continue
        lo, hi = a, b
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if _sgn(_ev(q, mid)) == sa:
                lo = mid
            else:
                hi = mid
        out.append((a, lo))
        out.append((hi, b))
    return out


def monotone_segments(c, lo, hi):
    """Integer segments covering [lo, hi] on whose hulls ``c`` is monotone."""
    c = _trim(c)
    chain = [c]
    while len(chain[-1]) > 2:
        q = chain[-1]
        chain.append([i * q[i] for i in range(1, len(q))])
    segs = [(lo, hi)]
    for q in reversed(chain[1:]):
        segs = _split(q, segs)
    return segs


def _first_true(pred, a, b):
    """Smallest z in [a, b] with pred(z), or b + 1; pred is monotone F..T."""
    if not pred(b):
        return b + 1
    lo, hi = a - 1, b
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if pred(mid):
            hi = mid
        else:
            lo = mid
    return hi


def solve_window(c, T, lo, hi):
    """Sorted disjoint integer intervals of z in [lo, hi] with |c(z)| <= T."""
    c = _trim(c)
    if lo > hi:
        return []
    if len(c) <= 1:
        v = c[0] if c else 0
        return [(lo, hi)] if abs(v) <= T else []
    out = []
    for a, b in monotone_segments(c, lo, hi):
        pa, pb = _ev(c, a), _ev(c, b)
        if pa <= pb:
            if pb < -T or pa > T:
                continue
            s = _first_true(lambda z: _ev(c, z) >= -T, a, b)
            e = _first_true(lambda z: _ev(c, z) > T, a, b) - 1
        else:
            if pa < -T or pb > T:
                continue
            s = _first_true(lambda z: _ev(c, z) <= T, a, b)
            e = _first_true(lambda z: _ev(c, z) < -T, a, b) - 1
        if s <= e:
            if out and out[-1][1] + 1 >= s:
                out[-1] = (out[-1][0], max(out[-1][1], e))
            else:
                out.append((s, e))
    return out


def _fiber(A, k, x, y):
    """Coefficients (in z) of F(x, y, z); A[j][i] multiplies x^i y^(k-j-i) z^j."""
    c = []
    for j in range(k + 1):
        row = A[j]
        d = k - j
        v = 0
        for i, a in enumerate(row):
            if a:
                v += a * x**i * y ** (d - i)
        c.append(v)
    return c


def scan(A, k, B, T, x_lo, x_hi, annulus, collect):
    """Count primitive (x, y, z) with |x|,|y|,|z| <= B and |F| <= T.

    With ``annulus`` the sup-norm must also exceed B/2. Returns the count and,
    when ``collect`` is set, the list of solutions in (x, y, z) scan order.
    """
    count = 0
    sols = []
    half = B // 2  # 2*m > B  <=>  m > B//2
    for x in range(x_lo, x_hi + 1):
        for y in range(-B, B + 1):
            m = max(abs(x), abs(y))
            c = _fiber(A, k, x, y)
            if annulus and m <= half:
                windows = [(-B, -half - 1), (half + 1, B)]
            else:
                windows = [(-B, B)]
            g = gcd(x, y)
            for wlo, whi in windows:
                for a, b in solve_window(c, T, wlo, whi):
                    if g == 1 and not collect:
                        count += b - a + 1
                        continue
                    if g == 0:
                        zs = [z for z in (-1, 1) if a <= z <= b]
                    else:
                        zs = range(a, b + 1)
                    for z in zs:
                        if g == 1 or gcd(g, z) == 1:
                            count += 1
                            if collect:
                                sols.append((x, y, z))
    return count, sols


def scan_naive(A, k, B, T, x_lo, x_hi, annulus, collect):
    """Triple loop; same contract as :func:`scan`."""
    count = 0
    sols = []
    for x in range(x_lo, x_hi + 1):
        for y in range(-B, B + 1):
            c = _fiber(A, k, x, y)
            g = gcd(x, y)
            for z in range(-B, B + 1):
                if annulus and 2 * max(abs(x), abs(y), abs(z)) <= B:
                    continue
                if gcd(g, z) != 1:
                    continue
                if abs(_ev(c, z)) <= T:
                    count += 1
                    if collect:
                        sols.append((x, y, z))
    return count, sols
