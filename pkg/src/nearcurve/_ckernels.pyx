# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled enumeration kernels.

Same algorithm and contract as ``_pykernels``; arithmetic is done in 128-bit
integers, so callers must check :func:`nearcurve.kernels.fits_int128` first.
The x-range can be split into chunks that run without the GIL.
"""
from concurrent.futures import ThreadPoolExecutor

from libc.stdlib cimport malloc, realloc, free

cdef extern from *:
    """
    typedef __int128 i128;
    """
    ctypedef long long i128

cdef enum:
    MAXK = 24

BACKEND = "cython"


cdef struct Buf:
    long long* data
    size_t n
    size_t cap


cdef inline int buf_push(Buf* b, long long x, long long y, long long z) noexcept nogil:
    cdef long long* p
    cdef size_t cap
    if b.n + 3 > b.cap:
        cap = b.cap * 2 if b.cap else 768
        p = <long long*>realloc(b.data, cap * sizeof(long long))
        if p == NULL:
            return -1
        b.data = p
        b.cap = cap
    b.data[b.n] = x
    b.data[b.n + 1] = y
    b.data[b.n + 2] = z
    b.n += 3
    return 0


cdef inline i128 ev(const i128* c, int n, i128 z) noexcept nogil:
    cdef i128 v = 0
    cdef int i
    for i in range(n - 1, -1, -1):
        v = v * z + c[i]
    return v


cdef inline int sgn(i128 v) noexcept nogil:
    return (v > 0) - (v < 0)


cdef inline long long gcdll(long long a, long long b) noexcept nogil:
    cdef long long t
    if a < 0:
        a = -a
    if b < 0:
        b = -b
    while b:
        t = a % b
        a = b
        b = t
    return a


cdef int segments(const i128* c, int n, long long lo, long long hi,
                  long long* sa, long long* sb) noexcept nogil:
    cdef i128 der[MAXK][MAXK]
    cdef int lens[MAXK]
    cdef long long ta[MAXK]
    cdef long long tb[MAXK]
    cdef int depth = 0, i, lev, nseg = 1, m, s, s_a, s_b
    cdef long long a, b, l, h, mid
    for i in range(n):
        der[0][i] = c[i]
    lens[0] = n
    while lens[depth] > 2:
        for i in range(1, lens[depth]):
            der[depth + 1][i - 1] = i * der[depth][i]
        lens[depth + 1] = lens[depth] - 1
        depth += 1
    sa[0] = lo
    sb[0] = hi
    for lev in range(depth, 0, -1):
        m = 0
        for s in range(nseg):
            a = sa[s]
            b = sb[s]
            s_a = sgn(ev(der[lev], lens[lev], a))
            s_b = sgn(ev(der[lev], lens[lev], b))
            if s_a == 0 or s_b == 0 or s_a == s_b:
                ta[m] = a
                tb[m] = b
                m += 1
                continue
            l = a
            h = b
            while h - l > 1:
                mid = l + (h - l) // 2
                if sgn(ev(der[lev], lens[lev], mid)) == s_a:
                    l = mid
                else:
                    h = mid
            ta[m] = a
            tb[m] = l
            ta[m + 1] = h
            tb[m + 1] = b
            m += 2
        for s in range(m):
            sa[s] = ta[s]
            sb[s] = tb[s]
        nseg = m
    return nseg


cdef inline long long first_ge(const i128* c, int n, i128 t, long long a, long long b) noexcept nogil:
    # smallest z in [a, b] with c(z) >= t, c nondecreasing; b + 1 if none
    cdef long long l, h, mid
    if ev(c, n, b) < t:
        return b + 1
    l = a - 1
    h = b
    while h - l > 1:
        mid = l + (h - l) // 2
        if ev(c, n, mid) >= t:
            h = mid
        else:
            l = mid
    return h


cdef inline long long first_le(const i128* c, int n, i128 t, long long a, long long b) noexcept nogil:
    # smallest z in [a, b] with c(z) <= t, c nonincreasing; b + 1 if none
    cdef long long l, h, mid
    if ev(c, n, b) > t:
        return b + 1
    l = a - 1
    h = b
    while h - l > 1:
        mid = l + (h - l) // 2
        if ev(c, n, mid) <= t:
            h = mid
        else:
            l = mid
    return h


cdef int solve(const i128* c0, int n, i128 T, long long lo, long long hi,
               long long* oa, long long* ob) noexcept nogil:
    cdef long long sa[MAXK]
    cdef long long sb[MAXK]
    cdef int nseg, s, m = 0
    cdef long long a, b, st, en
    cdef i128 pa, pb, v
    while n > 0 and c0[n - 1] == 0:
        n -= 1
    if lo > hi:
        return 0
    if n <= 1:
        v = c0[0] if n == 1 else 0
        if -T <= v <= T:
            oa[0] = lo
            ob[0] = hi
            return 1
        return 0
    nseg = segments(c0, n, lo, hi, sa, sb)
    for s in range(nseg):
        a = sa[s]
        b = sb[s]
        pa = ev(c0, n, a)
        pb = ev(c0, n, b)
        if pa <= pb:
            if pb < -T or pa > T:
                continue
            st = first_ge(c0, n, -T, a, b)
            en = first_ge(c0, n, T + 1, a, b) - 1
        else:
            if pa < -T or pb > T:
                continue
            st = first_le(c0, n, T, a, b)
            en = first_le(c0, n, -T - 1, a, b) - 1
        if st <= en:
            if m and ob[m - 1] + 1 >= st:
                if en > ob[m - 1]:
                    ob[m - 1] = en
            else:
                oa[m] = st
                ob[m] = en
                m += 1
    return m


cdef int scan_chunk(const i128* A, int k, long long B, i128 T,
                    long long x_lo, long long x_hi, bint annulus, bint collect,
                    long long* count_out, Buf* buf) noexcept nogil:
    cdef i128 xp[MAXK]
    cdef i128 yp[MAXK]
    cdef i128 c[MAXK]
    cdef long long oa[MAXK]
    cdef long long ob[MAXK]
    cdef long long wlo[2]
    cdef long long whi[2]
    cdef long long x, y, z, g, mx, half = B // 2, count = 0, ax, ay, zlo, zhi
    cdef int i, j, w, nw, r, nint
    cdef i128 v
    for x in range(x_lo, x_hi + 1):
        xp[0] = 1
        for i in range(1, k + 1):
            xp[i] = xp[i - 1] * x
        for y in range(-B, B + 1):
            yp[0] = 1
            for i in range(1, k + 1):
                yp[i] = yp[i - 1] * y
            for j in range(k + 1):
                v = 0
                for i in range(k - j + 1):
                    if A[j * (k + 1) + i] != 0:
                        v += A[j * (k + 1) + i] * xp[i] * yp[k - j - i]
                c[j] = v
            ax = x if x >= 0 else -x
            ay = y if y >= 0 else -y
            mx = ax if ax > ay else ay
            if annulus and mx <= half:
                nw = 2
                wlo[0] = -B
                whi[0] = -half - 1
                wlo[1] = half + 1
                whi[1] = B
            else:
                nw = 1
                wlo[0] = -B
                whi[0] = B
            g = gcdll(x, y)
            for w in range(nw):
                nint = solve(c, k + 1, T, wlo[w], whi[w], oa, ob)
                for r in range(nint):
                    if g == 1 and not collect:
                        count += ob[r] - oa[r] + 1
                        continue
                    if g == 0:
                        zlo = oa[r] if oa[r] > -1 else -1
                        zhi = ob[r] if ob[r] < 1 else 1
                    else:
                        zlo = oa[r]
                        zhi = ob[r]
                    for z in range(zlo, zhi + 1):
                        if g == 0 and z == 0:
                            continue
                        if g == 1 or gcdll(g, z) == 1:
                            count += 1
                            if collect and buf_push(buf, x, y, z) != 0:
                                return -1
    count_out[0] = count
    return 0


def _run_chunk(A, int k, long long B, T, long long x_lo, long long x_hi,
               bint annulus, bint collect):
    cdef i128* a = <i128*>malloc((k + 1) * (k + 1) * sizeof(i128))
    cdef Buf buf
    cdef long long count = 0
    cdef int rc
    cdef i128 t = <long long>T
    cdef Py_ssize_t i
    if a == NULL:
        raise MemoryError
    buf.data = NULL
    buf.n = 0
    buf.cap = 0
    try:
        for i in range((k + 1) * (k + 1)):
            a[i] = <long long>A[i]
        with nogil:
            rc = scan_chunk(a, k, B, t, x_lo, x_hi, annulus, collect, &count, &buf)
        if rc != 0:
            raise MemoryError
        sols = [(buf.data[i], buf.data[i + 1], buf.data[i + 2])
                for i in range(0, <Py_ssize_t>buf.n, 3)]
        return count, sols
    finally:
        free(a)
        free(buf.data)


def scan(A, int k, long long B, T, long long x_lo, long long x_hi,
         bint annulus, bint collect, int threads=1):
    """Compiled twin of ``_pykernels.scan``; ``A`` is the (k+1)x(k+1) table."""
    if k + 1 > MAXK:
        raise ValueError("degree too large for the compiled kernel")
    flat = [0] * ((k + 1) * (k + 1))
    for j, row in enumerate(A):
        for i, v in enumerate(row):
            flat[j * (k + 1) + i] = int(v)
    n = x_hi - x_lo + 1
    if n <= 0:
        return 0, []
    if threads <= 1 or n < 2:
        return _run_chunk(flat, k, B, T, x_lo, x_hi, annulus, collect)
    nchunk = min(n, threads * 4)
    bounds = []
    start = x_lo
    for c in range(nchunk):
        size = n // nchunk + (1 if c < n % nchunk else 0)
        bounds.append((start, start + size - 1))
        start += size
    with ThreadPoolExecutor(max_workers=threads) as pool:
        parts = list(pool.map(
            lambda b: _run_chunk(flat, k, B, T, b[0], b[1], annulus, collect), bounds))
    total = 0
    sols = []
    for cnt, s in parts:
        total += cnt
        sols.extend(s)
    return total, sols


def solve_window(c, T, long long lo, long long hi):
    """Compiled twin of ``_pykernels.solve_window``."""
    cdef i128 cc[MAXK]
    cdef long long oa[MAXK]
    cdef long long ob[MAXK]
    cdef int n = len(c), m, i
    if n > MAXK:
        raise ValueError("degree too large for the compiled kernel")
    for i in range(n):
        cc[i] = <long long>c[i]
    m = solve(cc, n, <long long>T, lo, hi, oa, ob)
    return [(oa[i], ob[i]) for i in range(m)]
