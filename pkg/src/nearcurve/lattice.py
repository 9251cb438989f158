"""Rank 2 and 3 lattices with rational bases: sup-norm successive minima.

Minima come from exact enumeration. An LLL pass only shrinks the search box;
every reported number is a Fraction.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from math import floor, log2

from .errors import PreconditionError


def _det(rows) -> Fraction:
    n = len(rows)
    if n == 2:
        return rows[0][0] * rows[1][1] - rows[0][1] * rows[1][0]
    if n == 3:
        a = rows
        return (a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1])
                - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
                + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]))
    raise ValueError("rank 2 or 3 only")


def _inverse(rows):
    """Inverse of a 2x2 or 3x3 Fraction matrix."""
    n = len(rows)
    d = Fraction(_det(rows))
    if n == 2:
        (a, b), (c, e) = rows
        return [[e / d, -b / d], [-c / d, a / d]]
    cof = [[Fraction(0)] * 3 for _ in range(3)]
    for i in range(3):
        for j in range(3):
            m = [[rows[r][c] for c in range(3) if c != j] for r in range(3) if r != i]
            cof[i][j] = (-1) ** (i + j) * _det(m)
    return [[cof[j][i] / d for j in range(3)] for i in range(3)]


def sup(v) -> Fraction:
    return max(abs(x) for x in v)


@dataclass(frozen=True)
class IntLattice:
    """Rows of ``basis`` generate the lattice."""

    basis: tuple

    def __post_init__(self):
        rows = tuple(tuple(Fraction(x) for x in r) for r in self.basis)
        if len(rows) not in (2, 3) or any(len(r) != len(rows) for r in rows):
            raise PreconditionError("need a square basis of rank 2 or 3")
        if _det(rows) == 0:
            raise PreconditionError("basis is singular")
        object.__setattr__(self, "basis", rows)

    @property
    def rank(self) -> int:
        return len(self.basis)

    @property
    def det(self) -> Fraction:
        return abs(Fraction(_det(self.basis)))

    def contains(self, v) -> bool:
        inv = _inverse(self.basis)
        n = self.rank
        c = [sum(Fraction(v[j]) * inv[j][i] for j in range(n)) for i in range(n)]
        return all(x.denominator == 1 for x in c)


def lll(rows, delta=Fraction(3, 4)):
    """Exact LLL reduction of a list of rational row vectors."""
    b = [list(map(Fraction, r)) for r in rows]
    n = len(b)

    def dot(u, v):
        return sum(x * y for x, y in zip(u, v))

    def gso():
        bs, mu = [], [[Fraction(0)] * n for _ in range(n)]
        for i in range(n):
            v = list(b[i])
            for j in range(i):
                mu[i][j] = dot(b[i], bs[j]) / dot(bs[j], bs[j])
                v = [x - mu[i][j] * y for x, y in zip(v, bs[j])]
            bs.append(v)
        return bs, mu

    k = 1
    bs, mu = gso()
    while k < n:
        for j in range(k - 1, -1, -1):
            q = round(mu[k][j])
            if q:
                b[k] = [x - q * y for x, y in zip(b[k], b[j])]
                bs, mu = gso()
        if dot(bs[k], bs[k]) >= (delta - mu[k][k - 1] ** 2) * dot(bs[k - 1], bs[k - 1]):
            k += 1
        else:
            b[k], b[k - 1] = b[k - 1], b[k]
            bs, mu = gso()
            k = max(k - 1, 1)
    return b


@dataclass
class MinimaResult:
    minima: tuple
    vectors: tuple
    basis: tuple | None

    @property
    def product(self) -> Fraction:
        out = Fraction(1)
        for m in self.minima:
            out *= m
        return out


def _rank(vs) -> int:
    """Rank of a short list of Fraction vectors."""
    rows = [list(v) for v in vs]
    r = 0
    ncol = len(rows[0]) if rows else 0
    for c in range(ncol):
        piv = next((i for i in range(r, len(rows)) if rows[i][c] != 0), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        for i in range(len(rows)):
            if i != r and rows[i][c]:
                f = rows[i][c] / rows[r][c]
                rows[i] = [x - f * y for x, y in zip(rows[i], rows[r])]
        r += 1
    return r


def short_vectors(L: IntLattice, R: Fraction) -> list:
    """Nonzero lattice vectors with sup-norm <= R, one per pair +-v, sorted by (norm, vector).

    Each kept vector has its first nonzero coordinate positive.
    """
    red = lll(L.basis)
    inv = _inverse(red)
    n = L.rank
    # v = c @ red, so c = v @ inv and |c_i| <= R * sum_j |inv[j][i]|
    bounds = [floor(R * sum(abs(inv[j][i]) for j in range(n))) for i in range(n)]
    out = []
    for c in product(*[range(-K, K + 1) for K in bounds]):
        if not any(c):
            continue
        v = tuple(sum(c[i] * red[i][j] for i in range(n)) for j in range(n))
        if next(x for x in v if x) < 0:
            continue  # keep one of each pair +-v
        if sup(v) <= R:
            out.append(v)
    out.sort(key=lambda v: (sup(v), v))
    return out


def _find_basis(L: IntLattice, vecs, minima):
    """A lattice basis whose i-th vector has norm minima[i], if one exists."""
    n = L.rank
    pools = [[v for v in vecs if sup(v) == m] for m in minima]
    target = L.det

    def rec(chosen):
        if len(chosen) == n:
            return list(chosen) if abs(Fraction(_det(chosen))) == target else None
        for v in pools[len(chosen)]:
            if v in chosen or _rank(chosen + [v]) < len(chosen) + 1:
                continue
            got = rec(chosen + [v])
            if got is not None:
                return got
        return None

    return rec([])


def successive_minima(L: IntLattice) -> MinimaResult:
    """Sup-norm successive minima with attaining vectors and, when found, a basis attaining them."""
    red = lll(L.basis)
    R = max(sup(r) for r in red)
    vecs = short_vectors(L, R)
    chosen = []
    for v in vecs:
        if _rank(chosen + [v]) > len(chosen):
            chosen.append(v)
            if len(chosen) == L.rank:
                break
    minima = tuple(sup(v) for v in chosen)
    basis = _find_basis(L, vecs, minima)
    return MinimaResult(minima, tuple(chosen), None if basis is None else tuple(basis))


def gamma_lattice(M: int, B: int, r_num: int, s_num: int) -> IntLattice:
    """{(M/B (x - r z), M/B (y - s z), z/B)} with r = r_num/M, s = s_num/M."""
    if M < 1 or B < 1:
        raise PreconditionError("need M, B >= 1")
    return IntLattice((
        (Fraction(M, B), 0, 0),
        (0, Fraction(M, B), 0),
        (Fraction(-r_num, B), Fraction(-s_num, B), Fraction(1, B)),
    ))


def gamma_minima(M: int, B: int, r_num: int, s_num: int):
    L = gamma_lattice(M, B, r_num, s_num)
    return L, successive_minima(L)


def dyadic_level(q: Fraction) -> int:
    """j with 2^j <= q < 2^(j+1), for rational q > 0."""
    j = q.numerator.bit_length() - q.denominator.bit_length()
    if Fraction(2) ** j > q:
        j -= 1
    elif Fraction(2) ** (j + 1) <= q:
        j += 1
    return j


@dataclass
class MinimaHistogram:
    B: int
    counts: dict  # exponent j -> boxes with 2^j <= 1/gamma1 < 2^(j+1)
    gamma1: list

    CSV_HEADER = "L_exponent,count,bound_value"

    def bound_value(self, j: int) -> float:
        """B^2 log2(B) / L^2 with L = 2^j, the shape of the per-level bound with unit constant."""
        return self.B**2 * max(log2(self.B), 1.0) / 4.0**j

    def csv(self) -> str:
        lines = [self.CSV_HEADER]
        for j in sorted(self.counts):
            lines.append(f"{j},{self.counts[j]},{self.bound_value(j):.6g}")
        return "\n".join(lines) + "\n"


def minima_histogram(cover, B: int) -> MinimaHistogram:
    """Histogram of dyadic levels of 1/gamma^(1) over the boxes of a cover."""
    N = cover.denominator
    counts: dict = {}
    g1 = []
    cache: dict = {}
    for box in cover.boxes:
        key = (box.v, box.w)
        if key not in cache:
            cache[key] = successive_minima(gamma_lattice(N, B, box.v, box.w)).minima[0]
        g = cache[key]
        g1.append(g)
        j = dyadic_level(1 / g)
        counts[j] = counts.get(j, 0) + 1
    return MinimaHistogram(B, counts, g1)
