"""Binary forms: heights, root multiplicities, Thue-type counts, eta-lattices, conics.

The complex linear factors of a binary form come from the exact squarefree
decomposition of F(x, 1) (so multiplicities are exact) plus numerical roots
of each squarefree piece. Each root is enclosed by a Weierstrass disc
d * |f(z_i) / (c prod_{j != i} (z_i - z_j))|; pairwise disjoint discs each hold
exactly one root, and the height is bounded using the disc radii.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from math import gcd

import mpmath
import numpy as np
import sympy

from . import kernels
from .errors import CertificationError, FormVanishes, NoBasePoint, PreconditionError
from .forms import IntegerForm, evaluate

_S = sympy.Symbol("s")

# -- factorisation and height -------------------------------------------------------------


@dataclass
class LinearFactorization:
    """F = scale * prod (x - rho_i y) * y^(inf_mult), roots with disc radii.

    ``roots`` lists (rho, radius, multiplicity): real roots first, then the
    roots with positive imaginary part, then their conjugates in the same
    order, so factor r + i pairs with factor r + s + i.
    """

    degree: int
    scale: int
    roots: list
    inf_mult: int
    real_count: int
    complex_pairs: int
    prec: int

    def vectors(self) -> list:
        """Coefficient vectors (1, -rho) and (0, 1), repeated by multiplicity; scale on the first."""
        out = []
        for rho, _, m in self.roots:
            out += [(mpmath.mpc(1), -rho)] * m
        out += [(mpmath.mpc(0), mpmath.mpc(1))] * self.inf_mult
        return out

    @property
    def multiplicity(self) -> int:
        return max([m for _, _, m in self.roots] + [self.inf_mult])


def _binary_coeffs(F: IntegerForm) -> list[int]:
    """[c_0, ..., c_d] with F = sum c_i x^i y^(d-i)."""
    if F.nvars != 2:
        raise PreconditionError("need a binary form")
    c = [0] * (F.degree + 1)
    for (i, _), v in F.items():
        c[i] = v
    return c


def _roots_certified(poly: sympy.Poly, prec: int):
    """Roots of a squarefree integer polynomial with disjoint inclusion discs."""
    coeffs = [int(c) for c in poly.all_coeffs()]
    d = len(coeffs) - 1
    bits = prec
    while bits <= 4 * prec + 256:
        with mpmath.workprec(bits + 20):
            zs = mpmath.polyroots(coeffs, maxsteps=200, extraprec=bits)
            zs = [mpmath.mpc(z) for z in zs]
            lead = coeffs[0]
            radii = []
            for i, z in enumerate(zs):
                den = mpmath.mpf(lead)
                for j, w in enumerate(zs):
                    if j != i:
                        den *= z - w
                radii.append(2 * d * abs(mpmath.polyval(coeffs, z) / den) + mpmath.mpf(2) ** (-bits))
            ok = all(abs(zs[i] - zs[j]) > radii[i] + radii[j] for i in range(d) for j in range(i + 1, d))
            if ok:
                return list(zip(zs, radii))
        bits *= 2
    raise CertificationError("root discs did not separate")


def factor_binary(F: IntegerForm, precision: int = 128) -> tuple[LinearFactorization, float, int]:
    """Linear factorisation, height H(F) and the top root multiplicity a(F)."""
    if F.is_zero():
        raise PreconditionError("zero form")
    c = _binary_coeffs(F)
    d = F.degree
    top = max(i for i, v in enumerate(c) if v)
    inf_mult = d - top
    f = sympy.Poly(list(reversed(c[: top + 1])), _S, domain="ZZ")
    lead, parts = sympy.sqf_list(f)
    scale = int(lead)
    reals, cplx = [], []
    for piece, mult in parts:
        if piece.degree() == 0:
            scale *= int(piece.LC()) ** mult
            continue
        scale *= int(piece.LC()) ** mult
        for z, r in _roots_certified(piece, precision):
            if abs(z.imag) <= r:
                # a real polynomial's disc around a real root meets the axis
                reals.append((mpmath.mpc(z.real, 0), r, mult))
            elif z.imag > 0:
                cplx.append((z, r, mult))
    reals.sort(key=lambda t: t[0].real)
    cplx.sort(key=lambda t: (t[0].real, t[0].imag))
    roots = reals + cplx + [(mpmath.conj(z), r, m) for z, r, m in cplx]
    fac = LinearFactorization(d, scale, roots, inf_mult, len(reals), len(cplx), precision)
    H = height(fac)
    return fac, H, fac.multiplicity


def _height_bounds(fac: LinearFactorization, T=None):
    lo = hi = mpmath.mpf(abs(fac.scale))
    vecs = []
    for rho, r, m in fac.roots:
        vecs += [((mpmath.mpc(1), -rho), r)] * m
    vecs += [((mpmath.mpc(0), mpmath.mpc(1)), mpmath.mpf(0))] * fac.inf_mult
    for (a, b), r in vecs:
        if T is not None:
            a, b = a * T[0][0] + b * T[1][0], a * T[0][1] + b * T[1][1]
            rr = r * mpmath.sqrt(T[1][0] ** 2 + T[1][1] ** 2)
        else:
            rr = r
        n = mpmath.sqrt(abs(a) ** 2 + abs(b) ** 2)
        lo *= max(n - rr, 0)
        hi *= n + rr
    return lo, hi


def height(fac: LinearFactorization, T=None) -> float:
    """H of F, or of F o T for a real 2x2 matrix T, as the midpoint of a certified bracket."""
    with mpmath.workprec(fac.prec + 20):
        lo, hi = _height_bounds(fac, T)
        if hi - lo > mpmath.mpf(10) ** -12 * hi:
            raise CertificationError("height bracket too wide")
        return float((lo + hi) / 2)


def root_multiplicity(F: IntegerForm) -> int:
    """a(F) from the exact squarefree decomposition, including the root at infinity."""
    c = _binary_coeffs(F)
    top = max(i for i, v in enumerate(c) if v)
    f = sympy.Poly(list(reversed(c[: top + 1])), _S, domain="ZZ")
    mults = [m for p, m in sympy.sqf_list(f)[1] if p.degree() > 0]
    return max(mults + [F.degree - top])


def substitute_binary(F: IntegerForm, T) -> IntegerForm:
    """F o T for an integer 2x2 matrix T."""
    x, y = sympy.symbols("x y")
    expr = F.as_expr([T[0][0] * x + T[0][1] * y, T[1][0] * x + T[1][1] * y])
    poly = sympy.Poly(sympy.expand(expr), x, y)
    return IntegerForm(2, F.degree, {m: int(c) for m, c in poly.terms()})


@dataclass
class ProbeResult:
    form_id: str
    d: int
    a: int
    H: float
    samples: int
    min_H: float
    bound: float

    @property
    def passed(self) -> bool:
        return self.min_H >= self.bound

    CSV_HEADER = "form_id,d,a,H,samples,min_H_observed,bound_2pow,pass"

    def csv_row(self) -> str:
        return ",".join(str(v) for v in (
            self.form_id, self.d, self.a, f"{self.H:.12g}", self.samples,
            f"{self.min_H:.12g}", f"{self.bound:.12g}", str(self.passed).lower()))


def _unimodular_samples(n: int, seed: int):
    """Identity first, then random real matrices of determinant +-1."""
    rng = np.random.default_rng(seed)
    yield ((1.0, 0.0), (0.0, 1.0))
    for _ in range(n - 1):
        t1, t2 = rng.uniform(0, np.pi, 2)
        s = rng.uniform(-3, 3)
        u = rng.uniform(-2, 2)
        R1 = np.array([[np.cos(t1), -np.sin(t1)], [np.sin(t1), np.cos(t1)]])
        R2 = np.array([[np.cos(t2), -np.sin(t2)], [np.sin(t2), np.cos(t2)]])
        S = np.array([[np.exp(s), 0.0], [0.0, np.exp(-s)]])
        U = np.array([[1.0, u], [0.0, 1.0]])
        T = R1 @ S @ U @ R2
        if rng.random() < 0.5:
            T[0] = -T[0]
        yield tuple(tuple(float(v) for v in row) for row in T)


def m_bound_probe(F: IntegerForm, samples: int = 1000, seed: int = 0, form_id: str = "") -> ProbeResult:
    """Smallest H(F o T) over sampled T with det +-1, against the bound 2^(-2d)."""
    d = F.degree
    a = root_multiplicity(F)
    if 2 * a > d:
        raise PreconditionError(f"a(F) = {a} exceeds d/2 = {Fraction(d, 2)}")
    fac, H, _ = factor_binary(F)
    best = None
    for T in _unimodular_samples(samples, seed):
        Tm = [[mpmath.mpf(v) for v in row] for row in T]
        h = height(fac, Tm)
        best = h if best is None else min(best, h)
    return ProbeResult(form_id, d, a, H, samples, best, 2.0 ** (-2 * d))


def best_pair(F: IntegerForm, x) -> tuple[int, int, float]:
    """Independent factor pair minimising |L_i(x)| |L_j(x)| / |det(L_i, L_j)|; indices from 1."""
    if evaluate(F, tuple(x)) == 0:
        raise FormVanishes(f"F vanishes at {tuple(x)}")
    fac, _, _ = factor_binary(F)
    vecs = fac.vectors()
    best = None
    with mpmath.workprec(fac.prec):
        vals = [abs(a * x[0] + b * x[1]) for a, b in vecs]
        for i in range(len(vecs)):
            for j in range(i + 1, len(vecs)):
                det = vecs[i][0] * vecs[j][1] - vecs[i][1] * vecs[j][0]
                if abs(det) < mpmath.mpf(2) ** (-fac.prec // 2):
                    continue
                ratio = vals[i] * vals[j] / abs(det)
                if best is None or ratio < best[2]:
                    best = (i + 1, j + 1, ratio)
    if best is None:
        raise AssertionError("all factor pairs are dependent")
    return best[0], best[1], float(best[2])


# -- eta-lattices ------------------------------------------------------------------------


def _xgcd(a: int, b: int):
    x0, x1, y0, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a % b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    return a, x0, y0


def hnf2(gens) -> tuple[tuple[int, int], tuple[int, int]]:
    """Basis rows (a, b), (0, c) with a, c > 0 and 0 <= b < ... of the lattice spanned by gens."""
    rows = [list(g) for g in gens if any(g)]
    # clear the first column into one row by repeated gcd steps
    piv = None
    rest = []
    for r in rows:
        if piv is None:
            piv = r
            continue
        if r[0] == 0:
            rest.append(r)
            continue
        g, u, v = _xgcd(piv[0], r[0])
        a, b = piv[0] // g, r[0] // g
        piv, r = [u * p + v * q for p, q in zip(piv, r)], [b * p - a * q for p, q in zip(piv, r)]
        rest.append(r)
    c = 0
    for r in rest:
        c = gcd(c, r[1])
    if piv is None or piv[0] == 0 or c == 0:
        raise PreconditionError("generators do not span a full-rank lattice")
    if piv[0] < 0:
        piv = [-piv[0], -piv[1]]
    return (piv[0], piv[1] % c), (0, c)


@dataclass(frozen=True)
class Sublattice2:
    """{(s, t) = lambda (s0, t0) mod eta}."""

    eta: int
    s0: int
    t0: int

    def __post_init__(self):
        if self.eta < 1:
            raise PreconditionError("eta must be positive")
        if gcd(self.s0, self.t0) != 1:
            raise PreconditionError("(s0, t0) must be primitive")

    @property
    def basis(self):
        return hnf2([(self.s0, self.t0), (self.eta, 0), (0, self.eta)])

    @property
    def det(self) -> int:
        (a, _), (_, c) = self.basis
        return a * c

    def __contains__(self, p) -> bool:
        # points are m (a, b) + j (0, c)
        (a, b), (_, c) = self.basis
        s, t = p
        if s % a:
            return False
        return (t - (s // a) * b) % c == 0


def _prime_powers(n: int):
    return [(int(p), int(e)) for p, e in sorted(sympy.factorint(n).items())]


def _binary_eval(g, s, t):
    a, b, c = g  # a s^2 + b s t + c t^2
    return a * s * s + b * s * t + c * t * t


def _classes_mod(gs, p: int, e: int):
    """Projective points (s0, t0) mod p^e at which every g vanishes mod p^e."""
    q = p**e
    out = []
    for u in range(q):
        if all(_binary_eval(g, u, 1) % q == 0 for g in gs):
            out.append((u, 1))
    for v in range(q // p):
        if all(_binary_eval(g, 1, p * v) % q == 0 for g in gs):
            out.append((1, p * v))
    return out


def _crt(residues):
    """(value, modulus) pairs with coprime moduli -> value mod product."""
    x, m = 0, 1
    for r, n in residues:
        _, u, _ = _xgcd(m, n)
        x = (x + (r - x) * u * m) % (m * n)
        m *= n
    return x, m


def _primitive_lift(s: int, t: int, eta: int):
    """A primitive pair congruent to (s, t) mod eta (up to unit scaling is not needed)."""
    for j in range(0, 4 * eta + 8):
        for i in range(0, j + 1):
            for ss, tt in ((s + i * eta, t + (j - i) * eta), (s - i * eta, t - (j - i) * eta)):
                if gcd(ss, tt) == 1:
                    return ss, tt
    raise AssertionError("no primitive lift")


def as_quadratic(g) -> tuple[int, int, int]:
    """(a, b, c) for a binary quadratic given as a form or a triple."""
    if isinstance(g, IntegerForm):
        if g.nvars != 2 or g.degree != 2:
            raise PreconditionError("need binary quadratic forms")
        return (g.coefficient((2, 0)), g.coefficient((1, 1)), g.coefficient((0, 2)))
    return tuple(int(v) for v in g)


def sublattice_cover(g1, g2, g3, eta: int) -> list[Sublattice2]:
    """Lattices Lambda_{eta,(s0,t0)} whose union holds every primitive (s, t) with eta | all g_i.

    Built from the exact solution classes modulo each prime power of eta and
    combined by the Chinese remainder theorem.
    """
    if eta < 1:
        raise PreconditionError("eta must be positive")
    gs = [as_quadratic(g) for g in (g1, g2, g3)]
    if eta == 1:
        return [Sublattice2(1, 1, 0)]
    per_prime = []
    for p, e in _prime_powers(eta):
        per_prime.append([(cls, p**e) for cls in _classes_mod(gs, p, e)])
    out = []
    for combo in product(*per_prime):
        s, _ = _crt([(cls[0], q) for cls, q in combo])
        t, _ = _crt([(cls[1], q) for cls, q in combo])
        s0, t0 = _primitive_lift(s, t, eta)
        out.append(Sublattice2(eta, s0, t0))
    return out


# -- lattice-restricted Thue counting --------------------------------------------------------


def count_thue_lattice(F: IntegerForm, lattice: Sublattice2 | None, B: int, P: int, return_points=False):
    """Primitive x in the lattice with |x|_inf <= B and 1 <= |F(x)| <= P."""
    if P < 1 or B < 1:
        raise PreconditionError("need P >= 1 and B >= 1")
    c = _binary_coeffs(F)
    d = F.degree
    (a, b), (_, cc) = ((1, 0), (0, 1)) if lattice is None else lattice.basis
    pts = []
    for m in range(-(B // a), B // a + 1):
        s = m * a
        # t -> F(s, t), constant term first
        coeffs = [c[d - j] * s ** (d - j) for j in range(d + 1)]
        for lo, hi in kernels.solve_window(coeffs, P, -B, B):
            start = lo + ((m * b - lo) % cc)
            for t in range(start, hi + 1, cc):
                if gcd(s, t) != 1:
                    continue
                if evaluate(F, (s, t)) != 0:
                    pts.append((s, t))
    if return_points:
        return len(pts), pts
    return len(pts)


# -- conics ---------------------------------------------------------------------------------


@dataclass
class ConicParam:
    Q: IntegerForm
    base: tuple
    U: list
    g: tuple  # three (a, b, c) binary quadratics in (s, t)
    disc: int
    g_prime: tuple = ()  # the same before applying U

    def point(self, s: int, t: int):
        """Primitive zero of Q from (s, t): g(s, t) divided by its content, or None."""
        v = [_binary_eval(gi, s, t) for gi in self.g]
        eta = gcd(gcd(v[0], v[1]), v[2])
        if eta == 0:
            return None
        return tuple(x // eta for x in v), eta

    def forms(self) -> list[IntegerForm]:
        return [IntegerForm(2, 2, {(2, 0): a, (1, 1): b, (0, 2): c}) for a, b, c in self.g]

    def to_dict(self) -> dict:
        return {
            "Q": self.Q.to_dict(),
            "base": list(self.base),
            "U": [list(r) for r in self.U],
            "g": [list(gi) for gi in self.g],
            "disc": self.disc,
        }


def _det3(M) -> int:
    return (M[0][0] * (M[1][1] * M[2][2] - M[1][2] * M[2][1])
            - M[0][1] * (M[1][0] * M[2][2] - M[1][2] * M[2][0])
            + M[0][2] * (M[1][0] * M[2][1] - M[1][1] * M[2][0]))


def complete_unimodular(v) -> list[list[int]]:
    """Integer matrix with determinant 1 whose second column is the primitive vector v."""
    a, b, c = v
    g, p, q = _xgcd(a, b)
    if g == 0:
        # v = (0, 0, +-1)
        M = [[1, 0, 0], [0, 0, 1], [0, c, 0]]
    else:
        _, r, s = _xgcd(g, c)  # r g + s c = 1
        M = [[-q, a, -s * a // g], [p, b, -s * b // g], [0, c, r]]
    if _det3(M) < 0:
        M = [[-row[0], row[1], row[2]] for row in M]
    assert _det3(M) == 1
    return M


def zeros_in_cube(Q: IntegerForm, bound: int) -> list[tuple[int, int, int]]:
    """All primitive zeros of Q with every |coordinate| <= bound."""
    from .counting import form_table

    _, sols, _ = kernels.scan(form_table(Q), Q.degree, bound, 0, -bound, bound, False, True)
    return sols


def find_base_point(Q: IntegerForm, bound: int):
    """First primitive zero by increasing sup-norm, then lexicographic order."""
    sols = zeros_in_cube(Q, bound)
    if not sols:
        return None
    return min(sols, key=lambda p: (max(abs(v) for v in p), p))


def hessian_det(Q: IntegerForm) -> int:
    M = [[0] * 3 for _ in range(3)]
    for e, c in Q.items():
        for i in range(3):
            for j in range(3):
                f = list(e)
                if f[i] == 0:
                    continue
                k1 = f[i]
                f[i] -= 1
                if f[j] == 0:
                    continue
                M[i][j] += c * k1 * f[j]
    return _det3(M)


def parameterize_conic(Q: IntegerForm, search_bound: int) -> ConicParam:
    """Binary quadratics g1, g2, g3 with Q(g1, g2, g3) = 0, from a base point of Q."""
    if Q.nvars != 3 or Q.degree != 2:
        raise PreconditionError("need a ternary quadratic form")
    disc = hessian_det(Q)
    if disc == 0:
        raise PreconditionError("the conic is singular")
    xi = find_base_point(Q, search_bound)
    if xi is None:
        raise NoBasePoint(f"no rational point of height <= {search_bound}")
    U = complete_unimodular(xi)
    Qp = Q.substitute(U)
    # Q' = y (alpha x + beta z) + q(x, z); no y^2 term since Q'(0, 1, 0) = 0
    alpha = Qp.coefficient((1, 1, 0))
    beta = Qp.coefficient((0, 1, 1))
    qa, qb, qc = Qp.coefficient((2, 0, 0)), Qp.coefficient((1, 0, 1)), Qp.coefficient((0, 0, 2))
    assert Qp.coefficient((0, 2, 0)) == 0
    # (x, y, z) = (s L, -q, t L) with L = alpha s + beta t
    gp = [(alpha, beta, 0), (-qa, -qb, -qc), (0, alpha, beta)]
    g = tuple(
        tuple(sum(U[i][j] * gp[j][m] for j in range(3)) for m in range(3)) for i in range(3)
    )
    s, t = sympy.symbols("s t")
    exprs = [a * s**2 + b * s * t + c * t**2 for a, b, c in g]
    assert sympy.expand(Q.as_expr(exprs)) == 0
    return ConicParam(Q, tuple(xi), U, g, abs(disc), tuple(gp))


def parameter_image(cp: ConicParam, S: int, height: int | None = None) -> set:
    """Primitive zeros +-g(s, t)/eta over primitive |s|, |t| <= S (numpy sweep).

    With ``height`` only zeros of sup-norm at most that are kept.
    """
    r = np.arange(-S, S + 1, dtype=np.int64)
    s, t = np.meshgrid(r, r, indexing="ij")
    s, t = s.ravel(), t.ravel()
    keep = np.gcd(s, t) == 1
    s, t = s[keep], t[keep]
    vals = [a * s * s + b * s * t + c * t * t for a, b, c in cp.g]
    eta = np.gcd(np.gcd(vals[0], vals[1]), vals[2])
    ok = eta != 0
    pts = np.stack([v[ok] // eta[ok] for v in vals], axis=1)
    if height is not None:
        pts = pts[np.abs(pts).max(axis=1) <= height]
    out = set(map(tuple, pts.tolist()))
    out |= {(-a, -b, -c) for a, b, c in out}
    return out


def preimage_bound(cp: ConicParam, height: int) -> int:
    """|s|, |t| bound for the (s, t) of any zero of height <= ``height``."""
    Ui = sympy.Matrix(cp.U).inv()
    rows = max(sum(abs(int(v)) for v in Ui.row(i)) for i in (0, 2))
    alpha, beta = cp.g_prime[0][0], cp.g_prime[0][1]
    return max(int(rows) * height, abs(alpha), abs(beta), 1)
