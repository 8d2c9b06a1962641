"""Reduction theory for SL_m and the upper half-plane.

Siegel sets, (e, C)-reducedness of positive forms, reduction to the standard
fundamental set of SL_2(Z), Hecke points, and the Siegel-set intersector
search.
"""
from __future__ import annotations

import cmath
import math
from collections import Counter, deque
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Sequence

import numpy as np
import scipy.linalg

from .linalg import BackendError, QQi, exact, format_scalar

S_MATRIX = ((0, -1), (1, 0))
T_MATRIX = ((1, 1), (0, 1))
IDENTITY = ((1, 0), (0, 1))


# ---------------------------------------------------------------------------
# Iwasawa decomposition and Siegel sets


def iwasawa(g):
    """Factor g = n a k with n unipotent upper triangular, a positive diagonal, k orthogonal.

    Parameters
    ----------
    g : array_like
        Invertible real square matrix.

    Returns
    -------
    n, a, k : ndarray
    """
    g = np.asarray(g, dtype=float)
    if g.ndim != 2 or g.shape[0] != g.shape[1]:
        raise ValueError("iwasawa needs a square matrix")
    if abs(np.linalg.det(g)) < 1e-300 or np.linalg.matrix_rank(g) < g.shape[0]:
        raise ValueError("iwasawa needs an invertible matrix")
    R, K = scipy.linalg.rq(g)
    D = np.sign(np.diag(R))
    D[D == 0] = 1
    R = R * D  # scale columns
    K = D[:, None] * K
    a = np.diag(np.diag(R))
    n = R / np.diag(R)[None, :]
    return n, a, K


def corner_coords(a) -> tuple:
    """Values a^(-alpha_i) = a_(i+1)/a_i for the simple roots alpha_i(a) = a_i/a_(i+1)."""
    a = np.asarray(a, dtype=float)
    diag = np.diag(a) if a.ndim == 2 else a
    if np.any(diag <= 0):
        raise ValueError("corner coordinates need a positive diagonal")
    return tuple(float(diag[i + 1] / diag[i]) for i in range(len(diag) - 1))


@dataclass(frozen=True)
class SiegelSetSpec:
    """U × A_t × W for the Borel subgroup of SL_m (m = 2 doubles as the strip in H).

    Membership uses the strict bound a^alpha > t on simple roots and the
    closed bound |n_ij| <= u_bound on unipotent coordinates.
    """

    m: int
    t: object
    u_bound: object
    w_bound: object = None

    def __post_init__(self):
        if not self.t > 0:
            raise ValueError("Siegel set needs t > 0")
        if not (self.u_bound >= 0 and math.isfinite(float(self.u_bound))):
            raise ValueError("u_bound must be finite and non-negative")

    @classmethod
    def strip(cls, t=1, u_bound=Fraction(1, 2)) -> "SiegelSetSpec":
        return cls(2, t, u_bound)


def siegel_contains(spec: SiegelSetSpec, point) -> bool:
    """Membership of a group element (matrix) or of a point z of H (strip case)."""
    if isinstance(point, (complex, QQi)) or np.isscalar(point):
        if spec.m != 2:
            raise ValueError("points of H only make sense for m = 2")
        if isinstance(point, QQi):
            x, y = point.re, point.im
        else:
            x, y = complex(point).real, complex(point).imag
        return abs(x) <= spec.u_bound and y > spec.t
    g = np.asarray(point, dtype=float)
    if g.shape != (spec.m, spec.m):
        raise ValueError(f"expected a {spec.m}x{spec.m} matrix")
    n, a, _ = iwasawa(g)
    roots = [1.0 / c for c in corner_coords(a)]
    unip = [abs(n[i, j]) for i in range(spec.m) for j in range(i + 1, spec.m)]
    return all(r > float(spec.t) for r in roots) and all(v <= float(spec.u_bound) for v in unip)


# ---------------------------------------------------------------------------
# (e, C)-reducedness


def reduced_defects(b, basis=None) -> tuple:
    """Defect triple of a positive definite form b on an ordered basis.

    (max_{i,j} |b(e_i,e_j)|/b(e_i), max_{i<j} b(e_i)/b(e_j), prod_i b(e_i)/det b);
    the second entry is 0 in rank 1.
    """
    B = np.asarray(b, dtype=complex) if not hasattr(b, "to_numpy") else b.to_numpy().astype(complex)
    if basis is not None:
        E = np.array([[complex(x) for x in v] for v in basis]).T
        B = E.T @ B @ E.conj()
    B = (B + B.conj().T) / 2
    try:
        np.linalg.cholesky(B)
    except np.linalg.LinAlgError:
        raise ValueError("form is not positive definite") from None
    diag = np.real(np.diag(B))
    d = len(diag)
    c1 = max(abs(B[i, j]) / diag[i] for i in range(d) for j in range(d))
    c2 = max((diag[i] / diag[j] for i in range(d) for j in range(i + 1, d)), default=0.0)
    sign, logdet = np.linalg.slogdet(B)
    c3 = float(np.exp(np.sum(np.log(diag)) - logdet))
    return float(c1), float(c2), c3


def is_reduced(b, basis=None, C: float = 2.0) -> tuple[bool, tuple]:
    """(b is (e, C)-reduced, defect triple); reduced means every defect < C."""
    defects = reduced_defects(b, basis)
    return all(x < C for x in defects), defects


# ---------------------------------------------------------------------------
# SL_2(Z) action


def _mul(A, B):
    return (
        (A[0][0] * B[0][0] + A[0][1] * B[1][0], A[0][0] * B[0][1] + A[0][1] * B[1][1]),
        (A[1][0] * B[0][0] + A[1][1] * B[1][0], A[1][0] * B[0][1] + A[1][1] * B[1][1]),
    )


def mobius(g, z):
    """(a z + b) / (c z + d); exact for Gaussian-rational z and rational g."""
    (a, b), (c, d) = g
    if isinstance(z, QQi) or isinstance(z, (Fraction, int)):
        z = QQi(z) if not isinstance(z, QQi) else z
        return (z * a + b) / (z * c + d)
    z = complex(z)
    return (a * z + b) / (c * z + d)


def _parts(z):
    if isinstance(z, QQi):
        return z.re, z.im
    z = complex(z)
    return z.real, z.imag


def in_fundamental_set(z) -> bool:
    """x^2 + y^2 >= 1 and -1/2 <= x <= 1/2 (closed)."""
    x, y = _parts(z)
    return y > 0 and x * x + y * y >= 1 and -Fraction(1, 2) <= x <= Fraction(1, 2)


def _as_point(z):
    if isinstance(z, str):
        z = exact(z)
    if isinstance(z, (int, Fraction)):
        z = QQi(z)
    return z


def reduce_sl2(z, max_steps: int = 10_000):
    """Move z into the standard fundamental set.

    Returns ``(z0, gamma)`` with gamma in SL_2(Z) (a tuple of rows) and
    gamma z = z0. Ties go to x = +1/2 on the vertical sides and to x >= 0 on
    the unit arc, so the output is canonical.
    """
    z = _as_point(z)
    x, y = _parts(z)
    if y <= 0:
        raise ValueError("reduce_sl2 needs Im z > 0")
    half = Fraction(1, 2) if isinstance(z, QQi) else 0.5
    g = IDENTITY
    for _ in range(max_steps):
        x, y = _parts(z)
        n = math.floor(x + half)
        if x - n == -half:
            n -= 1
        if n:
            T = ((1, -n), (0, 1))
            g = _mul(T, g)
            z = mobius(T, z)
            x, y = _parts(z)
        if x * x + y * y < 1:
            g = _mul(S_MATRIX, g)
            z = mobius(S_MATRIX, z)
            continue
        break
    else:
        raise RuntimeError("reduction did not terminate")
    if x * x + y * y == 1 and x < 0:
        g = _mul(S_MATRIX, g)
        z = mobius(S_MATRIX, z)
    return z, g


# ---------------------------------------------------------------------------
# Hecke correspondences


def _rational_matrix(g) -> tuple:
    rows = []
    for r in g:
        row = []
        for x in r:
            if isinstance(x, (float, complex, np.floating)):
                raise BackendError("Hecke element must be rational (use ints, Fractions or 'p/q' strings)")
            v = exact(x)
            if isinstance(v, QQi):
                raise ValueError("Hecke element must be real rational")
            row.append(v)
        rows.append(tuple(row))
    if len(rows) != 2 or any(len(r) != 2 for r in rows):
        raise ValueError("Hecke element must be 2x2")
    return tuple(rows)


def primitive_integral(g) -> tuple:
    """Positive rational multiple of g with coprime integer entries."""
    g = _rational_matrix(g)
    lcm = 1
    for r in g:
        for x in r:
            lcm = lcm * x.denominator // math.gcd(lcm, x.denominator)
    ints = [[int(x * lcm) for x in r] for r in g]
    gcd = 0
    for r in ints:
        for x in r:
            gcd = math.gcd(gcd, x)
    return tuple(tuple(x // gcd for x in r) for r in ints)


def hecke_representatives(g) -> list[tuple]:
    """Right coset representatives of Γ\\ΓgΓ, Γ = SL_2(Z), in Hermite normal form.

    For primitive integral g of determinant m these are [[a, b], [0, d]] with
    a d = m, 0 <= b < d and gcd(a, b, d) = 1; for g = diag(1, p) they act as
    z -> (z + j)/p and z -> p z.
    """
    M = primitive_integral(g)
    m = M[0][0] * M[1][1] - M[0][1] * M[1][0]
    if m <= 0:
        raise ValueError("Hecke element needs positive determinant")
    reps = []
    for a in range(1, m + 1):
        if m % a:
            continue
        d = m // a
        for b in range(d):
            if math.gcd(math.gcd(a, b), d) == 1:
                reps.append(((a, b), (0, d)))
    return reps


def hecke_degree(g) -> int:
    return len(hecke_representatives(g))


@dataclass
class HeckeImage:
    representative: tuple
    image: object
    reduced: object
    gamma: tuple


def hecke_points(z, g) -> list[HeckeImage]:
    """Images of z under the Hecke correspondence of g, each reduced."""
    z = _as_point(z)
    out = []
    for rep in hecke_representatives(g):
        w = mobius(rep, z)
        w0, gam = reduce_sl2(w)
        out.append(HeckeImage(rep, w, w0, gam))
    return out


def hecke_multiset(z, g) -> Counter:
    return Counter(h.reduced for h in hecke_points(z, g))


def format_point(z) -> str:
    if isinstance(z, QQi):
        return format_scalar(z)
    z = complex(z)
    return f"{z.real:.12g}{z.imag:+.12g}i"


# ---------------------------------------------------------------------------
# Siegel intersectors


def _interval_mul(a, b):
    ps = [a[0] * b[0], a[0] * b[1], a[1] * b[0], a[1] * b[1]]
    return min(ps), max(ps)


def _interval_sq(a):
    lo, hi = a
    if lo >= 0:
        return lo * lo, hi * hi
    if hi <= 0:
        return hi * hi, lo * lo
    return Fraction(0), max(lo * lo, hi * hi)


def _strip_meets_translate(s, spec1, spec2) -> bool:
    u1, u2 = Fraction(spec1.u_bound), Fraction(spec2.u_bound)
    return abs(Fraction(s)) <= u1 + u2


def _meets(gm, spec1: SiegelSetSpec, spec2: SiegelSetSpec, max_boxes: int):
    """Decide whether gm·S1 meets S2; returns True, False or None (undecided)."""
    (a, b), (c, d) = gm
    t1, t2 = Fraction(spec1.t), Fraction(spec2.t)
    u1, u2 = Fraction(spec1.u_bound), Fraction(spec2.u_bound)
    if c == 0:
        # a = d = ±1: a pure translation by b/d
        return _strip_meets_translate(Fraction(b, d), spec1, spec2)
    # Im(gz) <= 1/(c^2 y) < 1/(c^2 t1)
    if c * c * t1 * t2 >= 1:
        return False
    ymax = 1 / (c * c * t2)
    # the open disk {Im gz > t2} has center -d/c and radius ymax/2
    center, r = Fraction(-d, c), ymax / 2
    if center + r <= -u1 or center - r >= u1:
        return False
    boxes = deque([(-u1, u1, t1, ymax)])
    seen = 0
    while boxes and seen < max_boxes:
        x0, x1, y0, y1 = boxes.popleft()
        seen += 1
        xm, ym = (x0 + x1) / 2, (y0 + y1) / 2
        zc = QQi(xm, ym)
        if ym > t1 and abs(xm) <= u1:
            w = mobius(gm, zc)
            if w.im > t2 and abs(w.re) <= u2:
                return True
        lin = (c * x0 + d, c * x1 + d) if c > 0 else (c * x1 + d, c * x0 + d)
        sq = _interval_sq(lin)
        D = (sq[0] + c * c * y0 * y0, sq[1] + c * c * y1 * y1)
        if D[0] <= 0:
            D = (Fraction(1, 10**12), D[1])
        im_hi = y1 / D[0]
        if im_hi <= t2:
            continue
        inv = (1 / D[1], 1 / D[0])
        q = _interval_mul(lin, inv)
        re_terms = (Fraction(a, c) - q[1] / c, Fraction(a, c) - q[0] / c)
        re_lo, re_hi = min(re_terms), max(re_terms)
        if re_lo > u2 or re_hi < -u2:
            continue
        boxes.append((x0, xm, y0, ym))
        boxes.append((xm, x1, y0, ym))
        boxes.append((x0, xm, ym, y1))
        boxes.append((xm, x1, ym, y1))
    return None if boxes else False


def _sl2z(bound: int):
    rng = range(-bound, bound + 1)
    for a, b, c, d in product(rng, repeat=4):
        if a * d - b * c == 1:
            yield ((a, b), (c, d))


@dataclass
class IntersectorReport:
    elements: list
    count: int
    stable: bool
    doubled_count: int
    undecided: list = field(default_factory=list)


def siegel_intersectors(spec1: SiegelSetSpec, spec2: SiegelSetSpec, search_bound: int = 3,
                        max_boxes: int = 4000, check_stability: bool = True) -> IntersectorReport:
    """All γ in SL_2(Z) with entries bounded by ``search_bound`` and γS1 ∩ S2 ≠ ∅.

    The count is recomputed with the bound doubled to report stability.
    """
    def run(bound):
        found, undecided = [], []
        for gm in _sl2z(bound):
            hit = _meets(gm, spec1, spec2, max_boxes)
            if hit:
                found.append(gm)
            elif hit is None:
                undecided.append(gm)
        return sorted(found), undecided

    found, undecided = run(search_bound)
    if check_stability:
        doubled, und2 = run(2 * search_bound)
        undecided = sorted(set(undecided) | set(und2))
    else:
        doubled = found
    return IntersectorReport(found, len(found), len(doubled) == len(found) and doubled == found,
                             len(doubled), undecided)


# ---------------------------------------------------------------------------
# Borel-Serre to Baily-Borel near the cusp


def bs_to_bb(x: float, t: float) -> tuple:
    """[1 : exp(2 pi i x) exp(-2 pi / t)], and the cusp [1 : 0] at t = 0."""
    if t < 0:
        raise ValueError("t must be non-negative")
    if t == 0:
        return (1.0 + 0j, 0j)
    return (1.0 + 0j, cmath.exp(2j * math.pi * x) * math.exp(-2 * math.pi / t))
