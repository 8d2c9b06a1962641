"""Hodge-norm growth on Σ_n: sampling, exponent fits, and the reducedness sweep.

Σ_n is the region 0 < x_i < 1, y_1 >= ... >= y_n > 1 of H^n. For u in the
rational splitting piece J^σ the Hodge norm grows like the monomial
(y_1/y_2)^σ_1 ... (y_(n-1)/y_n)^σ_(n-1) y_n^σ_n.
"""
from __future__ import annotations

import csv
import itertools
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .linalg import QQi, exact
from .mixed_hodge import GradedSplitting, cone_weight_filtrations, rational_splitting
from .period import NilpotentOrbitData, NotHodgeStructureError, UnpolarizedError, hodge_metric_matrix


# ---------------------------------------------------------------------------
# sampling


@dataclass(frozen=True)
class SigmaRegion:
    """Sampling box inside Σ_n.

    ``x_mode="diagonal"`` uses one shared x for all coordinates (d x-values);
    ``"product"`` takes the full product of x grids.
    """

    n: int
    x_range: tuple = (0.0, 1.0)
    y_min: float = 2.0
    y_max: float | None = None
    x_mode: str = "diagonal"

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be positive")
        lo, hi = self.x_range
        if not lo < hi:
            raise ValueError("empty x range")
        if self.y_min <= 1:
            raise ValueError("Σ_n needs y_n > 1")
        if self.y_max is not None and self.y_max < self.y_min:
            raise ValueError("y_max below y_min")
        if self.x_mode not in ("diagonal", "product"):
            raise ValueError("x_mode must be 'diagonal' or 'product'")

    @property
    def top(self) -> float:
        return self.y_max if self.y_max is not None else 10 * self.y_min


def _grid_y(region: SigmaRegion, density: int) -> np.ndarray:
    if density == 1:
        return np.array([region.y_min])
    return np.geomspace(region.y_min, region.top, density)


def _grid_x(region: SigmaRegion, density: int) -> list[float]:
    lo, hi = region.x_range
    return [lo + (2 * j + 1) / (2 * density) * (hi - lo) for j in range(density)]


def sample_sigma(region: SigmaRegion, density: int) -> list[tuple]:
    """Deterministic grid: log-uniform y's (ordered) times a uniform x grid.

    Points are tuples of complex numbers, sorted by y then x.
    """
    if density < 1:
        raise ValueError("density must be at least 1")
    n = region.n
    ys = _grid_y(region, density)
    xs = _grid_x(region, density)
    if region.x_mode == "diagonal":
        xgrid = [(x,) * n for x in xs]
    else:
        xgrid = list(itertools.product(xs, repeat=n))
    out = []
    for yv in itertools.product(ys, repeat=n):
        if any(a < b for a, b in zip(yv, yv[1:])):
            continue
        for xv in xgrid:
            out.append(tuple(complex(x, y) for x, y in zip(xv, yv)))
    return out


def log_coordinates(y: Sequence[float]) -> np.ndarray:
    """(log(y_1/y_2), ..., log(y_(n-1)/y_n), log y_n)."""
    y = np.asarray(y, dtype=float)
    return np.append(np.log(y[:-1] / y[1:]), np.log(y[-1]))


def monomial(sigma: Sequence[int], y: Sequence[float]) -> float:
    return float(np.exp(np.dot(sigma, log_coordinates(y))))


# ---------------------------------------------------------------------------
# evaluation


def _rationalize(z, max_den: int = 10**6):
    return tuple(
        QQi(Fraction(v.real).limit_denominator(max_den), Fraction(v.imag).limit_denominator(max_den))
        for v in (complex(w) for w in z)
    )


def metric_at(data: NilpotentOrbitData, z, basis, backend: str = "float") -> np.ndarray:
    """Hodge Gram matrix as a complex ndarray.

    ``backend="exact"`` rounds z to a Gaussian rational (denominators up to
    10^6) and evaluates exactly; it needs psi to be absent.
    """
    if backend == "exact" and data.psi is None:
        G = hodge_metric_matrix(data, _rationalize(z), basis)
        return G.to_numpy().astype(complex)
    if backend not in ("exact", "float"):
        raise ValueError(f"unknown backend {backend!r}")
    z = tuple(complex(v) for v in z)
    return np.asarray(hodge_metric_matrix(data, z, basis), dtype=complex)


def hodge_norms(data: NilpotentOrbitData, z, vectors, backend: str = "float") -> np.ndarray:
    G = metric_at(data, z, vectors, backend)
    return np.real(np.diag(G))


# ---------------------------------------------------------------------------
# predicted and fitted exponents


def j_splitting(data: NilpotentOrbitData) -> GradedSplitting:
    return rational_splitting(cone_weight_filtrations(data.cone))


def primitive_integral(v) -> tuple:
    """Smallest integer multiple of a rational vector with coprime entries."""
    v = [exact(x) for x in v]
    if any(isinstance(x, QQi) for x in v):
        raise ValueError("expected a rational vector")
    lcm = 1
    for x in v:
        lcm = lcm * x.denominator // math.gcd(lcm, x.denominator)
    ints = [int(x * lcm) for x in v]
    g = 0
    for a in ints:
        g = math.gcd(g, a)
    if g == 0:
        raise ValueError("zero vector")
    lead = next(a for a in ints if a)
    sign = 1 if lead > 0 else -1
    return tuple(Fraction(sign * a // g) for a in ints)


def j_adapted_basis(data: NilpotentOrbitData, J: GradedSplitting | None = None) -> list[tuple]:
    """(σ, primitive integral vector) for every basis vector of every J^σ."""
    J = J or j_splitting(data)
    return [(deg, primitive_integral(b)) for deg, b in J.basis()]


def predicted_exponents(J: GradedSplitting, u) -> tuple:
    """σ with u in J^σ; mixed vectors are rejected."""
    deg = J.degree_of(tuple(exact(x) for x in u))
    if deg is None:
        pieces = sorted(J.decompose(u)) if any(exact(x) != 0 for x in u) else []
        raise ValueError(f"vector is not in a single J piece (components in {pieces})")
    return deg


@dataclass(frozen=True)
class RaySpec:
    """Points z0 + i λ w for λ in ``scales``."""

    base: tuple
    weights: tuple
    scales: tuple

    def __post_init__(self):
        w = [float(a) for a in self.weights]
        if any(a <= 0 for a in w) or any(a < b for a, b in zip(w, w[1:])):
            raise ValueError("ray weights must be positive and non-increasing")
        if list(self.scales) != sorted(self.scales) or len(set(self.scales)) != len(self.scales):
            raise ValueError("ray scales must be strictly increasing")
        for lam in self.scales:
            y = [complex(b).imag + lam * a for a, b in zip(w, self.base)]
            if any(a < b for a, b in zip(y, y[1:])) or y[-1] <= 1:
                raise ValueError("ray leaves Σ_n")

    def points(self) -> list[tuple]:
        return [
            tuple(complex(b) + 1j * lam * float(a) for a, b in zip(self.weights, self.base))
            for lam in self.scales
        ]


def default_rays(n: int, lam_max: float = 1e3, count: int = 10, x: float = 0.5, spread: float = 1e3) -> list[RaySpec]:
    """One diagonal ray plus, for each j < n, a ray with y_1..y_j scaled up by ``spread``."""
    scales = tuple(float(s) for s in np.geomspace(2.0, lam_max, count))
    base = (complex(x, 0),) * n
    rays = [RaySpec(base, (1,) * n, scales)]
    for j in range(1, n):
        w = tuple(spread if i < j else 1 for i in range(n))
        rays.append(RaySpec(base, w, scales))
    return rays


@dataclass
class ExponentFit:
    exponents: tuple
    raw: tuple
    intercept: float
    residual: float


def fit_exponents(data: NilpotentOrbitData, u, rays: Sequence[RaySpec] | None = None,
                  backend: str = "exact", nilpotent_only: bool = False) -> ExponentFit:
    """Least-squares fit of log h_z(u) on the log-coordinates over all rays jointly.

    The residual is the largest relative change, between the last two scales
    of any ray, of h divided by the rounded monomial.
    """
    if all(exact(x) == 0 for x in u):
        raise ValueError("u must be nonzero")
    if nilpotent_only:
        data = replace(data, psi=None)
    if data.psi is not None:
        backend = "float"
    rays = list(rays) if rays is not None else default_rays(data.n)
    rows, values, per_ray = [], [], []
    for ray in rays:
        hs = []
        for z in ray.points():
            h = hodge_norms(data, z, [u], backend)[0]
            if not h > 0:
                raise ValueError(f"non-positive Hodge norm at {z}")
            y = [v.imag for v in z]
            rows.append(np.append(log_coordinates(y), 1.0))
            values.append(math.log(h))
            hs.append((y, h))
        per_ray.append(hs)
    A = np.array(rows)
    if np.linalg.matrix_rank(A) < data.n + 1:
        raise ValueError("rays do not span the n log-directions")
    coef, *_ = np.linalg.lstsq(A, np.array(values), rcond=None)
    raw = tuple(float(c) for c in coef[:-1])
    s = tuple(int(round(c)) for c in raw)
    residual = 0.0
    for hs in per_ray:
        (y1, h1), (y2, h2) = hs[-2], hs[-1]
        r1, r2 = h1 / monomial(s, y1), h2 / monomial(s, y2)
        residual = max(residual, abs(r2 / r1 - 1))
    return ExponentFit(s, raw, float(coef[-1]), residual)


# ---------------------------------------------------------------------------
# roughly monomial


def roughly_monomial_check(samples: Sequence[tuple], sigma: Sequence[int],
                           scale_lo: float = 1e2, scale_hi: float = 1e3) -> tuple[bool, float]:
    """(bounded, C) for r = |f| / monomial_σ on (point, value) samples.

    C = max of max(r, 1/r) over samples with y_1 <= ``scale_hi``; bounded
    means that maximum exceeds the one over y_1 <= ``scale_lo`` by less than 5%.
    """
    lo, hi = [], []
    for z, value in samples:
        y = [complex(v).imag for v in z]
        r = abs(value) / monomial(sigma, y)
        if r == 0 or not math.isfinite(r):
            return False, math.inf
        c = max(r, 1 / r)
        if max(y) <= scale_hi:
            hi.append(c)
        if max(y) <= scale_lo:
            lo.append(c)
    if not lo or not hi:
        raise ValueError("need samples at both scales")
    C = max(hi)
    return C / max(lo) < 1.05, C


def curve_restriction(f: Callable, alpha: Sequence, beta: Sequence, tail: Sequence = ()) -> Callable:
    """s ↦ f(z) on the curve α_j z_j + β_j = s (j < n0), z_j = tail_j afterwards."""
    alpha = [Fraction(exact(a)) if not isinstance(a, float) else a for a in alpha]
    if any(a <= 0 for a in alpha):
        raise ValueError("alpha must be positive")
    if len(beta) != len(alpha):
        raise ValueError("alpha and beta differ in length")
    tail = tuple(complex(t) for t in tail)

    def g(s):
        head = tuple((complex(s) - complex(b)) / float(a) for a, b in zip(alpha, beta))
        return f(head + tail)

    return g


# ---------------------------------------------------------------------------
# reducedness sweep


def _defects_grid(G: np.ndarray, order: Sequence[int]) -> np.ndarray:
    """Defect triples for a stack of Gram matrices, basis permuted by ``order``."""
    G = G[:, order][:, :, order]
    diag = np.real(np.einsum("kii->ki", G))
    c1 = np.max(np.abs(G) / diag[:, :, None], axis=(1, 2))
    d = G.shape[1]
    if d > 1:
        iu = np.triu_indices(d, 1)
        c2 = np.max((diag[:, :, None] / diag[:, None, :])[:, iu[0], iu[1]], axis=1)
    else:
        c2 = np.zeros(len(G))
    _, logdet = np.linalg.slogdet(G)
    c3 = np.exp(np.sum(np.log(diag), axis=1) - np.real(logdet))
    return np.stack([c1, c2, c3], axis=1)


def best_ordering(G: np.ndarray, max_search: int = 7) -> tuple:
    """Basis ordering minimizing the worst b(e_i)/b(e_j), i < j, over the grid."""
    d = G.shape[1]
    diag = np.real(np.einsum("kii->ki", G))
    if d > max_search:
        return tuple(int(i) for i in np.argsort(np.log(diag).mean(axis=0), kind="stable"))
    best, best_val = None, math.inf
    logd = np.log(diag)
    for perm in itertools.permutations(range(d)):
        L = logd[:, perm]
        val = max((np.max(L[:, i] - L[:, j]) for i in range(d) for j in range(i + 1, d)), default=-math.inf)
        if val < best_val - 1e-12:
            best, best_val = perm, val
    return best


def _metric_chunk(args):
    data, points, basis, backend = args
    return [metric_at(data, z, basis, backend) for z in points]


def _gram_grid(data, points, basis, backend, jobs):
    if jobs <= 1 or len(points) < 64:
        return np.array(_metric_chunk((data, points, basis, backend)))
    size = math.ceil(len(points) / (4 * jobs))
    chunks = [points[i:i + size] for i in range(0, len(points), size)]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        parts = list(pool.map(_metric_chunk, [(data, c, basis, backend) for c in chunks]))
    return np.array([G for part in parts for G in part])


def default_jobs() -> int:
    try:
        return max(1, int(os.environ.get("PERIODGEOM_JOBS", "1")))
    except ValueError:
        return 1


def mixed_basis(data: NilpotentOrbitData, J: GradedSplitting | None = None) -> list[tuple]:
    """A J-adapted basis with its lowest-weight vector shifted by the highest-weight one.

    Used as a negative control: the mixing breaks the product condition.
    """
    items = j_adapted_basis(data, J)
    lo = min(range(len(items)), key=lambda i: (sum(items[i][0]), i))
    hi = max(range(len(items)), key=lambda i: (sum(items[i][0]), -i))
    out = [list(v) for _, v in items]
    out[lo] = [a + b for a, b in zip(out[lo], out[hi])]
    return [tuple(v) for v in out]


@dataclass
class SweepResult:
    points: list
    basis: list
    order: tuple
    defects: np.ndarray
    grams: np.ndarray
    C_star: float
    C_triple: tuple
    C_lower: float
    growth_ratio: float
    shifts: dict = field(default_factory=dict)

    @property
    def ordered_basis(self) -> list:
        return [self.basis[i] for i in self.order]

    def rows(self) -> list[list]:
        """CSV rows: x_1..x_n, y_1..y_n, h(e_1)..h(e_d) (ordered basis), c1, c2, c3."""
        out = []
        for z, G, dft in zip(self.points, self.grams, self.defects):
            h = np.real(np.diag(G))[list(self.order)]
            out.append([v.real for v in z] + [v.imag for v in z] + list(h) + list(dft))
        return out

    def header(self) -> list[str]:
        n = len(self.points[0])
        d = len(self.basis)
        return ([f"x{j + 1}" for j in range(n)] + [f"y{j + 1}" for j in range(n)]
                + [f"h{i + 1}" for i in range(d)] + ["c1", "c2", "c3"])

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(self.header())
            for row in self.rows():
                w.writerow([f"{v:.12g}" for v in row])


def reducedness_sweep(data: NilpotentOrbitData, region: SigmaRegion | None = None, density: int = 16,
                      basis: Sequence | None = None, backend: str = "float", jobs: int | None = None,
                      shifts: Sequence[Sequence[int]] = ()) -> SweepResult:
    """Evaluate the Hodge Gram matrix on the Σ_n grid and measure (e, C)-reducedness.

    ``basis`` defaults to a J-adapted integral basis; the ordering is chosen
    by exhaustive search. ``growth_ratio`` compares C* on the full grid with
    C* on the grid truncated one decade lower in y. For each integer
    ``shift`` m the grid is moved to z + m and C* is reported against the
    same ordered basis.
    """
    region = region or SigmaRegion(data.n, y_max=1e3)
    if region.n != data.n:
        raise ValueError(f"region has n = {region.n}, orbit has {data.n} variables")
    jobs = default_jobs() if jobs is None else jobs
    basis = [tuple(v) for v in basis] if basis is not None else [v for _, v in j_adapted_basis(data)]
    points = sample_sigma(region, density)
    grams, kept = [], []
    for z, G in zip(points, _polarized_grid(data, points, basis, backend, jobs)):
        if G is not None:
            grams.append(G)
            kept.append(z)
    if not kept:
        raise ValueError("no polarized grid point")
    grams = np.array(grams)
    order = best_ordering(grams)
    defects = _defects_grid(grams, order)
    top = max(max(v.imag for v in z) for z in kept)
    lower = np.array([max(v.imag for v in z) <= top / 10 * (1 + 1e-9) for z in kept])
    C_triple = tuple(float(c) for c in defects.max(axis=0))
    C_star = max(C_triple)
    C_lower = float(defects[lower].max()) if lower.any() else math.nan
    growth = C_star / C_lower if lower.any() else math.nan
    shift_report = {}
    for m in shifts:
        m = tuple(int(a) for a in m)
        moved = [tuple(v + a for v, a in zip(z, m)) for z in kept]
        Gm = _gram_grid(data, moved, basis, backend, jobs)
        shift_report[m] = float(_defects_grid(Gm, order).max())
    return SweepResult(kept, basis, tuple(order), defects, grams, C_star, C_triple, C_lower, growth, shift_report)


def _polarized_grid(data, points, basis, backend, jobs):
    try:
        return list(_gram_grid(data, points, basis, backend, jobs))
    except (UnpolarizedError, NotHodgeStructureError):
        pass
    out = []
    for z in points:
        try:
            out.append(metric_at(data, z, basis, backend))
        except (UnpolarizedError, NotHodgeStructureError):
            out.append(None)
    return out
