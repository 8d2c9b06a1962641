"""Nilpotent orbits, Hodge decompositions and Hodge forms along them.

The lifted period map is z -> gamma(z) F with
gamma(z) = exp(sum z_j N_j) (1 + sum t_j g_j), t_j = exp(2 pi i z_j).
"""
from __future__ import annotations

import cmath
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .linalg import (
    BackendError,
    FloatSubspace,
    Filtration,
    Matrix,
    QQi,
    Subspace,
    _det,
    conj,
    exact,
    gram_schmidt,
    is_exact_scalar,
    nilpotent_exp,
    sesq,
    wedge_form,
    wedge_vector,
)
from .mixed_hodge import NilpotentCone, PolarizedLattice, deligne_splitting, weight_filtration


class NotHodgeStructureError(ValueError):
    pass


class UnpolarizedError(ValueError):
    pass


@dataclass(frozen=True)
class NilpotentOrbitData:
    """A nilpotent cone with limit filtration F and optional holomorphic part.

    ``F`` is a decreasing exact filtration with F^0 = V and F^(k+1) = 0.
    ``psi`` holds the matrices g_j of g(t) = 1 + sum t_j g_j.
    """

    cone: NilpotentCone
    F: Filtration
    psi: tuple | None = None
    name: str = ""
    metadata: dict = field(default_factory=dict, compare=False, hash=False)

    @property
    def lattice(self) -> PolarizedLattice:
        return self.cone.lattice

    @property
    def n(self) -> int:
        return self.cone.n

    @property
    def weight(self) -> int:
        return self.lattice.weight

    @property
    def rank(self) -> int:
        return self.lattice.rank


# ---------------------------------------------------------------------------
# validation


@dataclass
class Check:
    name: str
    passed: bool
    detail: str = ""


@dataclass
class ValidationReport:
    checks: list

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)

    def failures(self) -> list:
        return [c for c in self.checks if not c.passed]

    def __str__(self):
        lines = []
        for c in self.checks:
            mark = "PASS" if c.passed else "FAIL"
            lines.append(f"{mark}  {c.name}" + (f": {c.detail}" if c.detail else ""))
        return "\n".join(lines)


def _shift_check(M: Matrix, F: Filtration, step: int) -> list[int]:
    """Indices p where M F^p is not inside F^(p - step)."""
    return [p for p in range(F.lo, F.hi + 2) if not F[p].apply(M) <= F[p - step]]


def validate_orbit(data: NilpotentOrbitData, integral: bool = False) -> ValidationReport:
    lat = data.lattice
    checks = []
    lat_problems = lat.problems()
    checks.append(Check("lattice: Q symmetry", not any("symmetric" in p for p in lat_problems),
                        "; ".join(p for p in lat_problems if "symmetric" in p)))
    checks.append(Check("lattice: Q nondegenerate", "Q is singular" not in lat_problems))
    hodge_bad = [p for p in lat_problems if "Hodge" in p or "shape" in p]
    checks.append(Check("lattice: Hodge numbers", not hodge_bad, "; ".join(hodge_bad)))
    if any("shape" in p for p in lat_problems):
        return ValidationReport(checks)

    d, k = lat.rank, lat.weight
    Q = lat.Q
    for i, N in enumerate(data.cone.generators, 1):
        shape_ok = N.shape == (d, d)
        checks.append(Check(f"N_{i}: shape", shape_ok, "" if shape_ok else f"got {N.shape}"))
        if not shape_ok:
            continue
        checks.append(Check(f"N_{i}: rational", N.is_real()))
        checks.append(Check(f"N_{i}: nilpotent", (N ** d).is_zero()))
        checks.append(Check(f"N_{i}: infinitesimal isometry", (N.T @ Q + Q @ N).is_zero()))
        if integral:
            try:
                T = nilpotent_exp(N, 1)
                integ = all(Fraction(x).denominator == 1 for r in T.rows for x in r)
            except ValueError:
                integ = False
            checks.append(Check(f"N_{i}: exp(N) integral", integ))
    gens = [(i, N) for i, N in enumerate(data.cone.generators, 1) if N.shape == (d, d)]
    for a in range(len(gens)):
        for b in range(a + 1, len(gens)):
            (i, A), (j, B) = gens[a], gens[b]
            checks.append(Check(f"N_{i}, N_{j}: commute", A @ B == B @ A))

    F = data.F
    expected = {p: sum(lat.hodge_numbers[p:]) for p in range(0, k + 1)} if len(lat.hodge_numbers) == k + 1 else {}
    dim_bad = [f"dim F^{p} = {F[p].dim}, expected {e}" for p, e in expected.items() if F[p].dim != e]
    if F[k + 1].dim != 0:
        dim_bad.append(f"F^{k + 1} is not zero")
    checks.append(Check("F: dimensions", not dim_bad, "; ".join(dim_bad)))
    iso_bad = []
    for p in range(0, k + 1):
        A, B = F[p], F[k - p + 1]
        if A.dim and B.dim:
            if any(sesq(Q, a, tuple(conj(x) for x in b)) != 0 for a in A.basis for b in B.basis):
                iso_bad.append(f"Q(F^{p}, F^{k - p + 1}) != 0")
    checks.append(Check("F: Q(F^p, F^(k-p+1)) = 0", not iso_bad, "; ".join(iso_bad)))
    for i, N in gens:
        bad = _shift_check(N, F, 1)
        checks.append(Check(f"N_{i}: Griffiths N F^p ⊆ F^(p-1)", not bad,
                            f"fails at p = {bad}" if bad else ""))
    if data.psi is not None:
        if len(data.psi) != data.n:
            checks.append(Check("psi: one matrix per variable", False,
                                f"{len(data.psi)} matrices for {data.n} variables"))
        for i, g in enumerate(data.psi, 1):
            if g.shape != (d, d):
                checks.append(Check(f"g_{i}: shape", False, f"got {g.shape}"))
                continue
            bad = _shift_check(g, F, 1)
            checks.append(Check(f"g_{i}: shifts F by at most one step", not bad,
                                f"fails at p = {bad}" if bad else ""))
            checks.append(Check(f"g_{i}: infinitesimal isometry", (g.T @ Q + Q @ g).is_zero()))
    return ValidationReport(checks)


# ---------------------------------------------------------------------------
# evaluation


def _is_exact_point(z) -> bool:
    return all(is_exact_scalar(v) or isinstance(v, str) for v in z)


def _point(data: NilpotentOrbitData, z) -> tuple:
    if np.isscalar(z) or isinstance(z, (QQi, Fraction, str)):
        z = (z,)
    z = tuple(z)
    if len(z) != data.n:
        raise ValueError(f"point has {len(z)} coordinates, orbit has {data.n} variables")
    return z


def gamma(data: NilpotentOrbitData, z):
    """gamma(z) = exp(z·N) g(t): exact Matrix for exact z without psi, else ndarray."""
    z = _point(data, z)
    if _is_exact_point(z) and data.psi is None:
        zs = [exact(v) for v in z]
        d = data.rank
        G = Matrix.identity(d)
        for zj, N in zip(zs, data.cone.generators):
            G = G @ nilpotent_exp(N, zj)
        return G
    zc = np.array([complex(v) if not isinstance(v, str) else complex(exact(v)) for v in z])
    S = sum(zj * N.to_numpy() for zj, N in zip(zc, data.cone.generators))
    G = nilpotent_exp(np.asarray(S, dtype=complex), 1)
    if data.psi is not None:
        g = np.eye(data.rank, dtype=complex)
        for zj, gj in zip(zc, data.psi):
            g = g + cmath.exp(2j * cmath.pi * zj) * gj.to_numpy()
        G = G @ g
    return G


def orbit_filtration(data: NilpotentOrbitData, z) -> Filtration:
    """F(z)^p = gamma(z) F^p."""
    G = gamma(data, z)
    F = data.F
    if isinstance(G, Matrix):
        return F.apply(G)
    levels = {}
    for p, S in F.levels.items():
        if S.dim == 0:
            levels[p] = FloatSubspace.zero(data.rank)
        else:
            levels[p] = FloatSubspace(G @ S.matrix().to_numpy(), rank=S.dim)
    return Filtration(levels, data.rank, decreasing=True, check=False)


@dataclass
class HodgePoint:
    z: tuple
    filtration: Filtration
    pieces: dict
    weil: object
    polarized: bool
    weight: int
    Q: Matrix

    @property
    def exact(self) -> bool:
        return isinstance(self.weil, Matrix)


def _ipow(e: int):
    return [1, 1j, -1, -1j][e % 4]


def _ipow_exact(e: int):
    return [Fraction(1), QQi(0, 1), Fraction(-1), QQi(0, -1)][e % 4]


def _hermitian_positive_exact(G: list[list]) -> bool:
    n = len(G)
    for a in range(n):
        for b in range(n):
            if G[a][b] != conj(G[b][a]):
                return False
    for m in range(1, n + 1):
        minor = _det([row[:m] for row in G[:m]])
        if isinstance(minor, QQi) or minor <= 0:
            return False
    return True


def hodge_decomposition(Fz: Filtration, lattice: PolarizedLattice, z=None) -> HodgePoint:
    """H^{p,k-p} = F^p ∩ conj(F^{k-p}), the Weil operator and the polarization flag."""
    k = lattice.weight
    d = lattice.rank
    Q = lattice.Q
    exact_mode = isinstance(Fz[0], Subspace)
    pieces = {}
    for p in range(0, k + 1):
        h = lattice.hodge_numbers[p]
        if h == 0:
            continue
        if exact_mode:
            H = Fz[p] & Fz[k - p].conj()
            if H.dim != h:
                raise NotHodgeStructureError(f"dim H^({p},{k - p}) = {H.dim}, expected {h}")
        else:
            H = Fz[p].intersect(Fz[k - p].conj(), dim=h)
            if H.residual > 1e-8:
                raise NotHodgeStructureError(f"F^{p} and conj F^{k - p} do not meet in dimension {h}")
        pieces[(p, k - p)] = H

    if exact_mode:
        span = Subspace.zero(d)
        for H in pieces.values():
            span = span + H
        if span.dim != d:
            raise NotHodgeStructureError("Hodge pieces are not in direct sum")
        cols, eigs = [], []
        for (p, q), H in pieces.items():
            cols.extend(H.basis)
            eigs.extend([_ipow_exact(p - q)] * H.dim)
        P = Matrix.from_columns(cols)
        C = P @ Matrix.diag(eigs) @ P.inverse()
        polarized = True
        for (p, q), H in pieces.items():
            c = _ipow_exact(p - q)
            G = [[c * sesq(Q, a, b) for b in H.basis] for a in H.basis]
            if not _hermitian_positive_exact(G):
                polarized = False
    else:
        P = np.hstack([H.basis for H in pieces.values()])
        if np.linalg.cond(P) > 1e10:
            raise NotHodgeStructureError("Hodge pieces are not in direct sum")
        eigs = np.concatenate([[_ipow(p - q)] * H.dim for (p, q), H in pieces.items()])
        C = P @ np.diag(eigs) @ np.linalg.inv(P)
        Qn = Q.to_numpy()
        polarized = True
        for (p, q), H in pieces.items():
            U = H.basis
            G = _ipow(p - q) * (U.T @ Qn @ U.conj())
            if np.abs(G - G.conj().T).max() > 1e-8 * max(1.0, np.abs(G).max()):
                polarized = False
                continue
            if np.linalg.eigvalsh((G + G.conj().T) / 2).min() <= 0:
                polarized = False
    return HodgePoint(z=z, filtration=Fz, pieces=pieces, weil=C, polarized=polarized, weight=k, Q=Q)


def hodge_point(data: NilpotentOrbitData, z) -> HodgePoint:
    z = _point(data, z)
    return hodge_decomposition(orbit_filtration(data, z), data.lattice, z=z)


def _require_polarized(hp: HodgePoint):
    if not hp.polarized:
        raise UnpolarizedError(f"Hodge structure at z = {hp.z} is not polarized")


def hodge_form(data: NilpotentOrbitData, z, u, v, hp: HodgePoint | None = None):
    """h_z(u, v) = Q(C_z u, conj v)."""
    hp = hp or hodge_point(data, z)
    _require_polarized(hp)
    if hp.exact:
        Cu = hp.weil @ tuple(u)
        return sesq(hp.Q, Cu, v)
    Qn = hp.Q.to_numpy()
    u = np.asarray([complex(x) for x in u])
    v = np.asarray([complex(x) for x in v])
    return (hp.weil @ u) @ Qn @ v.conj()


def hodge_metric_matrix(data: NilpotentOrbitData, z, basis: Sequence, hp: HodgePoint | None = None):
    """Gram matrix [h_z(e_a, e_b)] on the given basis."""
    hp = hp or hodge_point(data, z)
    _require_polarized(hp)
    if hp.exact:
        E = Matrix.from_columns(basis)
        return (hp.weil @ E).T @ hp.Q @ E.conj()
    E = np.array([[complex(x) for x in b] for b in basis]).T
    G = (hp.weil @ E).T @ hp.Q.to_numpy() @ E.conj()
    return G


def hodge_norm(data: NilpotentOrbitData, z, u, hp: HodgePoint | None = None) -> float:
    return float(np.real(complex(hodge_form(data, z, u, u, hp))))


# ---------------------------------------------------------------------------
# Gram-Schmidt through wedge powers


def adapted_flag(data: NilpotentOrbitData) -> tuple[list, list]:
    """Basis w_i adapted to the Deligne splitting of (F, W(M_n)), p non-increasing."""
    Mn = data.cone.partial_sums()[-1]
    W = weight_filtration(Mn)
    I = deligne_splitting(data.F, W, center=data.weight)
    ws, ps = [], []
    for (p, q) in sorted(I.pieces, key=lambda pq: (-pq[0], pq[1])):
        for b in I.pieces[(p, q)].basis:
            ws.append(b)
            ps.append(p)
    return ws, ps


def _to_backend(G, vecs):
    if isinstance(G, Matrix):
        return [tuple(exact(x) for x in v) for v in vecs]
    return [np.asarray([complex(x) for x in v]) for v in vecs]


def _wedge_B(Qk, X, Y):
    return sesq(Qk, X, Y)


def wedge_norm_chain(data: NilpotentOrbitData, z, flag: tuple, i: int, u, v):
    """(B(w~_i), B(u, w~_i), h(u~_i, v~_i)) via wedge powers, with i 1-based.

    ``flag`` is ``(w, p)``: basis vectors and their Hodge levels, p
    non-increasing. ``B(x, y) = Q(x, conj y)``.
    """
    ws, ps = flag
    d, k = data.rank, data.weight
    if not 1 <= i <= d:
        raise ValueError(f"index {i} out of range 1..{d}")
    if any(a < b for a, b in zip(ps, ps[1:])):
        raise ValueError("Hodge levels of the flag must be non-increasing")
    G = gamma(data, z)
    Q = data.lattice.Q
    exact_mode = isinstance(G, Matrix)
    if not exact_mode:
        Q = Q.to_numpy()
    ws = _to_backend(G, ws)
    u, v = _to_backend(G, [u, v])
    gw = [G @ w for w in ws]

    def cols(vs):
        if exact_mode:
            return Matrix.from_columns(vs)
        return np.column_stack(vs)

    def B_wedge(xs, ys):
        if not xs:
            return Fraction(1) if exact_mode else 1.0
        Qk = wedge_form(Q, len(xs))
        return _wedge_B(Qk, wedge_vector(cols(xs)), wedge_vector(cols(ys)))

    prev = B_wedge(gw[: i - 1], gw[: i - 1])
    full = B_wedge(gw[:i], gw[:i])
    if prev == 0 or full == 0:
        from .linalg import DegenerateFlagError

        raise DegenerateFlagError(i - 1 if prev == 0 else i)
    Bw = full / prev
    Bu = B_wedge(gw[: i - 1] + [u], gw[:i]) / prev
    Bv = B_wedge(gw[:i], gw[: i - 1] + [v]) / prev
    factor = (_ipow_exact if exact_mode else _ipow)(2 * ps[i - 1] - k)
    h = factor * Bu * Bv / Bw
    return Bw, Bu, h


def direct_chain(data: NilpotentOrbitData, z, flag: tuple, u, v) -> list:
    """Per-index (B(w~_i), B(u, w~_i), h(u~_i, v~_i)) from explicit Gram-Schmidt."""
    ws, ps = flag
    k = data.weight
    G = gamma(data, z)
    exact_mode = isinstance(G, Matrix)
    Q = data.lattice.Q if exact_mode else data.lattice.Q.to_numpy()
    ws = _to_backend(G, ws)
    u, v = _to_backend(G, [u, v])
    ortho, _ = gram_schmidt(Q, [G @ w for w in ws])
    out = []
    for o, p in zip(ortho, ps):
        Bw = sesq(Q, o, o)
        Bu = sesq(Q, u, o)
        Bv = sesq(Q, o, v)
        factor = (_ipow_exact if exact_mode else _ipow)(2 * p - k)
        out.append((Bw, Bu, factor * Bu * Bv / Bw))
    return out
