"""The ten acceptance criteria as plain functions.

Each returns a :class:`CriterionResult`; ``run_all`` drives the ``report``
command and the acceptance tests.
"""
from __future__ import annotations

import math
import random
import time
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import datasets
from .asymptotics import (SigmaRegion, fit_exponents, j_adapted_basis, j_splitting, mixed_basis,
                          predicted_exponents, reducedness_sweep)
from .linalg import Filtration, Matrix, QQi, Subspace
from .locus import hodge_vector_condition, locus_solve, monodromy_shift_check, q_algebraicity_check
from .mixed_hodge import (check_weight_axioms, cone_weight_filtrations, deligne_splitting,
                          filtration_from_splitting, rational_splitting, weight_filtration)
from .period import adapted_flag, direct_chain, hodge_metric_matrix, hodge_point, wedge_norm_chain
from .reduction import (SiegelSetSpec, T_MATRIX, bs_to_bb, hecke_degree, hecke_multiset, in_fundamental_set,
                        mobius, reduce_sl2, siegel_intersectors)


@dataclass
class CriterionResult:
    number: int
    title: str
    passed: bool
    detail: str
    seconds: float

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        return f"[{tag}] {self.number:2d} {self.title}: {self.detail} ({self.seconds:.2f}s)"


def _timed(number, title, fn, limit=None):
    t0 = time.perf_counter()
    ok, detail = fn()
    dt = time.perf_counter() - t0
    if limit is not None and dt >= limit:
        ok = False
        detail += f"; runtime {dt:.1f}s exceeds {limit}s"
    return CriterionResult(number, title, ok, detail, dt)


# ---------------------------------------------------------------------------
# 1


def random_nilpotent(rng: random.Random, max_rank: int = 6) -> tuple[Matrix, list[int]]:
    """P J P^-1 for a random Jordan type; returns the matrix and the block sizes."""
    d = rng.randint(1, max_rank)
    blocks, left = [], d
    while left:
        b = rng.randint(1, left)
        blocks.append(b)
        left -= b
    J = [[Fraction(0)] * d for _ in range(d)]
    off = 0
    for b in blocks:
        for i in range(b - 1):
            J[off + i + 1][off + i] = Fraction(1)
        off += b
    while True:
        P = Matrix([[Fraction(rng.randint(-3, 3)) for _ in range(d)] for _ in range(d)])
        if P.det() != 0:
            break
    return P @ Matrix(J) @ P.inverse(), blocks


def jordan_gr_dims(blocks: list[int]) -> dict:
    """dim gr_l of W(N) from the Jordan type: a block of size m contributes to l = m-1, m-3, ..., 1-m."""
    out = Counter()
    for m in blocks:
        for l in range(1 - m, m, 2):
            out[l] += 1
    return dict(out)


def criterion_1(count: int = 200, seed: int = 0) -> CriterionResult:
    def run():
        rng = random.Random(seed)
        bad = 0
        for _ in range(count):
            N, blocks = random_nilpotent(rng)
            W = weight_filtration(N, verify=False)
            if check_weight_axioms(N, W):
                bad += 1
                continue
            dims = {l: g for l, g in W.gr_dims().items() if g}
            if dims != jordan_gr_dims(blocks):
                bad += 1
        return bad == 0, f"{count - bad}/{count} nilpotents satisfy both axioms and match the Jordan-type grading"

    return _timed(1, "weight-filtration axioms", run, limit=10)


# ---------------------------------------------------------------------------
# 2


def _reconstructs(I, F: Filtration, W: Filtration, center: int) -> bool:
    d = F.ambient
    for p in range(F.lo, F.hi + 1):
        S = Subspace.zero(d)
        for (a, _), P in I.pieces.items():
            if a >= p:
                S = S + P
        if S != F[p]:
            return False
    for m in range(W.lo - 1, W.hi + 1):
        S = Subspace.zero(d)
        for (a, b), P in I.pieces.items():
            if a + b - center <= m:
                S = S + P
        if S != W[m]:
            return False
    return True


def criterion_2() -> CriterionResult:
    def run():
        notes = []
        ok = True
        for name, build in datasets.CURATED.items():
            data = build()
            W = weight_filtration(data.cone.partial_sums()[-1])
            I = deligne_splitting(data.F, W, center=data.weight)
            if not _reconstructs(I, data.F, W, data.weight):
                ok = False
                notes.append(f"{name}: reconstruction failed")
        # pure case: trivial W at the center gives the Hodge decomposition
        e1 = datasets.e1()
        hp = hodge_point(e1, (QQi(0, 1),))
        d = e1.rank
        Wt = Filtration({-1: Subspace.zero(d), 0: Subspace.full(d)}, d)
        I = deligne_splitting(hp.filtration, Wt, center=e1.weight)
        if I.pieces != hp.pieces:
            ok = False
            notes.append("pure case differs from the Hodge decomposition")
        e2 = datasets.e2()
        Ws = cone_weight_filtrations(e2.cone)
        J = rational_splitting(Ws)
        for j, W in enumerate(Ws):
            R = filtration_from_splitting(J, j)
            if not all(R[s] == W[s] for s in range(min(R.lo, W.lo) - 1, max(R.hi, W.hi) + 2)):
                ok = False
                notes.append(f"E2: W(M_{j + 1}) not recovered")
        detail = "; ".join(notes) if notes else (
            f"{len(datasets.CURATED)} datasets reconstruct F and W, pure case matches, E2 J recovers W(M_1), W(M_2)")
        return ok, detail

    return _timed(2, "Deligne and rational splittings", run)


# ---------------------------------------------------------------------------
# 3


def criterion_3(tol: float = 1e-12) -> CriterionResult:
    def run():
        data = datasets.e1()
        basis = [(1, 0), (0, 1)]
        worst = 0.0
        for y in (2, 10, 100, 1000):
            D = np.diag([y, 1 / y])
            scale = np.sqrt(np.outer(np.diag(D), np.diag(D)))
            G = np.asarray(hodge_metric_matrix(data, (complex(0, y),), basis))
            worst = max(worst, float(np.max(np.abs(G - D) / scale)))
            Ge = hodge_metric_matrix(data, (QQi(0, y),), basis)
            if Ge != Matrix([[y, 0], [0, Fraction(1, y)]]):
                return False, f"exact Gram matrix at y={y} is {Ge}"
        return worst <= tol, f"max relative error {worst:.2e} (float), exact backend matches"

    return _timed(3, "E1 closed-form Hodge metric", run)


# ---------------------------------------------------------------------------
# 4


def criterion_4(names=("e1", "e2", "sym2_e1"), tol: float = 0.05) -> CriterionResult:
    def run():
        bad, total, worst = [], 0, 0.0
        for name in names:
            data = datasets.curated(name)
            J = j_splitting(data)
            for sigma, v in j_adapted_basis(data, J):
                total += 1
                fit = fit_exponents(data, v)
                worst = max(worst, fit.residual)
                if fit.exponents != predicted_exponents(J, v) or fit.residual >= tol:
                    bad.append(f"{name} {sigma}: fitted {fit.exponents}, residual {fit.residual:.3g}")
        if bad:
            return False, "; ".join(bad)
        return True, f"{total} J-basis vectors: fitted = predicted, max residual {worst:.1e}"

    return _timed(4, "exponent asymptotics", run, limit=60)


# ---------------------------------------------------------------------------
# 5


def criterion_5(density: int = 16, y_max: float = 1e3, jobs: int = 1) -> CriterionResult:
    def run():
        parts, ok = [], True
        for name in ("e1", "e2"):
            data = datasets.curated(name)
            region = SigmaRegion(data.n, y_max=y_max)
            res = reducedness_sweep(data, region, density, jobs=jobs)
            good = math.isfinite(res.C_star) and res.growth_ratio <= 1.05
            ok &= good
            neg = reducedness_sweep(data, region, density, basis=mixed_basis(data), jobs=jobs)
            ok &= neg.growth_ratio > 2
            parts.append(f"{name}: C*={res.C_star:.3g} growth={res.growth_ratio:.4f}, "
                         f"mixed growth={neg.growth_ratio:.3g}")
        return ok, "; ".join(parts)

    return _timed(5, "(e,C)-reducedness sweep", run)


# ---------------------------------------------------------------------------
# 6


def random_sigma_point(rng: random.Random, n: int, y_lo: float = 2.0, y_hi: float = 50.0) -> tuple:
    ys = sorted((math.exp(rng.uniform(math.log(y_lo), math.log(y_hi))) for _ in range(n)), reverse=True)
    return tuple(complex(rng.uniform(0, 1), y) for y in ys)


def criterion_6(count: int = 100, seed: int = 1, tol: float = 1e-9) -> CriterionResult:
    def run():
        rng = random.Random(seed)
        data = datasets.e2()
        flag = adapted_flag(data)
        worst = 0.0
        for _ in range(count):
            z = random_sigma_point(rng, data.n)
            u = tuple(Fraction(rng.randint(-5, 5)) for _ in range(data.rank))
            v = tuple(Fraction(rng.randint(-5, 5)) for _ in range(data.rank))
            direct = direct_chain(data, z, flag, u, v)
            for i in range(1, data.rank + 1):
                got = wedge_norm_chain(data, z, flag, i, u, v)
                for a, b in zip(got, direct[i - 1]):
                    scale = max(abs(complex(b)), 1e-300)
                    worst = max(worst, abs(complex(a) - complex(b)) / scale)
        return worst <= tol, f"{count} points of E2, max relative deviation {worst:.2e}"

    return _timed(6, "wedge Gram-Schmidt formulas", run)


# ---------------------------------------------------------------------------
# 7


def coset_index_bruteforce(p: int, bound: int | None = None) -> int:
    """[Γ : Γ ∩ g^-1 Γ g] for g = diag(1, p), by grouping small elements of SL_2(Z)."""
    bound = bound or p + 1
    reps = []
    rng = range(-bound, bound + 1)
    for a in rng:
        for b in rng:
            for c in rng:
                for d in rng:
                    if a * d - b * c != 1:
                        continue
                    for (a2, b2, c2, d2) in reps:
                        # g γ1 γ2^-1 g^-1 is integral iff p divides the (1,2) entry of γ1 γ2^-1
                        if (b * a2 - a * b2) % p == 0:
                            break
                    else:
                        reps.append((a, b, c, d))
    return len(reps)


def criterion_7(points: int = 1000, seed: int = 2) -> CriterionResult:
    def run():
        notes, ok = [], True
        for p in (2, 3, 5):
            brute = coset_index_bruteforce(p)
            deg = hecke_degree([[1, 0], [0, p]])
            if not (brute == deg == p + 1):
                ok = False
            notes.append(f"deg T_{p} = {deg} (enumeration {brute})")
        T2 = hecke_multiset(QQi(0, 1), [[1, 0], [0, 2]])
        if T2 != Counter({QQi(0, 2): 2, QQi(0, 1): 1}):
            ok = False
        notes.append("T_2(i) = {2i x2, i x1}" if ok else f"T_2(i) = {dict(T2)}")
        rng = random.Random(seed)
        bad = 0
        for _ in range(points):
            z = QQi(Fraction(rng.randint(-500, 500), rng.randint(1, 60)), Fraction(rng.randint(1, 500), rng.randint(1, 400)))
            z0, g = reduce_sl2(z)
            det = g[0][0] * g[1][1] - g[0][1] * g[1][0]
            if det != 1 or mobius(g, z) != z0 or not in_fundamental_set(z0):
                bad += 1
        ok &= bad == 0
        notes.append(f"{points - bad}/{points} random rational points reduced exactly")
        return ok, "; ".join(notes)

    return _timed(7, "Hecke degrees and SL2(Z) reduction", run)


# ---------------------------------------------------------------------------
# 8


def criterion_8() -> CriterionResult:
    def run():
        S = SiegelSetSpec.strip(1, Fraction(1, 2))
        rep = siegel_intersectors(S, S, search_bound=3)
        I = ((1, 0), (0, 1))
        T = T_MATRIX
        Tinv = ((1, -1), (0, 1))
        neg = lambda g: tuple(tuple(-x for x in r) for r in g)  # noqa: E731
        need = {I, neg(I), T, neg(T), Tinv, neg(Tinv)}
        found = set(rep.elements)
        ok = need <= found and rep.stable and not rep.undecided
        return ok, (f"{rep.count} elements at bound 3, {rep.doubled_count} at bound 6, "
                    f"contains ±I, ±T, ±T^-1: {need <= found}")

    return _timed(8, "Siegel intersectors finite and stable", run)


# ---------------------------------------------------------------------------
# 9


def criterion_9(shifts: int = 50, seed: int = 3, tol: float = 1e-8) -> CriterionResult:
    def run():
        notes, ok = [], True
        sym2 = datasets.sym2_e1()
        sol = locus_solve(hodge_vector_condition(sym2, (1, 0, 1)), y0=Fraction(1, 2), data=sym2)
        pts = sol.points()
        exact_i = pts == [(QQi(0, 1),)] and all(c.exact for c in sol.components)
        ok &= exact_i
        notes.append("Sym2 locus of f1+f3 = {i}" if exact_i else f"Sym2 locus = {pts}")
        rng = random.Random(seed)
        passed = 0
        for _ in range(shifts):
            v = tuple(Fraction(rng.randint(-9, 9)) for _ in range(3))
            if not any(v):
                v = (Fraction(1), Fraction(0), Fraction(0))
            if monodromy_shift_check(sym2, v):
                passed += 1
        ok &= passed == shifts
        notes.append(f"monodromy shift {passed}/{shifts}")
        hom = datasets.e2_hom()
        sol = locus_solve(hodge_vector_condition(hom, (0, 1, -2, 0)), data=hom)
        curves = [c for c in sol.components if c.kind == "curve"]
        rel_ok = False
        if len(curves) == 1:
            rep = q_algebraicity_check(curves[0])
            r = rep.relation or {}
            rel_ok = (rep.algebraic and rep.holdout_residual <= tol and set(r) == {(1, 0), (0, 1)}
                      and abs(r[(1, 0)] + r[(0, 1)]) <= tol)
        ok &= rel_ok
        notes.append("E2 isogeny component q1 = q2" if rel_ok else "E2 isogeny relation not found")
        return ok, "; ".join(notes)

    return _timed(9, "Hodge loci algebraic", run, limit=30)


# ---------------------------------------------------------------------------
# 10


def criterion_10(tol: float = 1e-12) -> CriterionResult:
    def run():
        target = 1j * math.exp(-2 * math.pi)
        _, w = bs_to_bb(0.25, 1.0)
        err = abs(w - target)
        periodic = all(
            abs(bs_to_bb(x, t)[1] - bs_to_bb(x + 1, t)[1]) <= tol * max(1.0, abs(bs_to_bb(x, t)[1]))
            for x in (0.0, 0.1, 0.37, 0.9) for t in (0.5, 1.0, 3.0))
        cusp = bs_to_bb(0.3, 0.0) == (1, 0) and abs(bs_to_bb(0.3, 1e-3)[1]) < 1e-300
        return err <= tol and periodic and cusp, f"|z(1/4,1) - i e^-2pi| = {err:.1e}, periodic, cusp at t=0"

    return _timed(10, "Borel-Serre to Baily-Borel chart", run)


CRITERIA = {
    1: criterion_1, 2: criterion_2, 3: criterion_3, 4: criterion_4, 5: criterion_5,
    6: criterion_6, 7: criterion_7, 8: criterion_8, 9: criterion_9, 10: criterion_10,
}


_SEEDED = {1: 0, 6: 1, 7: 2, 9: 3}


def run_all(only=None, seed: int = 0) -> list[CriterionResult]:
    """Run the selected criteria; ``seed`` offsets every randomized criterion."""
    out = []
    for k in sorted(CRITERIA):
        if only is not None and k not in only:
            continue
        out.append(CRITERIA[k](seed=seed + _SEEDED[k]) if k in _SEEDED else CRITERIA[k]())
    return out
