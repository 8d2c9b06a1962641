"""Weight filtrations, Deligne splittings and rational multi-gradings."""
from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .linalg import Filtration, Matrix, Subspace, as_matrix, exact, QQi


class NotMixedHodgeError(ValueError):
    def __init__(self, what: str, index):
        self.index = index
        super().__init__(f"not a mixed Hodge structure: {what} fails at index {index}")


class IncompatibleFiltrationsError(ValueError):
    pass


class ConeIndependenceError(ValueError):
    pass


class WeightAxiomError(AssertionError):
    pass


@dataclass(frozen=True)
class PolarizedLattice:
    """Rational lattice with a (-1)^weight symmetric form and Hodge numbers.

    ``hodge_numbers[p]`` is h^{p, weight-p}.
    """

    rank: int
    weight: int
    Q: Matrix
    hodge_numbers: tuple

    def problems(self) -> list[str]:
        out = []
        if self.Q.shape != (self.rank, self.rank):
            return [f"Q has shape {self.Q.shape}, expected {(self.rank, self.rank)}"]
        sign = -1 if self.weight % 2 else 1
        if self.Q.T != self.Q.scale(sign):
            out.append(f"Q is not {'anti' if sign < 0 else ''}symmetric as required for weight {self.weight}")
        if self.Q.det() == 0:
            out.append("Q is singular")
        if len(self.hodge_numbers) != self.weight + 1:
            out.append(f"expected {self.weight + 1} Hodge numbers, got {len(self.hodge_numbers)}")
        elif list(self.hodge_numbers) != list(reversed(self.hodge_numbers)):
            out.append(f"Hodge numbers {list(self.hodge_numbers)} violate h^(p,q) = h^(q,p)")
        if sum(self.hodge_numbers) != self.rank:
            out.append(f"Hodge numbers sum to {sum(self.hodge_numbers)}, rank is {self.rank}")
        return out

    def form(self, u, v):
        """Q(u, v), bilinear."""
        return sum((a * b for a, b in zip(u, self.Q @ tuple(v))), Fraction(0))


@dataclass(frozen=True)
class NilpotentCone:
    lattice: PolarizedLattice
    generators: tuple

    @property
    def n(self) -> int:
        return len(self.generators)

    def partial_sums(self) -> list[Matrix]:
        out, acc = [], None
        for N in self.generators:
            acc = N if acc is None else acc + N
            out.append(acc)
        return out

    def problems(self) -> list[str]:
        out = []
        Q = self.lattice.Q
        d = self.lattice.rank
        for i, N in enumerate(self.generators, 1):
            if N.shape != (d, d):
                out.append(f"N_{i} has shape {N.shape}")
                continue
            if not N.is_real():
                out.append(f"N_{i} is not rational")
            if not (N ** d).is_zero():
                out.append(f"N_{i} is not nilpotent")
            if not (N.T @ Q + Q @ N).is_zero():
                out.append(f"N_{i} is not an infinitesimal isometry of Q")
        for (i, A), (j, B) in itertools.combinations(enumerate(self.generators, 1), 2):
            if A.shape == B.shape == (d, d) and A @ B != B @ A:
                out.append(f"N_{i} and N_{j} do not commute")
        return out


@dataclass
class GradedSplitting:
    """Direct sum decomposition V = ⊕ V_deg indexed by integer tuples."""

    ambient: int
    pieces: dict = field(default_factory=dict)

    def __post_init__(self):
        self.pieces = {tuple(k): v for k, v in sorted(self.pieces.items()) if v.dim}
        total = sum(v.dim for v in self.pieces.values())
        if total != self.ambient:
            raise ValueError(f"pieces have total dimension {total}, ambient is {self.ambient}")
        span = Subspace.zero(self.ambient)
        for v in self.pieces.values():
            span = span + v
        if span.dim != self.ambient:
            raise ValueError("pieces are not in direct sum")

    def __getitem__(self, deg) -> Subspace:
        deg = tuple(deg)
        return self.pieces.get(deg, Subspace.zero(self.ambient))

    def degrees(self) -> list[tuple]:
        return list(self.pieces)

    def dims(self) -> dict:
        return {k: v.dim for k, v in self.pieces.items()}

    def basis(self) -> list[tuple]:
        """(degree, vector) pairs, degrees in sorted order."""
        return [(k, b) for k, v in self.pieces.items() for b in v.basis]

    def degree_of(self, v) -> tuple | None:
        """Degree of the single piece containing v, or None for mixed vectors."""
        if all(exact(x) == 0 for x in v):
            return None
        for k, S in self.pieces.items():
            if S.contains(v):
                return k
        return None

    def decompose(self, v) -> dict:
        """Components of v in each piece."""
        basis = self.basis()
        P = Matrix.from_columns([b for _, b in basis])
        coords = P.inverse() @ tuple(v)
        out = {}
        for (k, b), c in zip(basis, coords):
            if c != 0:
                prev = out.get(k, (Fraction(0),) * self.ambient)
                out[k] = tuple(p + c * x for p, x in zip(prev, b))
        return out


# ---------------------------------------------------------------------------
# weight filtrations


def nilpotency_order(N: Matrix) -> int:
    d = N.shape[0]
    P = Matrix.identity(d)
    for m in range(d + 1):
        if P.is_zero():
            return m
        P = P @ N
    raise ValueError("matrix is not nilpotent")


def check_weight_axioms(N: Matrix, W: Filtration) -> list[str]:
    """Failures of N W_k ⊆ W_{k-2} and N^l : gr_l ≅ gr_{-l} (empty if fine)."""
    N = as_matrix(N)
    d = N.shape[0]
    bad = []
    lo, hi = W.lo - 2, W.hi + 2
    for k in range(lo, hi + 1):
        if not W[k].apply(N) <= W[k - 2]:
            bad.append(f"N W_{k} not inside W_{k - 2}")
    P = Matrix.identity(d)
    for l in range(0, max(abs(lo), hi) + 1):
        if l:
            P = P @ N
        if W.gr_dim(l) != W.gr_dim(-l):
            bad.append(f"dim gr_{l} != dim gr_{-l}")
            continue
        kernel_part = W[l] & W[-l - 1].preimage(P)
        if kernel_part.dim != W[l - 1].dim:
            bad.append(f"N^{l} is not injective on gr_{l}")
    return bad


def weight_filtration(N, verify: bool = True) -> Filtration:
    """Monodromy weight filtration of a nilpotent N, centered at 0.

    W_k = sum over j >= max(k, 0) of ker N^(j+1) ∩ im N^(j-k).
    """
    N = as_matrix(N)
    if not N.is_real():
        raise ValueError("weight filtration needs a rational nilpotent")
    d = N.shape[0]
    m = nilpotency_order(N)
    powers = [Matrix.identity(d)]
    for _ in range(m + 1):
        powers.append(powers[-1] @ N)
    kers = [P.kernel() for P in powers]
    ims = [P.image() for P in powers]

    def ker(e):
        return kers[e] if e <= m else kers[m]

    def im(e):
        return ims[e] if e <= m else ims[m]

    levels = {}
    top = max(m - 1, 0)
    for k in range(-top, top + 1):
        W = Subspace.zero(d)
        for j in range(max(k, 0), max(m - 1, k, 0) + 1):
            W = W + (ker(j + 1) & im(j - k))
        levels[k] = W
    W = Filtration(levels, d)
    if verify:
        bad = check_weight_axioms(N, W)
        if bad:
            raise WeightAxiomError("; ".join(bad))
    return W


def _random_positive(rng: random.Random) -> Fraction:
    return Fraction(rng.randint(1, 9), rng.randint(1, 9))


def cone_weight_filtrations(cone: NilpotentCone, samples: int = 3, seed: int = 0) -> list[Filtration]:
    """W(M_1), ..., W(M_n) for the partial sums M_j = N_1 + ... + N_j.

    For each j, ``samples`` random positive rational combinations of
    N_1..N_j are checked to give the same filtration.
    """
    rng = random.Random(seed)
    out = []
    for j, M in enumerate(cone.partial_sums(), 1):
        W = weight_filtration(M)
        for _ in range(samples):
            comb = None
            for N in cone.generators[:j]:
                term = N.scale(_random_positive(rng))
                comb = term if comb is None else comb + term
            if weight_filtration(comb) != W:
                raise ConeIndependenceError(
                    f"weight filtration differs inside the cone spanned by N_1..N_{j}"
                )
        out.append(W)
    return out


# ---------------------------------------------------------------------------
# splittings


def deligne_splitting(F: Filtration, W: Filtration, center: int) -> GradedSplitting:
    """Deligne's I^{p,q} for a mixed Hodge structure (F, W).

    ``W`` is stored centered at 0: the weight-m piece is ``W[m - center]``.
    The output is keyed by ``(p, q)``.
    """
    if not F.decreasing or W.decreasing:
        raise ValueError("expected decreasing F and increasing W")
    d = F.ambient
    Fb = F.conj()

    def Wt(m):
        return W[m - center]

    prange = range(F.lo, F.hi + 1)
    pieces = {}
    for p in prange:
        for q in prange:
            m = p + q
            right = Fb[q] & Wt(m)
            # terms die once the weight index falls below the bottom of W
            for j in range(1, m - W.lo - center + 1):
                right = right + (Fb[q - j] & Wt(m - j - 1))
            I = F[p] & Wt(m) & right
            if I.dim:
                pieces[(p, q)] = I

    def sum_of(keys):
        S = Subspace.zero(d)
        n = 0
        for k in keys:
            S = S + pieces[k]
            n += pieces[k].dim
        return S, n

    for s in range(F.lo, F.hi + 2):
        S, n = sum_of([k for k in pieces if k[0] >= s])
        if S != F[s] or n != F[s].dim:
            raise NotMixedHodgeError("F^s = ⊕_{p>=s} I^{p,q}", s)
    for m in range(W.lo + center - 1, W.hi + center + 1):
        S, n = sum_of([k for k in pieces if k[0] + k[1] <= m])
        if S != Wt(m) or n != Wt(m).dim:
            raise NotMixedHodgeError("W_m = ⊕_{p+q<=m} I^{p,q}", m)
    return GradedSplitting(d, pieces)


def rational_splitting(Ws: Sequence[Filtration]) -> GradedSplitting:
    """Rational J^σ with W^(j)_s = ⊕_{σ_j <= s} J^σ for every j.

    Each J^σ is the lex-least pivot completion, inside ∩_j W^(j)_{σ_j}, of
    the sum of the strictly lower intersections.
    """
    if not Ws:
        raise ValueError("need at least one filtration")
    d = Ws[0].ambient
    for W in Ws:
        if W.decreasing or W.ambient != d:
            raise ValueError("expected increasing filtrations on a common space")
        if not all(S.is_real() for S in W.levels.values()):
            raise ValueError("rational splitting needs rational filtrations")
    ranges = [range(W.lo - 1, W.hi + 1) for W in Ws]
    cache = {}

    def A(sigma):
        if sigma not in cache:
            S = Subspace.full(d)
            for W, s in zip(Ws, sigma):
                S = S & W[s]
            cache[sigma] = S
        return cache[sigma]

    pieces = {}
    for sigma in itertools.product(*ranges):
        top = A(sigma)
        if top.dim == 0:
            continue
        lower = Subspace.zero(d)
        for j in range(len(Ws)):
            lower = lower + A(sigma[:j] + (sigma[j] - 1,) + sigma[j + 1:])
        if lower.dim == top.dim:
            continue
        pieces[sigma] = lower.complement_in(top)

    total = sum(v.dim for v in pieces.values())
    if total != d:
        raise IncompatibleFiltrationsError(
            f"greedy rational splitting has total dimension {total}, expected {d}"
        )
    try:
        J = GradedSplitting(d, pieces)
    except ValueError as exc:
        raise IncompatibleFiltrationsError(str(exc)) from exc
    for j, W in enumerate(Ws):
        for s in range(W.lo - 1, W.hi + 1):
            S = Subspace.zero(d)
            for sigma, P in J.pieces.items():
                if sigma[j] <= s:
                    S = S + P
            if S != W[s]:
                raise IncompatibleFiltrationsError(f"W^({j + 1})_{s} is not recovered by the splitting")
    return J


def filtration_from_splitting(J: GradedSplitting, j: int) -> Filtration:
    """Rebuild the j-th increasing filtration from a multi-graded splitting."""
    degs = [k[j] for k in J.degrees()]
    lo, hi = min(degs), max(degs)
    levels = {}
    for s in range(lo, hi + 1):
        S = Subspace.zero(J.ambient)
        for k, P in J.pieces.items():
            if k[j] <= s:
                S = S + P
        levels[s] = S
    return Filtration(levels, J.ambient)


__all__ = [
    "ConeIndependenceError",
    "GradedSplitting",
    "IncompatibleFiltrationsError",
    "NilpotentCone",
    "NotMixedHodgeError",
    "PolarizedLattice",
    "WeightAxiomError",
    "check_weight_axioms",
    "cone_weight_filtrations",
    "deligne_splitting",
    "filtration_from_splitting",
    "nilpotency_order",
    "rational_splitting",
    "weight_filtration",
]
