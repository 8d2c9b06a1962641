"""Curated nilpotent orbits.

E1 is the degenerating elliptic curve (one Jordan block of size 2); the other
datasets are products and tensor constructions of it. The JSON files under
``data/`` are generated from these builders (``python -m periodgeom.datasets``).
"""
from __future__ import annotations

from fractions import Fraction
from itertools import combinations
from pathlib import Path

from .linalg import Filtration, Matrix, Subspace
from .mixed_hodge import NilpotentCone, PolarizedLattice
from .period import NilpotentOrbitData

DATA_DIR = Path(__file__).parent / "data"


def _unit(d: int, i: int) -> tuple:
    return tuple(Fraction(int(j == i)) for j in range(d))


def _hodge_filtration(levels: dict[int, list], d: int, k: int) -> Filtration:
    F = {p: Subspace.span(levels.get(p, []), d) for p in range(1, k + 1)}
    F[0] = Subspace.full(d)
    F[k + 1] = Subspace.zero(d)
    return Filtration(F, d, decreasing=True)


def _orbit(name, Q, weight, hodge, Ns, Flevels, psi=None, note=""):
    Q = Matrix(Q)
    d = Q.shape[0]
    lat = PolarizedLattice(d, weight, Q, tuple(hodge))
    cone = NilpotentCone(lat, tuple(Matrix(N) for N in Ns))
    F = _hodge_filtration(Flevels, d, weight)
    psi = None if psi is None else tuple(Matrix(g) for g in psi)
    return NilpotentOrbitData(cone, F, psi, name=name, metadata={"name": name, "provenance": note})


def _block(*blocks):
    d = sum(len(b) for b in blocks)
    out = [[0] * d for _ in range(d)]
    off = 0
    for b in blocks:
        for i, row in enumerate(b):
            for j, x in enumerate(row):
                out[off + i][off + j] = x
        off += len(b)
    return out


def _kron(A, B):
    A, B = Matrix(A).rows, Matrix(B).rows
    return [[a * b for a in ra for b in rb] for ra in A for rb in B]


def _scale(M, c):
    return [[Fraction(c) * x for x in r] for r in M]


def _add(A, B):
    return [[a + b for a, b in zip(r, s)] for r, s in zip(A, B)]


E1_Q = [[0, 1], [-1, 0]]
E1_N = [[0, 0], [1, 0]]  # N e1 = e2
I2 = [[1, 0], [0, 1]]
ZERO2 = [[0, 0], [0, 0]]


def e1() -> NilpotentOrbitData:
    """Rank 2, weight 1: F^1 = span(e1), N e1 = e2, Q(e1, e2) = 1."""
    return _orbit("e1", E1_Q, 1, (1, 1), [E1_N], {1: [_unit(2, 0)]},
                  note="degenerating elliptic curve, tau = z")


def e1_psi(c=Fraction(1, 2)) -> NilpotentOrbitData:
    """E1 with holomorphic part g(t) = 1 + c t N (so tau = z + c t)."""
    return _orbit("e1_psi", E1_Q, 1, (1, 1), [E1_N], {1: [_unit(2, 0)]},
                  psi=[_scale(E1_N, c)], note=f"E1 with g(t) = 1 + {c} t N")


# E2 uses the opposite ordering inside each factor: n e2 = e1, n e4 = e3.
_E2_n = [[0, 1], [0, 0]]
_E2_Q = [[0, -1], [1, 0]]


def e2() -> NilpotentOrbitData:
    """Product of two E1 factors with moduli z1 + z2 and z2.

    N1 = n ⊕ 0 and N2 = n ⊕ n where n e2 = e1, n e4 = e3; F^1 = span(e2, e4).
    """
    N1 = _block(_E2_n, ZERO2)
    N2 = _block(_E2_n, _E2_n)
    return _orbit("e2", _block(_E2_Q, _E2_Q), 1, (2, 2), [N1, N2],
                  {1: [_unit(4, 1), _unit(4, 3)]},
                  note="E1 x E1 with moduli (z1 + z2, z2)")


def e2_psi(c1=Fraction(1, 3), c2=Fraction(1, 5)) -> NilpotentOrbitData:
    base = e2()
    g1 = _scale(_block(_E2_n, ZERO2), c1)
    g2 = _scale(_block(ZERO2, _E2_n), c2)
    return _orbit("e2_psi", _block(_E2_Q, _E2_Q), 1, (2, 2),
                  [N.rows for N in base.cone.generators], {1: [_unit(4, 1), _unit(4, 3)]},
                  psi=[g1, g2], note="E2 with square-zero holomorphic corrections")


def sym2_e1() -> NilpotentOrbitData:
    """Sym^2 of E1: f1 = e1^2, f2 = e1 e2, f3 = e2^2; N f1 = 2 f2, N f2 = f3."""
    Q = [[0, 0, 2], [0, -1, 0], [2, 0, 0]]
    N = [[0, 0, 0], [2, 0, 0], [0, 1, 0]]
    F = {2: [_unit(3, 0)], 1: [_unit(3, 0), _unit(3, 1)]}
    return _orbit("sym2_e1", Q, 2, (1, 1, 1), [N], F, note="symmetric square of E1")


def e2_hom() -> NilpotentOrbitData:
    """H^1(E_a) ⊗ H^1(E_b) for the two factors of E2 (moduli z1 + z2 and z2).

    Basis e_i ⊗ e_j in the order 11, 12, 21, 22, each factor in E1
    conventions. Rational classes here are isogeny classes between the factors.
    """
    na = _kron(E1_N, I2)
    nb = _kron(I2, E1_N)
    N1 = na
    N2 = _add(na, nb)
    Q = _kron(E1_Q, E1_Q)
    d = 4
    F = {2: [_unit(d, 0)], 1: [_unit(d, 0), _unit(d, 1), _unit(d, 2)]}
    return _orbit("e2_hom", Q, 2, (1, 2, 1), [N1, N2], F,
                  note="Hom between the two elliptic factors of E2")


def _wedge2_operator(M: Matrix) -> list[list]:
    """Derivation action of M on Λ^2 in the lexicographic basis."""
    d = M.shape[0]
    pairs = list(combinations(range(d), 2))
    index = {p: i for i, p in enumerate(pairs)}
    out = [[Fraction(0)] * len(pairs) for _ in pairs]

    def add(a, b, c):
        if a == b:
            return
        sign = 1
        if a > b:
            a, b, sign = b, a, -1
        out[index[(a, b)]][col] += sign * c

    for col, (a, b) in enumerate(pairs):
        for k in range(d):
            add(k, b, M.rows[k][a])
            add(a, k, M.rows[k][b])
    return out


def e2_wedge2() -> NilpotentOrbitData:
    """Λ^2 of E2 (rank 6, weight 2), containing the Hom piece and both determinants."""
    base = e2()
    from .linalg import wedge_form

    d = 4
    Q = wedge_form(base.lattice.Q, 2).rows
    Ns = [_wedge2_operator(N) for N in base.cone.generators]
    pairs = list(combinations(range(d), 2))
    F1 = base.F[1]
    F1_idx = {i for i in range(d) if F1.contains(_unit(d, i))}
    levels = {2: [], 1: []}
    for j, (a, b) in enumerate(pairs):
        hi = (a in F1_idx) + (b in F1_idx)
        if hi >= 2:
            levels[2].append(_unit(len(pairs), j))
        if hi >= 1:
            levels[1].append(_unit(len(pairs), j))
    return _orbit("e2_wedge2", Q, 2, (1, 4, 1), Ns, levels,
                  note="exterior square of E2")


CURATED = {
    "e1": e1,
    "e1_psi": e1_psi,
    "e2": e2,
    "e2_psi": e2_psi,
    "sym2_e1": sym2_e1,
    "e2_hom": e2_hom,
    "e2_wedge2": e2_wedge2,
}


def curated(name: str) -> NilpotentOrbitData:
    key = name[:-5] if name.endswith(".json") else name
    key = key.replace("-", "_").lower()
    if key not in CURATED:
        raise KeyError(f"unknown curated dataset {name!r}; known: {sorted(CURATED)}")
    return CURATED[key]()


def write_fixtures(directory: Path = DATA_DIR) -> list[Path]:
    from .io import dump_orbit

    directory.mkdir(parents=True, exist_ok=True)
    out = []
    for name, build in CURATED.items():
        path = directory / f"{name}.json"
        dump_orbit(build(), path)
        out.append(path)
    return out


if __name__ == "__main__":
    for p in write_fixtures():
        print(p)
