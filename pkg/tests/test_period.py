import cmath
import dataclasses
import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from periodgeom import datasets
from periodgeom.datasets import _orbit
from periodgeom.linalg import Matrix, QQi, Subspace, gram_schmidt, nilpotent_exp, sesq
from periodgeom.mixed_hodge import NilpotentCone
from periodgeom.period import (UnpolarizedError, adapted_flag, direct_chain, gamma, hodge_form,
                               hodge_metric_matrix, hodge_norm, hodge_point, orbit_filtration, validate_orbit,
                               wedge_norm_chain)

coord = st.fractions(min_value=-3, max_value=3, max_denominator=20)
height = st.fractions(min_value=Fraction(1, 4), max_value=40, max_denominator=20)


def e1_oracle(z):
    """Gram matrix of h on (e1, e2) for tau = z: the standard upper half-plane metric."""
    x, y = z.real, z.imag
    return np.array([[(x * x + y * y) / y, -x / y], [-x / y, 1 / y]])


def sym2_oracle(h):
    """Induced form on f1 = e1^2, f2 = e1 e2, f3 = e2^2."""
    mono = [(0, 0), (0, 1), (1, 1)]
    return np.array([[h[a, c] * h[b, d] + h[a, d] * h[b, c] for c, d in mono] for a, b in mono])


def with_cone(data, generators):
    return dataclasses.replace(data, cone=NilpotentCone(data.lattice, tuple(generators)))


class TestValidate:
    @pytest.mark.parametrize("name", sorted(datasets.CURATED))
    def test_curated_pass(self, name):
        rep = validate_orbit(datasets.curated(name), integral=True)
        assert rep.ok, rep.failures()

    def test_non_isometry(self):
        bad = with_cone(datasets.sym2_e1(), [Matrix([[0, 0, 0], [1, 0, 0], [0, 1, 0]])])
        names = [c.name for c in validate_orbit(bad).failures()]
        assert "N_1: infinitesimal isometry" in names

    def test_wrong_dimensions(self):
        data = datasets.sym2_e1()
        F = datasets._hodge_filtration({2: [(1, 0, 0), (0, 1, 0)], 1: [(1, 0, 0), (0, 1, 0)]}, 3, 2)
        names = [c.name for c in validate_orbit(dataclasses.replace(data, F=F)).failures()]
        assert "F: dimensions" in names

    def test_non_commuting(self):
        data = datasets.e2()
        A, B = data.cone.generators
        C = Matrix([[0, 0, 0, 0], [0, 0, 1, 0], [0, 0, 0, 0], [0, 0, 0, 0]])
        names = [c.name for c in validate_orbit(with_cone(data, [A, C])).failures()]
        assert "N_1, N_2: commute" in names

    def test_griffiths(self):
        data = datasets.sym2_e1()
        N = data.cone.generators[0]
        names = [c.name for c in validate_orbit(with_cone(data, [N @ N])).failures()]
        assert any("Griffiths" in n for n in names)

    def test_psi_shift(self):
        data = datasets.e1_psi()
        bad = dataclasses.replace(data, psi=(Matrix([[0, 1], [0, 0]]),))
        names = [c.name for c in validate_orbit(bad).failures()]
        assert "g_1: shifts F by at most one step" not in names  # one step up in weight 1 is allowed
        sym = datasets.sym2_e1()
        g = Matrix([[0, 0, 0], [0, 0, 0], [1, 0, 0]])
        names = [c.name for c in validate_orbit(dataclasses.replace(sym, psi=(g,))).failures()]
        assert "g_1: shifts F by at most one step" in names


class TestFiltration:
    def test_zero_cone(self):
        data = datasets.e1()
        trivial = with_cone(data, [Matrix.zeros(2)])
        assert orbit_filtration(trivial, QQi(1, 5)) == data.F

    @given(coord, height)
    def test_e1(self, x, y):
        z = QQi(x, y)
        assert orbit_filtration(datasets.e1(), z)[1] == Subspace.span([(1, z)], 2)

    @pytest.mark.parametrize("name", ["e1_psi", "e2_psi"])
    def test_psi_periodicity(self, name):
        data = datasets.curated(name)
        rng = np.random.default_rng(0)
        for j in range(data.n):
            z = rng.uniform(0, 1, data.n) + 1j * rng.uniform(1, 3, data.n)
            z1 = z.copy()
            z1[j] += 1
            Tj = nilpotent_exp(data.cone.generators[j], 1).to_numpy()
            assert np.allclose(gamma(data, tuple(z1)), Tj @ gamma(data, tuple(z)), atol=1e-12)


class TestHodge:
    def test_e1_at_i(self):
        hp = hodge_point(datasets.e1(), QQi(0, 1))
        assert hp.polarized and hp.exact
        assert hp.pieces[(1, 0)] == Subspace.span([(1, QQi(0, 1))], 2)
        assert hp.pieces[(0, 1)] == hp.pieces[(1, 0)].conj()

    def test_e1_lower_half_plane(self):
        hp = hodge_point(datasets.e1(), QQi(0, -1))
        assert not hp.polarized
        with pytest.raises(UnpolarizedError):
            hodge_form(datasets.e1(), QQi(0, -1), (1, 0), (1, 0), hp)

    @pytest.mark.parametrize("name", ["e1", "e2", "sym2_e1", "e2_hom", "e2_wedge2"])
    def test_weil_square(self, name):
        data = datasets.curated(name)
        hp = hodge_point(data, tuple(QQi(Fraction(1, 3), 2 + j) for j in range(data.n)))
        sign = -1 if data.weight % 2 else 1
        assert hp.weil @ hp.weil == Matrix.identity(data.rank).scale(sign)

    @settings(max_examples=40, deadline=None)
    @given(coord, height)
    def test_e1_closed_form_exact(self, x, y):
        G = hodge_metric_matrix(datasets.e1(), QQi(x, y), [(1, 0), (0, 1)])
        assert G == Matrix([[(x * x + y * y) / y, -x / y], [-x / y, 1 / y]])
        assert G.det() == 1

    @settings(max_examples=40, deadline=None)
    @given(st.floats(-3, 3), st.floats(0.3, 200))
    def test_e1_closed_form_float(self, x, y):
        G = hodge_metric_matrix(datasets.e1(), complex(x, y), [(1, 0), (0, 1)])
        assert np.allclose(G, e1_oracle(complex(x, y)), rtol=1e-10, atol=1e-12)
        assert abs(np.linalg.det(G) - 1) < 1e-9

    @settings(max_examples=30, deadline=None)
    @given(coord, coord, height, height)
    def test_e2_factor_form(self, x1, x2, y1, y2):
        z = (QQi(x1, y1), QQi(x2, y2))
        basis = [tuple(Fraction(int(i == j)) for j in range(4)) for i in range(4)]
        G = hodge_metric_matrix(datasets.e2(), z, basis).to_numpy()
        # factor a on (e2, e1) has tau = z1 + z2; factor b on (e4, e3) has tau = z2
        a = e1_oracle(complex(z[0]) + complex(z[1]))
        b = e1_oracle(complex(z[1]))
        want = np.zeros((4, 4))
        want[np.ix_([1, 0], [1, 0])] = a
        want[np.ix_([3, 2], [3, 2])] = b
        assert np.allclose(G, want, rtol=1e-12, atol=1e-12)
        if x1 == x2 == 0:
            assert G[1, 1] == float(y1 + y2) and G[3, 3] == float(y2)

    @settings(max_examples=30, deadline=None)
    @given(st.floats(-2, 2), st.floats(0.5, 30))
    def test_sym2_closed_form(self, x, y):
        z = complex(x, y)
        basis = [(1, 0, 0), (0, 1, 0), (0, 0, 1)]
        G = hodge_metric_matrix(datasets.sym2_e1(), z, basis)
        assert np.allclose(G, sym2_oracle(e1_oracle(z)), rtol=1e-9, atol=1e-9)

    @settings(max_examples=30, deadline=None)
    @given(st.sampled_from(sorted(datasets.CURATED)), st.integers(0, 2**32 - 1))
    def test_positive_definite(self, name, seed):
        data = datasets.curated(name)
        rng = np.random.default_rng(seed)
        z = tuple(rng.uniform(-1, 1) + 1j * rng.uniform(2, 20) for _ in range(data.n))
        basis = [tuple(Fraction(int(i == j)) for j in range(data.rank)) for i in range(data.rank)]
        G = np.asarray(hodge_metric_matrix(data, z, basis))
        assert np.allclose(G, G.conj().T, atol=1e-9 * np.abs(G).max())
        assert np.linalg.eigvalsh((G + G.conj().T) / 2).min() > 0
        u = rng.integers(-5, 6, data.rank)
        if u.any():
            assert hodge_norm(data, z, tuple(int(c) for c in u)) > 0

    @pytest.mark.parametrize("name", ["e1", "e2", "sym2_e1", "e1_psi", "e2_psi", "e2_hom", "e2_wedge2"])
    def test_positivity_threshold(self, name):
        data = datasets.curated(name)
        grid = [complex(x, y) for x in (0, 0.25, 0.5, 0.75) for y in (2, 3, 7, 20, 50)]
        rng = random.Random(0)
        for _ in range(30):
            z = tuple(rng.choice(grid) for _ in range(data.n))
            assert hodge_point(data, z).polarized, z

    @pytest.mark.parametrize("name,plain", [("e1_psi", "e1"), ("e2_psi", "e2")])
    def test_psi_ratio(self, name, plain):
        data, base = datasets.curated(name), datasets.curated(plain)
        z = tuple(complex(0.3, 1e3 * (data.n - j)) for j in range(data.n))
        for i in range(data.rank):
            u = tuple(int(i == j) for j in range(data.rank))
            ratio = hodge_norm(data, z, u) / hodge_norm(base, z, u)
            assert abs(ratio - 1) < 0.05


class TestWedgeChain:
    def test_rank_one(self):
        data = _orbit("pt", [[1]], 0, (1,), [[[0]]], {})
        flag = adapted_flag(data)
        Bw, Bu, h = wedge_norm_chain(data, (QQi(0, 1),), flag, 1, (2,), (3,))
        w = flag[0][0]
        assert Bw == sesq(data.lattice.Q, w, w) and h == 6

    def test_e1_exact_against_gram_schmidt(self):
        data = datasets.e1()
        y = Fraction(7, 2)
        z = (QQi(0, y),)
        flag = adapted_flag(data)
        G = gamma(data, z)
        ortho, _ = gram_schmidt(data.lattice.Q, [G @ w for w in flag[0]])
        Bw, _, _ = wedge_norm_chain(data, z, flag, 2, (1, 0), (0, 1))
        assert Bw == sesq(data.lattice.Q, ortho[1], ortho[1])

    @settings(max_examples=25, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_e2_orthogonal_expansion(self, seed):
        rng = random.Random(seed)
        data = datasets.e2()
        flag = adapted_flag(data)
        z = tuple(complex(rng.uniform(0, 1), y) for y in sorted((rng.uniform(2, 50) for _ in range(2)), reverse=True))
        u = tuple(rng.randint(-5, 5) for _ in range(4))
        v = tuple(rng.randint(-5, 5) for _ in range(4))
        total = sum(wedge_norm_chain(data, z, flag, i, u, v)[2] for i in range(1, 5))
        direct = complex(hodge_form(data, z, u, v))
        assert abs(total - direct) <= 1e-9 * max(1.0, abs(direct))
        for i, row in enumerate(direct_chain(data, z, flag, u, v), 1):
            got = wedge_norm_chain(data, z, flag, i, u, v)
            assert np.allclose(got, row, rtol=1e-9)

    def test_exact_chain_matches_direct(self):
        data = datasets.e2()
        flag = adapted_flag(data)
        z = (QQi(Fraction(1, 3), 5), QQi(Fraction(-1, 2), 2))
        u, v = (1, 2, 0, -1), (3, 0, 1, 1)
        rows = direct_chain(data, z, flag, u, v)
        for i in range(1, 5):
            assert tuple(wedge_norm_chain(data, z, flag, i, u, v)) == tuple(rows[i - 1])

    def test_non_monotone_flag(self):
        data = datasets.e1()
        ws, ps = adapted_flag(data)
        with pytest.raises(ValueError):
            wedge_norm_chain(data, (QQi(0, 2),), (ws[::-1], ps[::-1]), 1, (1, 0), (0, 1))
