import cmath
import math
import random
from collections import Counter
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from periodgeom.acceptance import coset_index_bruteforce
from periodgeom.linalg import BackendError, QQi
from periodgeom.reduction import (IDENTITY, S_MATRIX, T_MATRIX, SiegelSetSpec, bs_to_bb, corner_coords,
                                  hecke_degree, hecke_multiset, hecke_points, hecke_representatives,
                                  in_fundamental_set, is_reduced, iwasawa, mobius, reduce_sl2, reduced_defects,
                                  siegel_contains, siegel_intersectors)

rational = st.fractions(min_value=-50, max_value=50, max_denominator=40)
positive = st.fractions(min_value=Fraction(1, 40), max_value=50, max_denominator=40)


def sl2_elements(bound):
    rng = range(-bound, bound + 1)
    return [((a, b), (c, d)) for a in rng for b in rng for c in rng for d in rng if a * d - b * c == 1]


def neg(g):
    return tuple(tuple(-x for x in r) for r in g)


class TestIwasawa:
    def test_orthogonal(self):
        th = 0.7
        k = np.array([[math.cos(th), -math.sin(th)], [math.sin(th), math.cos(th)]])
        n, a, kk = iwasawa(k)
        assert np.allclose(n, np.eye(2)) and np.allclose(a, np.eye(2)) and np.allclose(kk, k)

    def test_upper_triangular(self):
        x, y = 0.3, 4.0
        g = np.array([[y ** 0.5, x * y ** -0.5], [0, y ** -0.5]])
        n, a, k = iwasawa(g)
        assert np.allclose(a, np.diag([y ** 0.5, y ** -0.5]))
        assert np.allclose(n, [[1, x], [0, 1]]) and np.allclose(k, np.eye(2))

    @settings(max_examples=50, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.integers(2, 5))
    def test_random_against_cholesky(self, seed, m):
        g = np.random.default_rng(seed).normal(size=(m, m))
        if abs(np.linalg.det(g)) < 1e-3:
            return
        n, a, k = iwasawa(g)
        assert np.allclose(n @ a @ k, g, rtol=1e-12, atol=1e-12 * np.abs(g).max())
        assert np.allclose(k @ k.T, np.eye(m), atol=1e-12)
        assert np.allclose(np.tril(n, -1), 0) and np.allclose(np.diag(n), 1)
        # oracle: g g^T = (n a)(n a)^T, upper factor from a Cholesky of the reversed Gram matrix
        P = np.eye(m)[::-1]
        L = np.linalg.cholesky(P @ g @ g.T @ P)
        R = P @ L @ P
        assert np.allclose(np.diag(a), np.diag(R), rtol=1e-10)
        assert np.allclose(n, R / np.diag(R)[None, :], rtol=1e-9, atol=1e-9)

    def test_singular(self):
        with pytest.raises(ValueError):
            iwasawa([[1, 2], [2, 4]])
        with pytest.raises(ValueError):
            iwasawa([[1, 2, 3], [4, 5, 6]])


class TestCorner:
    def test_identity(self):
        assert corner_coords(np.eye(4)) == (1.0, 1.0, 1.0)

    def test_rank2(self):
        s = 3.0
        assert corner_coords(np.diag([s, 1 / s])) == pytest.approx((1 / s ** 2,))

    def test_monotone(self):
        vals = [corner_coords([s, 1 / s])[0] for s in (1.0, 1.5, 2.0, 10.0)]
        assert vals == sorted(vals, reverse=True)

    def test_nonpositive(self):
        with pytest.raises(ValueError):
            corner_coords([1.0, 0.0])


class TestSiegelContains:
    def test_points(self):
        S = SiegelSetSpec.strip(1, Fraction(1, 2))
        assert siegel_contains(S, 3j)
        assert not siegel_contains(S, 0.7 + 2j)
        assert not siegel_contains(S, QQi(0, 1))  # strict in y
        assert siegel_contains(S, QQi(Fraction(1, 2), 2))  # closed in x

    def test_rank3_diagonal(self):
        spec = SiegelSetSpec(3, 2, Fraction(1, 2))
        assert siegel_contains(spec, np.diag([4, 1, 0.25]))
        assert not siegel_contains(SiegelSetSpec(3, 5, Fraction(1, 2)), np.diag([4, 1, 0.25]))

    def test_unipotent_bound(self):
        spec = SiegelSetSpec(2, Fraction(1, 2), Fraction(1, 2))
        assert not siegel_contains(spec, np.array([[2, 3], [0, 0.5]]))

    def test_bad_spec(self):
        with pytest.raises(ValueError):
            SiegelSetSpec(2, 0, 1)
        with pytest.raises(ValueError):
            SiegelSetSpec(2, 1, float("inf"))


class TestReduced:
    def test_identity(self):
        ok, defects = is_reduced(np.eye(3), C=1.01)
        assert ok and defects == (1.0, 1.0, 1.0)

    def test_correlated(self):
        b = [[1, 0.9], [0.9, 1]]
        ok, (c1, c2, c3) = is_reduced(b, C=5.0)
        assert not ok and c3 == pytest.approx(100 / 19)
        assert is_reduced(b, C=5.27)[0]

    @pytest.mark.parametrize("y", [1.5, 10, 1e3])
    def test_e1_gram(self, y):
        # on (e2, e1) the form is diag(1/y, y): the ratio condition gives 1/y^2, the others 1
        b = np.diag([y, 1 / y])
        ok, defects = is_reduced(b, basis=[(0, 1), (1, 0)], C=1.01)
        assert ok and defects == pytest.approx((1, 1 / y ** 2, 1))

    def test_not_positive(self):
        with pytest.raises(ValueError):
            is_reduced([[1, 2], [2, 1]])

    @settings(max_examples=60, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.floats(1.0, 10.0), st.floats(0.0, 10.0))
    def test_monotone_in_C(self, seed, C, extra):
        A = np.random.default_rng(seed).normal(size=(3, 3))
        b = A @ A.T + 0.1 * np.eye(3)
        if is_reduced(b, C=C)[0]:
            assert is_reduced(b, C=C + extra)[0]

    def test_defects_formula(self):
        b = np.array([[4.0, 1.0], [1.0, 2.0]])
        assert reduced_defects(b) == pytest.approx((1.0, 2.0, 8 / 7))


class TestReduceSL2:
    def test_i(self):
        z0, g = reduce_sl2(QQi(0, 1))
        assert z0 == QQi(0, 1) and g in (IDENTITY, neg(IDENTITY))

    def test_half_i(self):
        z0, g = reduce_sl2(QQi(0, Fraction(1, 2)))
        assert z0 == QQi(0, 2) and g in (S_MATRIX, neg(S_MATRIX))

    def test_one_plus_i_over_two(self):
        z = QQi(Fraction(1, 2), Fraction(1, 2))
        z0, g = reduce_sl2(z)
        assert z0 == QQi(0, 1) and mobius(g, z) == z0
        assert mobius(S_MATRIX, z) == QQi(-1, 1)

    def test_ties(self):
        assert reduce_sl2(QQi(Fraction(-1, 2), 3))[0] == QQi(Fraction(1, 2), 3)
        w = QQi(Fraction(-5, 13), Fraction(12, 13))  # on the arc with x < 0
        assert reduce_sl2(w)[0] == QQi(Fraction(5, 13), Fraction(12, 13))

    def test_lower_half_plane(self):
        with pytest.raises(ValueError):
            reduce_sl2(QQi(0, -1))

    @settings(max_examples=300, deadline=None)
    @given(rational, positive)
    def test_exact(self, x, y):
        z = QQi(x, y)
        z0, g = reduce_sl2(z)
        assert g[0][0] * g[1][1] - g[0][1] * g[1][0] == 1
        assert mobius(g, z) == z0 and in_fundamental_set(z0)

    @settings(max_examples=100, deadline=None)
    @given(st.floats(-100, 100), st.floats(1e-3, 100))
    def test_float(self, x, y):
        z0, g = reduce_sl2(complex(x, y))
        assert abs(complex(mobius(g, complex(x, y))) - z0) <= 1e-9 * max(1, abs(z0))
        assert abs(z0.real) <= 0.5 + 1e-12 and abs(z0) >= 1 - 1e-12


class TestHecke:
    def test_identity(self):
        z = QQi(Fraction(3, 7), Fraction(1, 5))
        assert hecke_multiset(z, [[1, 0], [0, 1]]) == Counter([reduce_sl2(z)[0]])

    def test_t2_i(self):
        assert hecke_multiset(QQi(0, 1), [[1, 0], [0, 2]]) == Counter({QQi(0, 2): 2, QQi(0, 1): 1})

    def test_t3_i(self):
        # i/3 -> 3i, 3i, (i+1)/3 and (i+2)/3 both reduce to (1+3i)/2
        got = hecke_multiset(QQi(0, 1), [[1, 0], [0, 3]])
        assert got == Counter({QQi(0, 3): 2, QQi(Fraction(1, 2), Fraction(3, 2)): 2})

    @pytest.mark.parametrize("p", [2, 3, 5, 7])
    def test_degree(self, p):
        assert hecke_degree([[1, 0], [0, p]]) == p + 1 == coset_index_bruteforce(p)

    def test_scaling_and_strings(self):
        assert hecke_degree([["1/2", 0], [0, 1]]) == 3
        assert hecke_degree([[3, 0], [0, 3]]) == 1

    def test_representative_action(self):
        reps = hecke_representatives([[1, 0], [0, 2]])
        z = QQi(Fraction(1, 3), 2)
        images = sorted((mobius(r, z) for r in reps), key=lambda w: (w.re, w.im))
        want = sorted([z / 2, (z + 1) / 2, z * 2], key=lambda w: (w.re, w.im))
        assert images == want

    def test_float_rejected(self):
        with pytest.raises(BackendError):
            hecke_points(QQi(0, 1), [[1.0, 0], [0, 2]])

    def test_bad_det(self):
        with pytest.raises(ValueError):
            hecke_degree([[0, 1], [1, 0]])

    @settings(max_examples=40, deadline=None)
    @given(rational, positive, st.sampled_from(sl2_elements(2)), st.sampled_from([2, 3, 5]))
    def test_gamma_invariance(self, x, y, gm, p):
        z = QQi(x, y)
        g = [[1, 0], [0, p]]
        assert hecke_multiset(mobius(gm, z), g) == hecke_multiset(z, g)


class TestIntersectors:
    def test_standard_strip(self):
        S = SiegelSetSpec.strip()
        rep = siegel_intersectors(S, S, search_bound=3)
        Tinv = ((1, -1), (0, 1))
        want = {IDENTITY, neg(IDENTITY), T_MATRIX, neg(T_MATRIX), Tinv, neg(Tinv)}
        assert set(rep.elements) == want
        assert rep.stable and rep.doubled_count == rep.count == 6 and not rep.undecided

    def test_lower_unipotent_excluded(self):
        S = SiegelSetSpec.strip()
        rep = siegel_intersectors(S, S, search_bound=1, check_stability=False)
        assert ((1, 0), (1, 1)) not in rep.elements

    @pytest.mark.parametrize("t", [Fraction(1, 2), Fraction(3, 4)])
    def test_sampling_oracle(self, t):
        S = SiegelSetSpec.strip(t)
        rep = siegel_intersectors(S, S, search_bound=3)
        assert rep.stable and not rep.undecided
        rng = random.Random(0)
        hits = set()
        elements = sl2_elements(3)
        for _ in range(1500):
            z = complex(rng.uniform(-0.5, 0.5), float(t) * math.exp(rng.uniform(0, 1.5)))
            for gm in elements:
                (a, b), (c, d) = gm
                w = (a * z + b) / (c * z + d)
                if abs(w.real) < 0.5 - 1e-9 and w.imag > float(t) + 1e-9:
                    hits.add(gm)
        assert hits <= set(rep.elements)
        assert len(hits) >= rep.count - 8  # the rest only touch along boundary lines


class TestBsToBb:
    def test_value(self):
        _, w = bs_to_bb(0.25, 1.0)
        assert abs(w - 1j * math.exp(-2 * math.pi)) <= 1e-12

    @given(st.floats(-5, 5), st.floats(0.05, 20))
    def test_periodic(self, x, t):
        a, b = bs_to_bb(x, t)[1], bs_to_bb(x + 1, t)[1]
        assert abs(a - b) <= 1e-12 * max(1.0, abs(a))

    def test_cusp(self):
        assert bs_to_bb(0.4, 0.0) == (1, 0)
        assert abs(bs_to_bb(0.4, 1e-3)[1]) < 1e-300
        assert abs(bs_to_bb(0.4, 0.01)[1]) < abs(bs_to_bb(0.4, 0.1)[1]) < abs(bs_to_bb(0.4, 1)[1])

    def test_negative(self):
        with pytest.raises(ValueError):
            bs_to_bb(0.0, -1.0)
