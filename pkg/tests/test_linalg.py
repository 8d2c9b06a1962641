from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from periodgeom.linalg import (BackendError, DegenerateFlagError, Filtration, FloatSubspace, Matrix, QQi,
                               Subspace, format_scalar, gram_schmidt, nilpotent_exp, parse_scalar, sesq,
                               subspace_sum_intersect, wedge_form, wedge_power)

E = lambda d, i: tuple(Fraction(int(j == i)) for j in range(d))  # noqa: E731

small = st.integers(-4, 4)


def rational_matrix(rows, cols):
    return st.lists(st.lists(small, min_size=cols, max_size=cols), min_size=rows, max_size=rows).map(Matrix)


def vectors(d, count):
    return st.lists(st.lists(small, min_size=d, max_size=d), min_size=0, max_size=count)


class TestScalars:
    @pytest.mark.parametrize("text,value", [
        ("3", Fraction(3)), ("-1/2", Fraction(-1, 2)), ("i", QQi(0, 1)), ("-3i", QQi(0, -3)),
        ("1/2+3/4i", QQi(Fraction(1, 2), Fraction(3, 4))), ("2-i", QQi(2, -1)),
    ])
    def test_parse(self, text, value):
        assert parse_scalar(text) == value

    @given(st.fractions(max_denominator=50), st.fractions(max_denominator=50))
    def test_format_roundtrip(self, a, b):
        x = QQi(a, b) if b else a
        assert parse_scalar(format_scalar(x)) == x

    def test_qqi_field(self):
        a, b = QQi(1, 2), QQi(Fraction(1, 3), -1)
        assert (a * b) / b == a
        assert a * a.conjugate() == a.norm() == 5
        assert QQi(3, 0) == Fraction(3) and hash(QQi(3, 0)) == hash(Fraction(3))

    def test_floats_rejected_by_exact_backend(self):
        with pytest.raises(BackendError):
            Matrix([[0.5, 0], [0, 1]])


class TestSubspaces:
    def test_complementary_lines(self):
        S, I = subspace_sum_intersect(Subspace.span([E(2, 0)], 2), Subspace.span([E(2, 1)], 2))
        assert S == Subspace.full(2) and I.dim == 0

    def test_idempotent(self):
        A = Subspace.span([(1, 2, 3), (0, 1, 1)], 3)
        assert subspace_sum_intersect(A, A) == (A, A)

    def test_derived_example(self):
        # e1+e2 is not in span(e2, e3), so the sum is everything and the meet is 0
        A = Subspace.span([(1, 1, 0)], 3)
        B = Subspace.span([E(3, 1), E(3, 2)], 3)
        S, I = subspace_sum_intersect(A, B)
        assert S == Subspace.full(3) and I == Subspace.zero(3)

    def test_ambient_mismatch(self):
        with pytest.raises(ValueError):
            Subspace.full(2) + Subspace.full(3)

    def test_normal_form_unique(self):
        assert Subspace.span([(1, 1, 0), (0, 1, 0)], 3) == Subspace.span([(2, 0, 0), (3, 5, 0)], 3)

    def test_backend_mixing(self):
        with pytest.raises(BackendError):
            Subspace.full(2) & FloatSubspace(np.eye(2))

    @settings(max_examples=150, deadline=None)
    @given(vectors(5, 4), vectors(5, 4))
    def test_dimension_formula(self, a, b):
        A, B = Subspace.span(a, 5), Subspace.span(b, 5)
        S, I = subspace_sum_intersect(A, B)
        assert S.dim + I.dim == A.dim + B.dim
        assert A <= S and B <= S and I <= A and I <= B

    @settings(max_examples=60, deadline=None)
    @given(vectors(4, 3), rational_matrix(4, 4))
    def test_preimage(self, a, M):
        S = Subspace.span(a, 4)
        P = S.preimage(M)
        assert P.apply(M) <= S
        # everything mapping into S is in P: check on the kernel and on P's complement
        assert M.kernel() <= P


class TestFiltration:
    def test_rejects_non_nested(self):
        with pytest.raises(ValueError):
            Filtration({0: Subspace.span([E(2, 0)], 2), 1: Subspace.span([E(2, 1)], 2)}, 2)

    def test_extends_outside_range(self):
        F = Filtration({0: Subspace.full(2), 1: Subspace.span([E(2, 0)], 2), 2: Subspace.zero(2)}, 2,
                       decreasing=True)
        assert F[-5] == Subspace.full(2) and F[9].dim == 0
        assert F.gr_dims() == {0: 1, 1: 1}


class TestExp:
    def test_2x2(self):
        z = QQi(Fraction(1, 3), 2)
        assert nilpotent_exp(Matrix([[0, 0], [1, 0]]), z) == Matrix([[1, 0], [z, 1]])

    def test_zero(self):
        assert nilpotent_exp(Matrix.zeros(3), 5) == Matrix.identity(3)

    def test_3x3_jordan(self):
        N = Matrix([[0, 0, 0], [2, 0, 0], [0, 1, 0]])
        z = QQi(Fraction(1, 2), 3)
        assert nilpotent_exp(N, z) @ E(3, 0) == (1, 2 * z, z * z)

    def test_not_nilpotent(self):
        with pytest.raises(ValueError):
            nilpotent_exp(Matrix([[1, 0], [0, 0]]), 1)

    @settings(max_examples=60, deadline=None)
    @given(st.fractions(max_denominator=9), st.fractions(max_denominator=9),
           st.fractions(max_denominator=9), st.fractions(max_denominator=9), st.integers(0, 3))
    def test_additive(self, a, b, c, d, which):
        Ns = [Matrix([[0, 0, 0], [2, 0, 0], [0, 1, 0]]), Matrix([[0, 1, 3], [0, 0, -2], [0, 0, 0]]),
              Matrix([[0, 0], [1, 0]]), Matrix([[0, 0, 0, 0], [1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 5, 0]])]
        N = Ns[which]
        z, w = QQi(a, b), QQi(c, d)
        assert nilpotent_exp(N, z) @ nilpotent_exp(N, w) == nilpotent_exp(N, z + w)

    def test_float_backend(self):
        N = np.array([[0, 0], [1, 0]], dtype=complex)
        assert np.allclose(nilpotent_exp(N, 2j), [[1, 0], [2j, 1]])


class TestWedge:
    def test_k1(self):
        M = Matrix([[1, 2], [3, 4]])
        assert wedge_power(M, 1) == M

    def test_top(self):
        M = Matrix([[1, 2, 0], [3, 4, 1], [0, 1, 1]])
        assert wedge_power(M, 3) == Matrix([[M.det()]])

    def test_diag(self):
        a, b, c = Fraction(2), Fraction(3), Fraction(5)
        assert wedge_power(Matrix.diag([a, b, c]), 2) == Matrix.diag([a * b, a * c, b * c])

    def test_out_of_range(self):
        with pytest.raises(ValueError):
            wedge_power(Matrix.identity(2), 3)

    @settings(max_examples=40, deadline=None)
    @given(rational_matrix(4, 4), rational_matrix(4, 4))
    def test_functorial(self, A, B):
        assert wedge_power(A @ B, 2) == wedge_power(A, 2) @ wedge_power(B, 2)

    def test_form_is_induced(self):
        Q = Matrix([[0, 1, 0, 0], [-1, 0, 0, 0], [0, 0, 0, 1], [0, 0, -1, 0]])
        A = Matrix([[1, 2, 0, 1], [0, 1, 1, 0], [3, 0, 1, 1], [0, 0, 2, 1]])
        # Λ^2 of (A^T Q A) equals Λ^2(A)^T Λ^2(Q) Λ^2(A)
        assert wedge_form(A.T @ Q @ A, 2) == wedge_power(A, 2).T @ wedge_form(Q, 2) @ wedge_power(A, 2)


class TestGramSchmidt:
    def test_orthonormal_unchanged(self):
        ortho, _ = gram_schmidt(Matrix.identity(3), [E(3, 0), E(3, 1), E(3, 2)])
        assert ortho == [E(3, 0), E(3, 1), E(3, 2)]

    def test_one_projection(self):
        ortho, _ = gram_schmidt(Matrix.identity(2), [(1, 0), (1, 1)])
        assert ortho == [(1, 0), (0, 1)]

    @settings(max_examples=50, deadline=None)
    @given(rational_matrix(3, 3))
    def test_exact_diagonal(self, M):
        if M.det() == 0:
            return
        ortho, _ = gram_schmidt(Matrix.identity(3), M.columns())
        G = [[sesq(Matrix.identity(3), a, b) for b in ortho] for a in ortho]
        assert all(G[i][j] == 0 for i in range(3) for j in range(3) if i != j)

    def test_float_diagonal(self):
        rng = np.random.default_rng(4)
        H = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
        form = H @ H.conj().T + 4 * np.eye(4)
        basis = list(rng.normal(size=(4, 4)))
        ortho, _ = gram_schmidt(form.T, basis)
        G = np.array([[sesq(form.T, a, b) for b in ortho] for a in ortho])
        off = np.abs(G - np.diag(np.diag(G))).max()
        assert off <= 1e-12 * np.abs(np.diag(G)).max()

    def test_degenerate_flag(self):
        Q = Matrix([[0, 1], [1, 0]])
        with pytest.raises(DegenerateFlagError) as info:
            gram_schmidt(Q, [E(2, 0), E(2, 1)])
        assert info.value.index == 0
