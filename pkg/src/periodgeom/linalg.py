"""Exact and floating linear algebra over Q and Q(i).

Two backends live side by side:

* exact: :class:`Matrix` with entries in ``Fraction`` or :class:`QQi`
  (Gaussian rationals), plus :class:`Subspace` in reduced echelon normal form;
* float: plain ``numpy`` arrays, plus :class:`FloatSubspace` with an
  orthonormal basis.

Functions that accept either backend dispatch on the argument type. Passing a
float where an exact value is required (or vice versa) raises
:class:`BackendError`.
"""
from __future__ import annotations

import math
import re
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Sequence

import numpy as np
import scipy.linalg


class BackendError(TypeError):
    """Exact and float values were mixed in one operation."""


class DegenerateFlagError(ValueError):
    def __init__(self, index: int, msg: str = ""):
        self.index = index
        super().__init__(msg or f"form degenerate on partial flag at index {index}")


# ---------------------------------------------------------------------------
# Gaussian rationals


class QQi:
    """Exact complex number ``re + im*i`` with rational parts."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = Fraction(re)
        self.im = Fraction(im)

    @staticmethod
    def _coerce(x):
        if isinstance(x, QQi):
            return x
        if isinstance(x, (int, Fraction)):
            return QQi(x, 0)
        return None

    def __add__(self, other):
        o = QQi._coerce(other)
        if o is None:
            return NotImplemented
        return QQi(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __sub__(self, other):
        o = QQi._coerce(other)
        if o is None:
            return NotImplemented
        return QQi(self.re - o.re, self.im - o.im)

    def __rsub__(self, other):
        o = QQi._coerce(other)
        if o is None:
            return NotImplemented
        return o - self

    def __mul__(self, other):
        o = QQi._coerce(other)
        if o is None:
            return NotImplemented
        return QQi(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = QQi._coerce(other)
        if o is None:
            return NotImplemented
        n = o.re * o.re + o.im * o.im
        if n == 0:
            raise ZeroDivisionError("QQi division by zero")
        return QQi((self.re * o.re + self.im * o.im) / n, (self.im * o.re - self.re * o.im) / n)

    def __rtruediv__(self, other):
        o = QQi._coerce(other)
        if o is None:
            return NotImplemented
        return o / self

    def __neg__(self):
        return QQi(-self.re, -self.im)

    def __pos__(self):
        return self

    def __pow__(self, n: int):
        if not isinstance(n, int):
            return NotImplemented
        if n < 0:
            return QQi(1) / (self ** (-n))
        out, base = QQi(1), self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def conjugate(self):
        return QQi(self.re, -self.im)

    def norm(self) -> Fraction:
        return self.re * self.re + self.im * self.im

    def __eq__(self, other):
        o = QQi._coerce(other)
        if o is None:
            if isinstance(other, (float, complex)):
                return complex(self) == other
            return NotImplemented
        return self.re == o.re and self.im == o.im

    def __hash__(self):
        if self.im == 0:
            return hash(self.re)
        return hash((self.re, self.im))

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def __repr__(self):
        return f"QQi({self.re!s}, {self.im!s})"

    def __str__(self):
        return format_scalar(self)


_CPLX_RE = re.compile(
    r"^\s*(?P<re>[+-]?\d+(?:/\d+)?)?\s*(?:(?P<sign>[+-])\s*(?P<im>\d+(?:/\d+)?)?\s*\*?\s*i)?\s*$"
)
_PURE_IM_RE = re.compile(r"^\s*(?P<im>[+-]?(?:\d+(?:/\d+)?)?)\s*\*?\s*i\s*$")


def parse_scalar(s) -> Fraction | QQi:
    """Parse ``"p/q"``, ``"a/b+c/di"``, ``"i"``, ``"-3i"`` into an exact scalar."""
    if isinstance(s, (Fraction, QQi)):
        return _normalize(s)
    if isinstance(s, (int, np.integer)):
        return Fraction(int(s))
    if not isinstance(s, str):
        raise BackendError(f"expected an exact scalar or rational string, got {type(s).__name__}")
    t = s.replace(" ", "")
    m = _PURE_IM_RE.match(t)
    if m:
        im = m.group("im")
        if im in ("", "+"):
            im = "1"
        elif im == "-":
            im = "-1"
        return _normalize(QQi(0, Fraction(im)))
    m = _CPLX_RE.match(t)
    if not m or (m.group("re") is None and m.group("sign") is None):
        raise ValueError(f"cannot parse exact scalar {s!r}")
    re_part = Fraction(m.group("re") or 0)
    if m.group("sign") is None:
        return re_part
    im_part = Fraction(m.group("im") or 1)
    if m.group("sign") == "-":
        im_part = -im_part
    return _normalize(QQi(re_part, im_part))


def _fmt_frac(x: Fraction) -> str:
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def format_scalar(x) -> str:
    """Inverse of :func:`parse_scalar` (``2i``, ``1/2-3i``, ``5``)."""
    if isinstance(x, QQi):
        if x.im == 0:
            return _fmt_frac(x.re)
        if x.im == 1:
            im = "i"
        elif x.im == -1:
            im = "-i"
        else:
            im = _fmt_frac(x.im) + "i"
        if x.re == 0:
            return im
        return _fmt_frac(x.re) + ("" if im.startswith("-") else "+") + im
    return _fmt_frac(Fraction(x))


def _normalize(x):
    if isinstance(x, QQi) and x.im == 0:
        return x.re
    return x


def conj(x):
    if isinstance(x, QQi):
        return x.conjugate()
    if isinstance(x, (int, Fraction)):
        return x
    return np.conj(x)


def is_exact_scalar(x) -> bool:
    return isinstance(x, (int, Fraction, QQi)) and not isinstance(x, bool)


def exact(x) -> Fraction | QQi:
    """Coerce to an exact scalar, refusing floats."""
    if isinstance(x, (float, complex, np.floating, np.complexfloating)):
        raise BackendError("float value passed to the exact backend")
    return parse_scalar(x)


# ---------------------------------------------------------------------------
# exact matrices


def _rref(rows: list[list], ncols: int):
    """Reduced row echelon form in place; returns (rows, pivot columns)."""
    pivots = []
    r = 0
    nrows = len(rows)
    for c in range(ncols):
        if r == nrows:
            break
        p = next((i for i in range(r, nrows) if rows[i][c] != 0), None)
        if p is None:
            continue
        rows[r], rows[p] = rows[p], rows[r]
        piv = rows[r][c]
        if piv != 1:
            rows[r] = [_normalize(v / piv) for v in rows[r]]
        for i in range(nrows):
            if i != r:
                f = rows[i][c]
                if f != 0:
                    rows[i] = [_normalize(a - f * b) for a, b in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
    return rows[:r], pivots


def _det(rows: list[list]):
    n = len(rows)
    m = [list(r) for r in rows]
    det = Fraction(1)
    for c in range(n):
        p = next((i for i in range(c, n) if m[i][c] != 0), None)
        if p is None:
            return Fraction(0)
        if p != c:
            m[c], m[p] = m[p], m[c]
            det = -det
        piv = m[c][c]
        det = det * piv
        for i in range(c + 1, n):
            f = m[i][c]
            if f != 0:
                f = f / piv
                m[i] = [a - f * b for a, b in zip(m[i], m[c])]
    return _normalize(det)


class Matrix:
    """Immutable exact matrix over Q or Q(i)."""

    __slots__ = ("rows", "shape", "_hash")

    def __init__(self, rows: Iterable[Iterable]):
        data = tuple(tuple(exact(v) for v in row) for row in rows)
        if not data:
            raise ValueError("matrix needs at least one row")
        ncols = len(data[0])
        if ncols == 0 or any(len(r) != ncols for r in data):
            raise ValueError("ragged or empty matrix rows")
        self.rows = data
        self.shape = (len(data), ncols)
        self._hash = None

    @classmethod
    def _raw(cls, rows):
        m = cls.__new__(cls)
        m.rows = tuple(tuple(r) for r in rows)
        m.shape = (len(m.rows), len(m.rows[0]))
        m._hash = None
        return m

    @classmethod
    def identity(cls, n: int) -> "Matrix":
        one, zero = Fraction(1), Fraction(0)
        return cls._raw([[one if i == j else zero for j in range(n)] for i in range(n)])

    @classmethod
    def zeros(cls, r: int, c: int | None = None) -> "Matrix":
        c = r if c is None else c
        return cls._raw([[Fraction(0)] * c for _ in range(r)])

    @classmethod
    def from_columns(cls, cols: Sequence[Sequence]) -> "Matrix":
        cols = [[exact(v) for v in col] for col in cols]
        return cls._raw([list(r) for r in zip(*cols)])

    @classmethod
    def diag(cls, entries: Sequence) -> "Matrix":
        n = len(entries)
        ent = [exact(e) for e in entries]
        return cls._raw([[ent[i] if i == j else Fraction(0) for j in range(n)] for i in range(n)])

    def __getitem__(self, idx):
        i, j = idx
        return self.rows[i][j]

    def columns(self) -> list[tuple]:
        return [tuple(c) for c in zip(*self.rows)]

    def column(self, j: int) -> tuple:
        return tuple(r[j] for r in self.rows)

    @property
    def T(self) -> "Matrix":
        return Matrix._raw(list(zip(*self.rows)))

    def conj(self) -> "Matrix":
        return Matrix._raw([[conj(v) for v in r] for r in self.rows])

    @property
    def H(self) -> "Matrix":
        return self.conj().T

    def is_real(self) -> bool:
        return all(not isinstance(v, QQi) for r in self.rows for v in r)

    def is_zero(self) -> bool:
        return all(v == 0 for r in self.rows for v in r)

    def _check(self, other):
        if isinstance(other, np.ndarray):
            raise BackendError("cannot combine an exact Matrix with a numpy array")

    def __add__(self, other):
        self._check(other)
        if not isinstance(other, Matrix):
            return NotImplemented
        if self.shape != other.shape:
            raise ValueError("shape mismatch")
        return Matrix._raw([[_normalize(a + b) for a, b in zip(r, s)] for r, s in zip(self.rows, other.rows)])

    def __sub__(self, other):
        self._check(other)
        if not isinstance(other, Matrix):
            return NotImplemented
        if self.shape != other.shape:
            raise ValueError("shape mismatch")
        return Matrix._raw([[_normalize(a - b) for a, b in zip(r, s)] for r, s in zip(self.rows, other.rows)])

    def __neg__(self):
        return Matrix._raw([[-a for a in r] for r in self.rows])

    def scale(self, c) -> "Matrix":
        c = exact(c)
        return Matrix._raw([[_normalize(c * a) for a in r] for r in self.rows])

    def __mul__(self, c):
        self._check(c)
        if isinstance(c, Matrix):
            return NotImplemented
        return self.scale(c)

    __rmul__ = __mul__

    def __matmul__(self, other):
        self._check(other)
        if isinstance(other, Matrix):
            if self.shape[1] != other.shape[0]:
                raise ValueError(f"shape mismatch {self.shape} @ {other.shape}")
            cols = other.columns()
            return Matrix._raw([[_normalize(_dot(r, c)) for c in cols] for r in self.rows])
        if isinstance(other, (tuple, list)):
            if len(other) != self.shape[1]:
                raise ValueError("vector length mismatch")
            vec = [exact(v) for v in other]
            return tuple(_normalize(_dot(r, vec)) for r in self.rows)
        return NotImplemented

    def __pow__(self, n: int) -> "Matrix":
        if self.shape[0] != self.shape[1]:
            raise ValueError("power of non-square matrix")
        out = Matrix.identity(self.shape[0])
        base = self
        while n:
            if n & 1:
                out = out @ base
            base = base @ base
            n >>= 1
        return out

    def det(self):
        if self.shape[0] != self.shape[1]:
            raise ValueError("determinant of non-square matrix")
        return _det(self.rows)

    def rank(self) -> int:
        return len(_rref([list(r) for r in self.rows], self.shape[1])[1])

    def inverse(self) -> "Matrix":
        n, m = self.shape
        if n != m:
            raise ValueError("inverse of non-square matrix")
        aug = [list(r) + [Fraction(int(i == j)) for j in range(n)] for i, r in enumerate(self.rows)]
        red, piv = _rref(aug, 2 * n)
        if piv[:n] != list(range(n)):
            raise ZeroDivisionError("singular matrix")
        return Matrix._raw([r[n:] for r in red])

    def kernel(self) -> "Subspace":
        return Subspace.span(_nullspace(self.rows, self.shape[1]), self.shape[1])

    def image(self) -> "Subspace":
        return Subspace.span(self.columns(), self.shape[0])

    def to_numpy(self) -> np.ndarray:
        dtype = float if self.is_real() else complex
        return np.array([[complex(v) if dtype is complex else float(v) for v in r] for r in self.rows], dtype=dtype)

    def __eq__(self, other):
        if not isinstance(other, Matrix):
            return NotImplemented
        return self.rows == other.rows

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(self.rows)
        return self._hash

    def __repr__(self):
        body = "; ".join(", ".join(format_scalar(v) for v in r) for r in self.rows)
        return f"Matrix([{body}])"

    def tolist(self, fmt: bool = False) -> list[list]:
        if fmt:
            return [[format_scalar(v) for v in r] for r in self.rows]
        return [list(r) for r in self.rows]


def _dot(a, b):
    s = Fraction(0)
    for x, y in zip(a, b):
        if x != 0 and y != 0:
            s = s + x * y
    return s


def _nullspace(rows, ncols: int) -> list[tuple]:
    red, piv = _rref([list(r) for r in rows], ncols)
    free = [c for c in range(ncols) if c not in piv]
    basis = []
    for f in free:
        v = [Fraction(0)] * ncols
        v[f] = Fraction(1)
        for r, p in zip(red, piv):
            v[p] = _normalize(-r[f])
        basis.append(tuple(v))
    return basis


def as_matrix(M) -> Matrix:
    if isinstance(M, Matrix):
        return M
    if isinstance(M, np.ndarray):
        raise BackendError("numpy array passed to the exact backend")
    return Matrix(M)


def matrix_power_nilpotency(N) -> int:
    """Smallest m with N^m = 0, or raise if N is not nilpotent."""
    d = N.shape[0]
    P = Matrix.identity(d) if isinstance(N, Matrix) else np.eye(d)
    for m in range(d + 1):
        if (P.is_zero() if isinstance(N, Matrix) else np.allclose(P, 0)):
            return m
        P = P @ N
    raise ValueError("matrix is not nilpotent")


# ---------------------------------------------------------------------------
# subspaces


class Subspace:
    """Exact subspace of Q^d or Q(i)^d.

    The basis is the reduced row echelon form of any spanning set, so two
    subspaces are equal exactly when their bases are equal.
    """

    __slots__ = ("ambient", "basis", "pivots")

    def __init__(self, ambient: int, basis: tuple, pivots: tuple):
        self.ambient = ambient
        self.basis = basis
        self.pivots = pivots

    @classmethod
    def span(cls, vectors: Iterable[Sequence], ambient: int) -> "Subspace":
        rows = []
        for v in vectors:
            v = [exact(x) for x in v]
            if len(v) != ambient:
                raise ValueError(f"vector of length {len(v)} in ambient dimension {ambient}")
            rows.append(v)
        red, piv = _rref(rows, ambient) if rows else ([], [])
        return cls(ambient, tuple(tuple(r) for r in red), tuple(piv))

    @classmethod
    def zero(cls, ambient: int) -> "Subspace":
        return cls(ambient, (), ())

    @classmethod
    def full(cls, ambient: int) -> "Subspace":
        return cls.span(Matrix.identity(ambient).rows, ambient)

    @property
    def dim(self) -> int:
        return len(self.basis)

    def _same(self, other: "Subspace"):
        if isinstance(other, FloatSubspace):
            raise BackendError("cannot combine exact and float subspaces")
        if self.ambient != other.ambient:
            raise ValueError(f"ambient mismatch: {self.ambient} vs {other.ambient}")

    def __add__(self, other: "Subspace") -> "Subspace":
        self._same(other)
        return Subspace.span(self.basis + other.basis, self.ambient)

    def annihilator(self) -> "Subspace":
        """Vectors w with sum_k w_k v_k = 0 for every v here (bilinear pairing)."""
        if not self.basis:
            return Subspace.full(self.ambient)
        return Subspace.span(_nullspace(self.basis, self.ambient), self.ambient)

    def __and__(self, other: "Subspace") -> "Subspace":
        self._same(other)
        if self.dim == 0 or other.dim == 0:
            return Subspace.zero(self.ambient)
        if self.dim == self.ambient:
            return other
        if other.dim == self.ambient:
            return self
        return (self.annihilator() + other.annihilator()).annihilator()

    def contains(self, v: Sequence) -> bool:
        v = [exact(x) for x in v]
        # reduce against the echelon basis
        for row, p in zip(self.basis, self.pivots):
            f = v[p]
            if f != 0:
                v = [a - f * b for a, b in zip(v, row)]
        return all(x == 0 for x in v)

    def __le__(self, other: "Subspace") -> bool:
        self._same(other)
        return all(other.contains(b) for b in self.basis)

    def __eq__(self, other):
        if not isinstance(other, Subspace):
            return NotImplemented
        return self.ambient == other.ambient and self.basis == other.basis

    def __hash__(self):
        return hash((self.ambient, self.basis))

    def conj(self) -> "Subspace":
        return Subspace.span([[conj(x) for x in b] for b in self.basis], self.ambient)

    def apply(self, M: Matrix) -> "Subspace":
        """Image M(S)."""
        M = as_matrix(M)
        return Subspace.span([M @ b for b in self.basis], M.shape[0])

    def preimage(self, M: Matrix) -> "Subspace":
        """{v : M v in S}."""
        M = as_matrix(M)
        ann = self.annihilator()
        if ann.dim == 0:
            return Subspace.full(M.shape[1])
        A = Matrix._raw(ann.basis) @ M
        return A.kernel()

    def complement_in(self, big: "Subspace") -> "Subspace":
        """Lex-least pivot completion of ``self`` inside ``big`` (``self <= big``)."""
        self._same(big)
        chosen = []
        cur = self
        for b in big.basis:
            if not cur.contains(b):
                chosen.append(b)
                cur = cur + Subspace.span([b], self.ambient)
        return Subspace.span(chosen, self.ambient)

    def is_real(self) -> bool:
        return all(not isinstance(x, QQi) for b in self.basis for x in b)

    def matrix(self) -> Matrix:
        """Basis vectors as the columns of a matrix."""
        if not self.basis:
            raise ValueError("zero subspace has no basis matrix")
        return Matrix.from_columns(self.basis)

    def to_float(self) -> "FloatSubspace":
        if not self.basis:
            return FloatSubspace.zero(self.ambient)
        return FloatSubspace(self.matrix().to_numpy().astype(complex))

    def __repr__(self):
        vs = ", ".join("(" + ", ".join(format_scalar(x) for x in b) + ")" for b in self.basis)
        return f"Subspace(dim={self.dim}, ambient={self.ambient}, basis=[{vs}])"


def subspace_sum_intersect(A: Subspace, B: Subspace) -> tuple[Subspace, Subspace]:
    """Return ``(A + B, A ∩ B)`` in normal form."""
    return A + B, A & B


class FloatSubspace:
    """Subspace of C^d held by an orthonormal basis (columns)."""

    rtol = 1e-9

    def __init__(self, vectors: np.ndarray, rank: int | None = None):
        V = np.atleast_2d(np.asarray(vectors, dtype=complex))
        self.ambient = V.shape[0]
        if V.shape[1] == 0:
            self.basis = np.zeros((self.ambient, 0), dtype=complex)
            return
        U, s, _ = np.linalg.svd(V, full_matrices=False)
        if rank is None:
            rank = int(np.sum(s > self.rtol * max(s[0], 1e-300))) if s.size else 0
        self.basis = U[:, :rank]

    @classmethod
    def zero(cls, ambient: int) -> "FloatSubspace":
        return cls(np.zeros((ambient, 0), dtype=complex))

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    def conj(self) -> "FloatSubspace":
        out = FloatSubspace.__new__(FloatSubspace)
        out.ambient = self.ambient
        out.basis = self.basis.conj()
        return out

    def __add__(self, other: "FloatSubspace") -> "FloatSubspace":
        if isinstance(other, Subspace):
            raise BackendError("cannot combine exact and float subspaces")
        return FloatSubspace(np.hstack([self.basis, other.basis]))

    def intersect(self, other: "FloatSubspace", dim: int | None = None) -> "FloatSubspace":
        """Intersection; with ``dim`` given, the best ``dim``-dimensional fit."""
        if isinstance(other, Subspace):
            raise BackendError("cannot combine exact and float subspaces")
        if self.dim == 0 or other.dim == 0:
            return FloatSubspace.zero(self.ambient)
        M = np.hstack([self.basis, -other.basis])
        _, s, Vh = np.linalg.svd(M)
        k = M.shape[1]
        sv = np.zeros(k)
        sv[: s.size] = s
        if dim is None:
            dim = int(np.sum(sv <= self.rtol * max(sv[0], 1.0)))
        if dim == 0:
            return FloatSubspace.zero(self.ambient)
        null = Vh[k - dim:].conj().T
        out = FloatSubspace(self.basis @ null[: self.dim], rank=dim)
        out.residual = float(sv[k - dim:].max())
        return out

    __and__ = intersect

    def contains(self, v, tol: float = 1e-9) -> bool:
        v = np.asarray(v, dtype=complex)
        nv = np.linalg.norm(v)
        if nv == 0:
            return True
        r = v - self.basis @ (self.basis.conj().T @ v)
        return np.linalg.norm(r) <= tol * nv

    def __le__(self, other: "FloatSubspace") -> bool:
        return all(other.contains(self.basis[:, j]) for j in range(self.dim))

    def __eq__(self, other):
        if not isinstance(other, FloatSubspace):
            return NotImplemented
        return self.dim == other.dim and self <= other

    __hash__ = None


# ---------------------------------------------------------------------------
# filtrations


class Filtration:
    """Indexed nested family of subspaces.

    ``levels`` maps integers to subspaces. Outside the stored range an
    increasing filtration is 0 below and the whole space above; a decreasing
    filtration is the whole space below and 0 above.
    """

    def __init__(self, levels: dict, ambient: int, decreasing: bool = False, check: bool = True):
        if not levels:
            raise ValueError("filtration needs at least one level")
        self.ambient = ambient
        self.decreasing = decreasing
        lo, hi = min(levels), max(levels)
        self.levels = {}
        for k in range(lo, hi + 1):
            if k not in levels:
                raise ValueError(f"filtration index {k} missing (indices must be contiguous)")
            self.levels[k] = levels[k]
        self.lo, self.hi = lo, hi
        if check:
            self._validate()

    def _validate(self):
        for k in range(self.lo, self.hi):
            a, b = self.levels[k], self.levels[k + 1]
            if a.ambient != self.ambient:
                raise ValueError("ambient mismatch in filtration")
            nested = (b <= a) if self.decreasing else (a <= b)
            if not nested:
                raise ValueError(f"filtration not nested at index {k}")
        edge = self.levels[self.lo] if self.decreasing else self.levels[self.hi]
        if edge.dim != self.ambient:
            raise ValueError("filtration is not exhaustive")

    def _zero(self):
        s = self.levels[self.lo]
        return Subspace.zero(self.ambient) if isinstance(s, Subspace) else FloatSubspace.zero(self.ambient)

    def __getitem__(self, k: int):
        if k in self.levels:
            return self.levels[k]
        below = k < self.lo
        if below != self.decreasing:
            return self._zero()
        return self.levels[self.lo] if self.decreasing else self.levels[self.hi]

    def indices(self) -> range:
        return range(self.lo, self.hi + 1)

    def gr_dim(self, k: int) -> int:
        if self.decreasing:
            return self[k].dim - self[k + 1].dim
        return self[k].dim - self[k - 1].dim

    def gr_dims(self) -> dict[int, int]:
        rng = range(self.lo - 1, self.hi + 2)
        return {k: self.gr_dim(k) for k in rng if self.gr_dim(k)}

    def shifted(self, m: int) -> "Filtration":
        """Filtration with ``new[k] = old[k - m]``."""
        return Filtration({k + m: v for k, v in self.levels.items()}, self.ambient, self.decreasing, check=False)

    def apply(self, M) -> "Filtration":
        return Filtration({k: v.apply(M) for k, v in self.levels.items()}, self.ambient, self.decreasing, check=False)

    def conj(self) -> "Filtration":
        return Filtration({k: v.conj() for k, v in self.levels.items()}, self.ambient, self.decreasing, check=False)

    def __eq__(self, other):
        if not isinstance(other, Filtration):
            return NotImplemented
        if self.decreasing != other.decreasing or self.ambient != other.ambient:
            return False
        lo, hi = min(self.lo, other.lo) - 1, max(self.hi, other.hi) + 1
        return all(self[k] == other[k] for k in range(lo, hi + 1))

    __hash__ = None

    def __repr__(self):
        kind = "decreasing" if self.decreasing else "increasing"
        dims = ", ".join(f"{k}:{v.dim}" for k, v in self.levels.items())
        return f"Filtration({kind}, dims={{{dims}}})"


# ---------------------------------------------------------------------------
# exponentials, wedges, Gram-Schmidt


def nilpotent_exp(N, z=1):
    """exp(z N) for nilpotent N, as the finite sum of (zN)^m / m!.

    Exact when ``N`` is a :class:`Matrix` and ``z`` an exact scalar; float when
    ``N`` is an ndarray.
    """
    if isinstance(N, Matrix):
        z = exact(z)
        d = N.shape[0]
        if not (N ** d).is_zero():
            raise ValueError("matrix is not nilpotent")
        zN = N.scale(z)
        term = out = Matrix.identity(d)
        for m in range(1, d):
            term = (term @ zN).scale(Fraction(1, m))
            if term.is_zero():
                break
            out = out + term
        return out
    N = np.asarray(N)
    if N.dtype == object:
        raise BackendError("object array passed to the float backend")
    d = N.shape[0]
    if not np.allclose(np.linalg.matrix_power(N.astype(complex), d), 0, atol=1e-12):
        raise ValueError("matrix is not nilpotent")
    zN = complex(z) * N.astype(complex)
    term = np.eye(d, dtype=complex)
    out = term.copy()
    for m in range(1, d):
        term = term @ zN / m
        out = out + term
    return out


def _subsets(n: int, k: int) -> list[tuple]:
    return list(combinations(range(n), k))


def wedge_power(M, k: int):
    """Matrix of Λ^k M on the lexicographic wedge bases (k×k minors).

    Works for rectangular M: an r×c matrix yields a C(r,k)×C(c,k) matrix.
    """
    r, c = M.shape
    if not 1 <= k <= min(r, c):
        raise ValueError(f"wedge degree {k} out of range for shape {M.shape}")
    rs, cs = _subsets(r, k), _subsets(c, k)
    if isinstance(M, Matrix):
        rows = M.rows
        return Matrix._raw([[_det([[rows[i][j] for j in J] for i in I]) for J in cs] for I in rs])
    M = np.asarray(M)
    if k == 1:
        return M.copy()
    out = np.empty((len(rs), len(cs)), dtype=np.result_type(M.dtype, float))
    for a, I in enumerate(rs):
        sub = M[list(I)]
        for b, J in enumerate(cs):
            out[a, b] = np.linalg.det(sub[:, list(J)])
    return out


def wedge_form(Q, k: int):
    """Induced bilinear form on Λ^k: entry (I, J) is det Q[I, J]."""
    if Q.shape[0] != Q.shape[1]:
        raise ValueError("form matrix must be square")
    return wedge_power(Q, k)


def wedge_vector(vectors):
    """Coordinates of v_1 ∧ ... ∧ v_k in the lexicographic basis of Λ^k."""
    if isinstance(vectors, Matrix):
        W = wedge_power(vectors, vectors.shape[1])
        return W.column(0)
    V = np.asarray(vectors)
    return wedge_power(V, V.shape[1])[:, 0]


def sesq(form, x, y):
    """B(x, y) = x^T form conj(y)."""
    if isinstance(form, Matrix):
        fy = form @ tuple(conj(v) for v in y)
        return _normalize(_dot(x, fy))
    return np.asarray(x) @ np.asarray(form) @ np.conj(np.asarray(y))


def gram_schmidt(form, basis, rtol: float = 1e-13):
    """Orthogonalize ``basis`` in order against ``B(x, y) = x^T form conj(y)``.

    Returns ``(ortho, coeffs)`` where ``ortho[i] = basis[i] - sum_{j<i}
    coeffs[i][j] * ortho[j]``. Raises :class:`DegenerateFlagError` with the
    first index whose partial flag is degenerate for the form.
    """
    exact_mode = isinstance(form, Matrix)
    if exact_mode:
        vecs = [tuple(exact(x) for x in b) for b in basis]
    else:
        if any(isinstance(x, (Fraction, QQi)) for b in basis for x in b):
            raise BackendError("exact vectors passed with a float form")
        vecs = [np.asarray(b, dtype=complex) for b in basis]
        scale = max(1.0, float(np.abs(np.asarray(form)).max()))
    ortho, norms, coeffs = [], [], []
    for i, b in enumerate(vecs):
        w = b
        cs = []
        for o, n in zip(ortho, norms):
            c = sesq(form, b, o) / n
            cs.append(_normalize(c) if exact_mode else c)
            if exact_mode:
                w = tuple(_normalize(a - c * v) for a, v in zip(w, o))
            else:
                w = w - c * o
        n = sesq(form, w, w)
        if exact_mode:
            if n == 0:
                raise DegenerateFlagError(i)
        else:
            ref = scale * np.linalg.norm(w) ** 2
            if ref == 0 or abs(n) <= rtol * ref:
                raise DegenerateFlagError(i)
        ortho.append(w)
        norms.append(n)
        coeffs.append(cs)
    return ortho, coeffs


def null_space(A: np.ndarray, rcond: float | None = None) -> np.ndarray:
    return scipy.linalg.null_space(A, rcond=rcond)


def isclose_rel(a, b, rtol: float) -> bool:
    return abs(a - b) <= rtol * max(abs(a), abs(b), math.ulp(1.0))
