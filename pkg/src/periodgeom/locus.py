"""Hodge loci of rational vectors along nilpotent orbits.

For even weight k and rational v, v is a Hodge class at z exactly when
exp(-z·N) v lies in the limit filtration F^(k/2); since v is real this also
puts it in the conjugate piece. Pairing exp(-z·N) v with the annihilator of
F^(k/2) gives polynomial equations in z, solved here for n <= 2.
"""
from __future__ import annotations

import cmath
import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np
import sympy

from .linalg import QQi, Subspace, exact, format_scalar
from .period import NilpotentOrbitData, NotHodgeStructureError, hodge_point

# A polynomial is a dict {exponent tuple: nonzero exact coefficient}.


def _padd(p: dict, q: dict, c=1) -> dict:
    out = dict(p)
    for e, a in q.items():
        s = out.get(e, 0) + c * a
        if s == 0:
            out.pop(e, None)
        else:
            out[e] = s
    return out


def peval(p: dict, z):
    """Evaluate exactly for exact z, in complex arithmetic otherwise."""
    exact_point = all(isinstance(v, (QQi, Fraction, int)) for v in z)
    total = Fraction(0) if exact_point else 0j
    for e, a in p.items():
        term = a if exact_point else complex(a)
        for v, k in zip(z, e):
            if k:
                term = term * (v ** k if exact_point else complex(v) ** k)
        total = total + term
    if exact_point and isinstance(total, QQi) and total.im == 0:
        return total.re
    return total


def pshift(p: dict, j: int, c) -> dict:
    """p(z + c e_j) as a polynomial in z."""
    out = {}
    for e, a in p.items():
        k = e[j]
        for m in range(k + 1):
            coef = a * math.comb(k, m) * (Fraction(c) ** (k - m))
            e2 = list(e)
            e2[j] = m
            out = _padd(out, {tuple(e2): coef})
    return out


def pdegree(p: dict) -> int:
    return max((sum(e) for e in p), default=-1)


def pformat(p: dict, names: Sequence[str]) -> str:
    if not p:
        return "0"
    terms = []
    for e in sorted(p, key=lambda e: (-sum(e), tuple(-k for k in e))):
        mono = "*".join(n if k == 1 else f"{n}^{k}" for n, k in zip(names, e) if k)
        c = format_scalar(p[e])
        if not mono:
            terms.append(c)
        elif c == "1":
            terms.append(mono)
        elif c == "-1":
            terms.append("-" + mono)
        else:
            terms.append(f"({c})*{mono}" if ("+" in c[1:] or "-" in c[1:]) else f"{c}*{mono}")
    return " + ".join(terms).replace("+ -", "- ")


@dataclass
class LocusSystem:
    """Equations in z_1..z_n vanishing exactly where v is a Hodge class."""

    n: int
    equations: list
    v: tuple
    p0: int
    approximate: bool = False

    @property
    def names(self) -> list[str]:
        return [f"z{j + 1}" for j in range(self.n)] if self.n > 1 else ["z"]

    def evaluate(self, z) -> list:
        z = tuple(z) if not np.isscalar(z) and not isinstance(z, QQi) else (z,)
        return [peval(p, z) for p in self.equations]

    def residual(self, z) -> float:
        """Largest |equation| scaled by the sum of |coefficient·monomial|."""
        z = tuple(complex(v) for v in (z if not np.isscalar(z) else (z,)))
        worst = 0.0
        for p in self.equations:
            val = 0j
            scale = 0.0
            for e, a in p.items():
                term = complex(a)
                for v, k in zip(z, e):
                    term *= v ** k
                val += term
                scale += abs(term)
            worst = max(worst, abs(val) / scale if scale else 0.0)
        return worst

    def is_empty(self) -> bool:
        return any(set(p) == {(0,) * self.n} for p in self.equations)

    def is_identically_zero(self) -> bool:
        return not self.equations

    def to_dict(self) -> dict:
        return {
            "variables": self.names,
            "p0": self.p0,
            "vector": [format_scalar(x) for x in self.v],
            "approximate": self.approximate,
            "equations": [
                {"text": pformat(p, self.names),
                 "terms": [[list(e), format_scalar(a)] for e, a in sorted(p.items())]}
                for p in self.equations
            ],
        }


def _rational_vector(v, d: int) -> tuple:
    out = tuple(exact(x) for x in v)
    if len(out) != d:
        raise ValueError(f"vector has length {len(out)}, expected {d}")
    if any(isinstance(x, QQi) for x in out):
        raise ValueError("v must be rational")
    if all(x == 0 for x in out):
        raise ValueError("v must be nonzero")
    return out


def hodge_vector_condition(data: NilpotentOrbitData, v) -> LocusSystem:
    """Equations for "v is a Hodge class at z" on the nilpotent orbit.

    With psi present the holomorphic correction is dropped and the system is
    flagged ``approximate``.
    """
    k = data.weight
    if k % 2:
        raise ValueError("odd weight has no Hodge classes; use a tensor construction")
    n, d = data.n, data.rank
    v = _rational_vector(v, d)
    p0 = k // 2
    # vector-valued polynomial: {exponent: vector}
    vec = {(0,) * n: v}
    for j, N in enumerate(data.cone.generators):
        out = {}
        for e, w in vec.items():
            term, m = w, 0
            while any(x != 0 for x in term):
                c = Fraction((-1) ** m, math.factorial(m))
                e2 = list(e)
                e2[j] += m
                e2 = tuple(e2)
                prev = out.get(e2, (Fraction(0),) * d)
                out[e2] = tuple(a + c * b for a, b in zip(prev, term))
                term = N @ term
                m += 1
        vec = out
    ann = data.F[p0].annihilator()
    equations = []
    for row in ann.basis:
        p = {}
        for e, w in vec.items():
            s = sum((a * b for a, b in zip(row, w)), Fraction(0))
            if s != 0:
                p[e] = s
        if p:
            equations.append(p)
    return LocusSystem(n, equations, v, p0, approximate=data.psi is not None)


# ---------------------------------------------------------------------------
# solving


def _to_sympy(p: dict, syms) -> sympy.Poly:
    expr = 0
    for e, a in p.items():
        a = exact(a)
        c = sympy.Rational(a.re.numerator, a.re.denominator) + sympy.I * sympy.Rational(a.im.numerator, a.im.denominator) \
            if isinstance(a, QQi) else sympy.Rational(a.numerator, a.denominator)
        term = c
        for s, k in zip(syms, e):
            term = term * s ** k
        expr = expr + term
    return sympy.Poly(expr, *syms, domain=sympy.QQ_I)


def _from_sympy_number(c):
    re, im = sympy.re(c), sympy.im(c)
    val = QQi(Fraction(int(re.p), int(re.q)), Fraction(int(im.p), int(im.q)))
    return val.re if val.im == 0 else val


@dataclass
class Region:
    """Strip 0 <= Re z_j < 1, Im z_j > y0 in each coordinate."""

    y0: object = 2
    tol: float = 1e-9

    def status(self, z) -> str:
        """'inside', 'outside' or 'boundary' (a root on Im z_j = y0)."""
        on_edge = False
        for v in z:
            if isinstance(v, (QQi, Fraction)):
                x, y = (v.re, v.im) if isinstance(v, QQi) else (v, Fraction(0))
                if not (0 <= x < 1):
                    return "outside"
                if y == Fraction(self.y0):
                    on_edge = True
                elif y < Fraction(self.y0):
                    return "outside"
            else:
                v = complex(v)
                if not (-self.tol <= v.real < 1 - self.tol):
                    return "outside"
                if abs(v.imag - float(self.y0)) <= self.tol * max(1.0, abs(v)):
                    on_edge = True
                elif v.imag < float(self.y0):
                    return "outside"
        return "boundary" if on_edge else "inside"


def _fmt_point(z) -> list[str]:
    out = []
    for v in z:
        if isinstance(v, (QQi, Fraction)):
            out.append(format_scalar(v))
        else:
            v = complex(v)
            out.append(f"{v.real:.15g}{v.imag:+.15g}i")
    return out


def hodge_certificate(data: NilpotentOrbitData, v, z) -> tuple[bool, float]:
    """(polarized at z, distance of v from H^{p0,p0}(z) relative to |v|)."""
    try:
        hp = hodge_point(data, z)
    except NotHodgeStructureError:
        return False, math.inf
    p0 = data.weight // 2
    H = hp.pieces.get((p0, p0))
    if H is None:
        return hp.polarized, math.inf
    if isinstance(H, Subspace):
        return hp.polarized, 0.0 if H.contains(v) else 1.0
    vv = np.array([complex(x) for x in v])
    B = H.basis
    r = vv - B @ (B.conj().T @ vv)
    return hp.polarized, float(np.linalg.norm(r) / np.linalg.norm(vv))


@dataclass
class LocusComponent:
    kind: str  # "point", "curve" or "everything"
    point: tuple | None = None
    equation: dict | None = None
    samples: list = field(default_factory=list)
    residual: float = 0.0
    exact: bool = False
    status: str = "inside"
    polarized: bool | None = None
    hodge_residual: float | None = None

    def to_dict(self, names) -> dict:
        out = {"kind": self.kind, "status": self.status, "exact": self.exact}
        if self.point is not None:
            out["z"] = _fmt_point(self.point)
            out["q"] = [_fmt_complex(q) for q in q_coordinates(self.point)]
        if self.equation is not None:
            out["equation"] = pformat(self.equation, names)
        if self.samples:
            out["certificate"] = {"samples": len(self.samples), "max_residual": self.residual}
        if self.polarized is not None:
            out["polarized"] = self.polarized
            out["hodge_residual"] = self.hodge_residual
        return out


@dataclass
class LocusSolution:
    system: LocusSystem
    components: list
    empty: bool
    identically_zero: bool
    discarded: list = field(default_factory=list)

    @property
    def indeterminate(self) -> bool:
        return any(c.status == "boundary" for c in self.components)

    def points(self) -> list[tuple]:
        return [c.point for c in self.components if c.kind == "point"]

    def to_dict(self) -> dict:
        names = self.system.names
        return {
            "system": self.system.to_dict(),
            "empty": self.empty,
            "identically_zero": self.identically_zero,
            "indeterminate": self.indeterminate,
            "components": [c.to_dict(names) for c in self.components],
            "outside_region": [_fmt_point(z) for z in self.discarded],
        }


def _fmt_complex(q: complex) -> str:
    return f"{q.real:.15g}{q.imag:+.15g}i"


def q_coordinates(z) -> tuple:
    return tuple(cmath.exp(2j * cmath.pi * complex(v)) for v in z)


def _univariate_roots(P: sympy.Poly) -> list:
    """Roots with multiplicity removed: exact for linear factors, companion-matrix otherwise."""
    roots = []
    _, factors = P.factor_list()
    for f, _mult in factors:
        if f.degree() == 0:
            continue
        coeffs = f.all_coeffs()
        if f.degree() == 1:
            roots.append(_from_sympy_number(-coeffs[1] / coeffs[0]))
            continue
        cs = np.array([complex(sympy.N(c, 30)) for c in coeffs])
        roots.extend(complex(r) for r in np.roots(cs))
    return roots


def _check_point(system, data, z, region, comp_kind="point"):
    status = region.status(z)
    comp = LocusComponent(comp_kind, point=tuple(z), exact=all(isinstance(v, (QQi, Fraction)) for v in z),
                          status=status)
    if comp.exact:
        vals = system.evaluate(z)
        comp.residual = 0.0 if all(x == 0 for x in vals) else math.inf
    else:
        comp.residual = system.residual(z)
    if status != "outside" and data is not None and data.psi is None:
        zz = tuple(QQi(v) if isinstance(v, Fraction) else v for v in z)
        comp.polarized, comp.hodge_residual = hodge_certificate(data, system.v, zz)
    return comp


def locus_solve(system: LocusSystem, y0=2, data: NilpotentOrbitData | None = None,
                allow_approximate: bool = False, grid: int = 8) -> LocusSolution:
    """Solve the locus system in the strip 0 <= Re z_j < 1, Im z_j > y0.

    ``data``, if given, adds the Hodge-class certificate to each solution.
    For n = 2, curve components are the factors of the gcd of the equations,
    each certified on a grid of ``grid`` x ``grid`` sample points; isolated
    points come from resultants of the cofactors.
    """
    if system.approximate and not allow_approximate:
        raise ValueError("system comes from a truncated holomorphic part; pass allow_approximate=True")
    if system.n > 2:
        raise ValueError("locus_solve handles n <= 2")
    region = Region(y0)
    if system.is_identically_zero():
        return LocusSolution(system, [LocusComponent("everything")], empty=False, identically_zero=True)
    if system.is_empty():
        return LocusSolution(system, [], empty=True, identically_zero=False)
    syms = sympy.symbols(" ".join(system.names) + ("," if system.n == 1 else ""))
    polys = [_to_sympy(p, syms) for p in system.equations]
    G = polys[0]
    for P in polys[1:]:
        G = G.gcd(P)
    comps, discarded = [], []
    if system.n == 1:
        for r in _univariate_roots(G):
            c = _check_point(system, data, (r,), region)
            (comps if c.status != "outside" else discarded).append(c if c.status != "outside" else c.point)
        comps.sort(key=lambda c: (complex(c.point[0]).imag, complex(c.point[0]).real))
        return LocusSolution(system, comps, empty=not comps, identically_zero=False, discarded=discarded)

    z1, z2 = syms
    if G.total_degree() > 0:
        _, factors = G.factor_list()
        for f, _mult in factors:
            if f.total_degree() == 0:
                continue
            comps.append(_curve_component(system, data, f, syms, region, grid))
    cofactors = [sympy.div(P, G)[0] for P in polys]
    cofactors = [P for P in cofactors if not P.is_zero]
    if len(cofactors) > 1 and all(P.total_degree() > 0 for P in cofactors):
        for z in _isolated_points(cofactors, syms):
            if any(_on_curve(c, z) for c in comps):
                continue
            c = _check_point(system, data, z, region)
            (comps if c.status != "outside" else discarded).append(c if c.status != "outside" else c.point)
    comps = [c for c in comps if c.kind == "point" or c.samples]
    return LocusSolution(system, comps, empty=not comps, identically_zero=False, discarded=discarded)


def _on_curve(comp: LocusComponent, z) -> bool:
    if comp.kind != "curve":
        return False
    return abs(peval(comp.equation, tuple(complex(v) for v in z))) < 1e-9


def _sympy_to_dict(f: sympy.Poly) -> dict:
    return {tuple(e): _from_sympy_number(c) for e, c in f.terms()}


def _curve_component(system, data, f, syms, region, grid) -> LocusComponent:
    eq = _sympy_to_dict(f)
    # solve for the variable f actually depends on, the other one runs over a grid
    solve_for = 0 if f.degree(syms[0]) > 0 else 1
    free = 1 - solve_for
    y0 = float(region.y0)
    xs = [(j + 0.5) / grid for j in range(grid)]
    ys = np.geomspace(max(y0, 1.0) * 1.25, max(y0, 1.0) * 1.25 * 10, grid)
    samples, worst = [], 0.0
    cert = []
    fs = f.as_expr()
    for x, y in itertools.product(xs, ys):
        w = complex(x, y)
        uni = sympy.Poly(fs.subs(syms[free], sympy.Float(w.real, 30) + sympy.I * sympy.Float(w.imag, 30)), syms[solve_for])
        cs = np.array([complex(sympy.N(c, 30)) for c in uni.all_coeffs()])
        if len(cs) < 2:
            continue
        for r in np.roots(cs):
            z = [0j, 0j]
            z[solve_for], z[free] = complex(r), w
            z = tuple(z)
            if region.status(z) != "inside":
                continue
            samples.append(z)
            worst = max(worst, system.residual(z))
    comp = LocusComponent("curve", equation=eq, samples=samples, residual=worst)
    if data is not None and data.psi is None and samples:
        for z in samples[:: max(1, len(samples) // 8)]:
            pol, res = hodge_certificate(data, system.v, z)
            cert.append((pol, res))
        comp.polarized = all(p for p, _ in cert)
        comp.hodge_residual = max(r for _, r in cert)
    return comp


def _isolated_points(polys, syms) -> list[tuple]:
    z1, z2 = syms
    R = None
    for P, Q in itertools.combinations(polys, 2):
        r = sympy.Poly(sympy.resultant(P.as_expr(), Q.as_expr(), z1), z2, domain=sympy.QQ_I)
        if r.is_zero:
            continue
        R = r if R is None else R.gcd(r)
    if R is None or R.degree() <= 0:
        return []
    out = []
    for b in _univariate_roots(R):
        if isinstance(b, (QQi, Fraction)):
            sb = _qqi_to_sympy(b)
            G = None
            for P in polys:
                s = sympy.Poly(P.as_expr().subs(z2, sb), z1, domain=sympy.QQ_I)
                if s.is_zero:
                    continue
                G = s if G is None else G.gcd(s)
            if G is None:
                continue
            for a in _univariate_roots(G):
                out.append((a, b))
        else:
            sub = [sympy.Poly(P.as_expr().subs(z2, sympy.Float(b.real, 30) + sympy.I * sympy.Float(b.imag, 30)), z1)
                   for P in polys]
            sub = [s for s in sub if not all(abs(complex(sympy.N(c))) < 1e-12 for c in s.all_coeffs())]
            if not sub:
                continue
            base = min(sub, key=lambda s: s.degree())
            cs = np.array([complex(sympy.N(c, 30)) for c in base.all_coeffs()])
            for a in np.roots(cs) if len(cs) > 1 else []:
                if all(abs(complex(s.as_expr().subs(z1, complex(a)))) < 1e-8 for s in sub):
                    out.append((complex(a), b))
    return out


def _qqi_to_sympy(c):
    c = exact(c)
    if isinstance(c, QQi):
        return sympy.Rational(c.re.numerator, c.re.denominator) + sympy.I * sympy.Rational(c.im.numerator, c.im.denominator)
    return sympy.Rational(c.numerator, c.denominator)


# ---------------------------------------------------------------------------
# monodromy and algebraicity


def monodromy_shift_check(data: NilpotentOrbitData, v, solutions: Sequence = ()) -> bool:
    """z solves the system of v iff z + e_j solves the system of exp(N_j) v.

    Checked as an exact polynomial identity for every j, and pointwise on the
    supplied solutions.
    """
    from .linalg import nilpotent_exp

    base = hodge_vector_condition(data, v)
    for j, N in enumerate(data.cone.generators):
        Tv = nilpotent_exp(N) @ base.v
        moved = hodge_vector_condition(data, Tv)
        if len(moved.equations) != len(base.equations):
            return False
        for p, q in zip(base.equations, moved.equations):
            if pshift(q, j, 1) != p:
                return False
        for z in solutions:
            z = tuple(z)
            zs = tuple(a + (1 if i == j else 0) for i, a in enumerate(z))
            if all(isinstance(a, (QQi, Fraction)) for a in z):
                a_ok = all(x == 0 for x in base.evaluate(z))
                b_ok = all(x == 0 for x in moved.evaluate(zs))
            else:
                a_ok = base.residual(z) < 1e-9
                b_ok = moved.residual(zs) < 1e-9
            if a_ok != b_ok:
                return False
    return True


@dataclass
class AlgebraicityReport:
    kind: str
    algebraic: bool
    q_points: list = field(default_factory=list)
    relation: dict | None = None
    degree: int | None = None
    holdout_residual: float | None = None
    detail: str = ""

    def to_dict(self) -> dict:
        out = {"kind": self.kind, "algebraic": self.algebraic, "detail": self.detail}
        if self.q_points:
            out["q"] = [[_fmt_complex(q) for q in qs] for qs in self.q_points]
        if self.relation is not None:
            out["relation"] = {"degree": self.degree,
                               "terms": [[list(e), _fmt_complex(c)] for e, c in sorted(self.relation.items())],
                               "holdout_residual": self.holdout_residual}
        return out


def q_algebraicity_check(component: LocusComponent, max_degree: int = 3, tol: float = 1e-8) -> AlgebraicityReport:
    """Algebraicity of the image of a component under q_j = exp(2 pi i z_j).

    Points map to points of the punctured disk. For curves, a polynomial
    relation in (q_1, q_2) of total degree <= ``max_degree`` is fitted on half
    the samples (SVD null vector in rescaled coordinates) and accepted when
    the other half satisfies it to relative residual ``tol``.
    """
    if component.kind == "everything":
        return AlgebraicityReport("everything", True, detail="whole polydisk")
    if component.kind == "point":
        q = q_coordinates(component.point)
        inside = all(0 < abs(a) < 1 for a in q)
        return AlgebraicityReport("point", inside, q_points=[q],
                                  detail="point of the punctured polydisk" if inside else "outside the punctured disk")
    qs = np.array([q_coordinates(z) for z in component.samples])
    if len(qs) < 6:
        return AlgebraicityReport("curve", False, detail="too few samples")
    scale = np.median(np.abs(qs), axis=0)
    Q = qs / scale
    train, hold = Q[0::2], Q[1::2]
    for deg in range(1, max_degree + 1):
        exps = [(a, b) for a in range(deg + 1) for b in range(deg + 1 - a)]
        if len(exps) > len(train):
            break

        def design(P):
            return np.column_stack([P[:, 0] ** a * P[:, 1] ** b for a, b in exps])

        A = design(train)
        _, s, Vh = np.linalg.svd(A)
        c = Vh[-1].conj()
        H = design(hold)
        res = np.max(np.abs(H @ c) / np.maximum(np.abs(H) @ np.abs(c), 1e-300))
        if res <= tol:
            rel = {e: c_ / (scale[0] ** e[0] * scale[1] ** e[1]) for e, c_ in zip(exps, c)}
            big = max(rel.values(), key=abs)
            rel = {e: complex(x / big) for e, x in rel.items() if abs(x / big) > 1e-10}
            return AlgebraicityReport("curve", True, relation=rel, degree=deg, holdout_residual=float(res),
                                      detail=f"relation of degree {deg}")
    return AlgebraicityReport("curve", False, detail=f"no relation of degree <= {max_degree}")
