"""Command-line front end: ``periodgeom <command> ...``.

Exit status is 0 on success, 1 when a check fails and 2 for usage or I/O
errors.
"""
from __future__ import annotations

import argparse
import json
import sys
from collections import Counter
from fractions import Fraction

import numpy as np

from . import acceptance
from .asymptotics import (SigmaRegion, default_jobs, default_rays, fit_exponents, j_splitting, mixed_basis,
                          predicted_exponents, reducedness_sweep)
from .io import OrbitFileError, load_orbit
from .linalg import QQi, exact, format_scalar, parse_scalar
from .locus import hodge_vector_condition, locus_solve, monodromy_shift_check, q_algebraicity_check
from .mixed_hodge import cone_weight_filtrations, deligne_splitting, rational_splitting, weight_filtration
from .period import UnpolarizedError, NotHodgeStructureError, hodge_metric_matrix, hodge_point, validate_orbit
from .reduction import (SiegelSetSpec, bs_to_bb, format_point, hecke_points, reduce_sl2, siegel_intersectors)


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# formatting helpers


def _vec(v) -> str:
    return "(" + ", ".join(format_scalar(x) for x in v) + ")"


def _num(x) -> str:
    if isinstance(x, (Fraction, QQi, int)):
        return format_scalar(x)
    x = complex(x)
    if abs(x.imag) <= 1e-12 * max(1.0, abs(x.real)):
        return f"{x.real:.10g}"
    return f"{x.real:.10g}{x.imag:+.10g}i"


def _signed(s: tuple) -> str:
    return "(" + ",".join("0" if a == 0 else f"{a:+d}" for a in s) + ")"


def _parse_vector(text: str, d: int) -> tuple:
    text = text.strip()
    if text[:1] in "ef" and text[1:].isdigit():
        k = int(text[1:])
        if not 1 <= k <= d:
            raise UsageError(f"basis vector {text} out of range 1..{d}")
        return tuple(Fraction(int(i == k - 1)) for i in range(d))
    try:
        v = tuple(parse_scalar(x) for x in text.split(","))
    except ValueError as exc:
        raise UsageError(f"bad vector {text!r}: {exc}") from None
    if len(v) != d:
        raise UsageError(f"vector has {len(v)} entries, expected {d}")
    return v


def _parse_point(text: str, n: int | None = None) -> tuple:
    try:
        z = tuple(parse_scalar(x) for x in text.split(","))
    except ValueError as exc:
        raise UsageError(f"bad point {text!r}: {exc}") from None
    if n is not None and len(z) != n:
        raise UsageError(f"point has {len(z)} coordinates, expected {n}")
    return z


def _load(name: str):
    try:
        return load_orbit(name)
    except FileNotFoundError as exc:
        raise UsageError(str(exc)) from None


def _float_point(z):
    return tuple(complex(v) for v in z)


# ---------------------------------------------------------------------------
# commands


def cmd_validate(args) -> int:
    try:
        data = load_orbit(args.path)
    except FileNotFoundError as exc:
        raise UsageError(str(exc)) from None
    except OrbitFileError as exc:
        print(exc)
        return 1
    report = validate_orbit(data, integral=args.integral)
    print(report)
    return 0 if report.ok else 1


def _print_filtration(W, indent="  "):
    for k in range(W.lo, W.hi + 1):
        S = W[k]
        print(f"{indent}W_{k}: dim {S.dim}  " + " ".join(_vec(b) for b in S.basis))
    dims = {k: g for k, g in W.gr_dims().items() if g}
    print(f"{indent}gr dims: " + ", ".join(f"{k}:{g}" for k, g in sorted(dims.items())))


def cmd_weight_filtration(args) -> int:
    data = _load(args.orbit)
    for j, W in enumerate(cone_weight_filtrations(data.cone, seed=args.seed), 1):
        print(f"W(M_{j}):")
        _print_filtration(W)
    return 0


def cmd_split(args) -> int:
    data = _load(args.orbit)
    W = weight_filtration(data.cone.partial_sums()[-1])
    I = deligne_splitting(data.F, W, center=data.weight)
    print(f"Deligne splitting of (F, W(M_{data.n})), center {data.weight}:")
    for (p, q), S in I.pieces.items():
        print(f"  I^({p},{q}): " + " ".join(_vec(b) for b in S.basis))
    J = rational_splitting(cone_weight_filtrations(data.cone, seed=args.seed))
    print("rational splitting:")
    for sigma, S in J.pieces.items():
        print(f"  J^{_signed(sigma)}: " + " ".join(_vec(b) for b in S.basis))
    return 0


def cmd_hodge_form(args) -> int:
    data = _load(args.orbit)
    z = _parse_point(args.z, data.n)
    if args.float:
        z = _float_point(z)
    try:
        hp = hodge_point(data, z)
    except NotHodgeStructureError as exc:
        print(f"not a Hodge structure at z: {exc}")
        return 1
    print(f"z = ({', '.join(_num(v) for v in z)})")
    print(f"polarized: {hp.polarized}")
    if not hp.polarized:
        return 1
    if args.basis == "J":
        basis = [b for _, b in j_splitting(data).basis()]
    else:
        basis = [tuple(Fraction(int(i == j)) for i in range(data.rank)) for j in range(data.rank)]
    G = hodge_metric_matrix(data, z, basis, hp)
    rows = G.rows if hasattr(G, "rows") else np.asarray(G).tolist()
    print("basis: " + " ".join(_vec(b) for b in basis))
    print("Gram matrix h_z(e_a, e_b):")
    for r in rows:
        print("  [" + ", ".join(_num(x) for x in r) + "]")
    return 0


def cmd_sweep(args) -> int:
    data = _load(args.orbit)
    region = SigmaRegion(data.n, y_min=args.y_min, y_max=args.y_max, x_mode=args.x_mode)
    basis = mixed_basis(data) if args.mixed else None
    shifts = [tuple(int(a) for a in s.split(",")) for s in args.shift]
    res = reducedness_sweep(data, region, args.density, basis=basis, jobs=args.jobs, shifts=shifts)
    print(f"points: {len(res.points)}")
    print("ordered basis: " + " ".join(_vec(b) for b in res.ordered_basis))
    print("C* triple: (" + ", ".join(f"{c:.6g}" for c in res.C_triple) + ")")
    print(f"C*: {res.C_star:.6g}")
    print(f"growth ratio: {res.growth_ratio:.6g}")
    for m, c in res.shifts.items():
        print(f"shift {m}: C* = {c:.6g}")
    if args.csv:
        res.write_csv(args.csv)
        print(f"wrote {args.csv}")
    if args.max_growth is not None and not res.growth_ratio <= args.max_growth:
        return 1
    return 0


def cmd_fit(args) -> int:
    data = _load(args.orbit)
    J = j_splitting(data)
    vectors = [b for _, b in J.basis()] if args.vector == "J" else [_parse_vector(args.vector, data.rank)]
    rays = default_rays(data.n, lam_max=args.lam_max)
    status = 0
    for v in vectors:
        fit = fit_exponents(data, v, rays, nilpotent_only=args.nilpotent_only)
        print(f"u = {_vec(v)}")
        print(f"s={_signed(fit.exponents)} residual={fit.residual:.3g} raw=("
              + ", ".join(f"{r:.4f}" for r in fit.raw) + ")")
        try:
            pred = predicted_exponents(J, v)
            match = pred == fit.exponents
            print(f"predicted={_signed(pred)} {'match' if match else 'MISMATCH'}")
            if not match:
                status = 1
        except ValueError:
            print("predicted: u is not in a single J piece")
    return status


def cmd_reduce(args) -> int:
    z = _parse_point(args.z, 1)[0]
    z = QQi(z) if isinstance(z, Fraction) else z
    if args.float:
        z = complex(z)
    z0, g = reduce_sl2(z)
    print(f"z0 = {format_point(z0)}")
    print(f"gamma = {list(map(list, g))}")
    return 0


def _hecke_matrix(args):
    if args.g:
        rows = [r.split(",") for r in args.g.split(";")]
        try:
            return [[exact(parse_scalar(x)) for x in r] for r in rows]
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    if args.p is None:
        raise UsageError("give --p or --g")
    return [[1, 0], [0, args.p]]


def cmd_hecke(args) -> int:
    if args.orbit not in (None, "none"):
        raise UsageError("hecke acts on the modular curve; use --orbit none")
    z = _parse_point(args.z, 1)[0]
    z = QQi(z) if isinstance(z, Fraction) else z
    images = hecke_points(z, _hecke_matrix(args))
    counts = Counter(format_point(h.reduced) for h in images)
    parts = [f"{p}×{c}" for p, c in sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))]
    print(f"degree {len(images)}")
    print("multiset {" + ", ".join(parts) + "}")
    for h in images:
        print(f"  {list(map(list, h.representative))}: {format_point(h.image)} -> {format_point(h.reduced)}")
    return 0


def cmd_intersectors(args) -> int:
    s1 = SiegelSetSpec.strip(parse_scalar(args.t), parse_scalar(args.u))
    s2 = SiegelSetSpec.strip(parse_scalar(args.t2 or args.t), parse_scalar(args.u2 or args.u))
    rep = siegel_intersectors(s1, s2, args.bound)
    print(f"count {rep.count} at bound {args.bound}, {rep.doubled_count} at bound {2 * args.bound}")
    print(f"stable: {rep.stable}")
    for g in rep.elements:
        print(f"  {list(map(list, g))}")
    if rep.undecided:
        print(f"undecided: {len(rep.undecided)}")
    return 0 if rep.stable and not rep.undecided else 1


def cmd_bs_bb(args) -> int:
    x = float(parse_scalar(args.x))
    t = float(parse_scalar(args.t))
    if t < 0:
        raise UsageError("t must be non-negative")
    a, b = bs_to_bb(x, t)
    print(f"[{_num(a)} : {_num(b) if b != 0 else '0'}]")
    return 0


def cmd_locus(args) -> int:
    data = _load(args.orbit)
    v = _parse_vector(args.vector, data.rank)
    try:
        system = hodge_vector_condition(data, v)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    sol = locus_solve(system, y0=parse_scalar(args.y0), data=data, allow_approximate=args.allow_approximate)
    doc = sol.to_dict()
    doc["monodromy_shift"] = monodromy_shift_check(data, v, sol.points())
    doc["algebraicity"] = [q_algebraicity_check(c).to_dict() for c in sol.components]
    print("equations:")
    for eq in doc["system"]["equations"]:
        print(f"  {eq['text']} = 0")
    if sol.identically_zero:
        print("locus: everything (v is a Hodge class at every point)")
    elif sol.empty:
        print("locus: empty in the region")
    for c, q in zip(doc["components"], doc["algebraicity"]):
        if c["kind"] == "point":
            print(f"  point z=({', '.join(c['z'])}) q=({', '.join(c['q'])}) status={c['status']}")
        elif c["kind"] == "curve":
            rel = q.get("relation")
            print(f"  curve {c['equation']} = 0, {c['certificate']['samples']} certified samples, "
                  f"algebraic in q: {q['algebraic']}" + (f" (degree {rel['degree']})" if rel else ""))
    print(f"monodromy shift check: {doc['monodromy_shift']}")
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(doc, fh, indent=1, sort_keys=True)
            fh.write("\n")
        print(f"wrote {args.json}")
    bad = sol.indeterminate or not doc["monodromy_shift"] or not all(q["algebraic"] for q in doc["algebraicity"])
    return 1 if bad else 0


def cmd_report(args) -> int:
    only = {int(k) for k in args.only.split(",")} if args.only else None
    results = acceptance.run_all(only, seed=args.seed)
    for r in results:
        print(r.line())
    passed = sum(r.passed for r in results)
    print(f"{passed}/{len(results)} criteria passed")
    if args.json:
        with open(args.json, "w") as fh:
            json.dump([{"criterion": r.number, "title": r.title, "passed": r.passed, "detail": r.detail}
                       for r in results], fh, indent=1)
            fh.write("\n")
    return 0 if passed == len(results) else 1


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="periodgeom", description=__doc__.splitlines()[0])
    parser.add_argument("--seed", type=int, default=0, help="seed for randomized checks")
    parser.add_argument("--jobs", type=int, default=default_jobs(),
                        help="worker processes for sweeps (default: $PERIODGEOM_JOBS or 1)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check an orbit file")
    p.add_argument("path")
    p.add_argument("--integral", action="store_true", help="also require exp(N_i) to be integral")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("weight-filtration", help="W(M_j) for the partial sums of the cone")
    p.add_argument("--orbit", required=True)
    p.set_defaults(func=cmd_weight_filtration)

    p = sub.add_parser("split", help="Deligne and rational splittings")
    p.add_argument("--orbit", required=True)
    p.set_defaults(func=cmd_split)

    p = sub.add_parser("hodge-form", help="Hodge metric at a point")
    p.add_argument("--orbit", required=True)
    p.add_argument("--z", required=True, help="comma-separated coordinates, e.g. 'i' or '1/2+3i,2i'")
    p.add_argument("--basis", choices=["standard", "J"], default="standard")
    p.add_argument("--float", action="store_true", help="evaluate in floating point")
    p.set_defaults(func=cmd_hodge_form)

    p = sub.add_parser("sweep", help="(e,C)-reducedness sweep over Σ_n")
    p.add_argument("--orbit", required=True)
    p.add_argument("--density", type=int, default=16)
    p.add_argument("--y-min", type=float, default=2.0)
    p.add_argument("--y-max", type=float, default=1e3)
    p.add_argument("--x-mode", choices=["diagonal", "product"], default="diagonal")
    p.add_argument("--mixed", action="store_true", help="use the mixed (non J-adapted) control basis")
    p.add_argument("--shift", action="append", default=[], help="integer translation, e.g. '1' or '1,0'")
    p.add_argument("--csv")
    p.add_argument("--max-growth", type=float)
    p.add_argument("--jobs", type=int, default=argparse.SUPPRESS, help="worker processes")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("fit", help="fit Hodge-norm exponents of a vector")
    p.add_argument("--orbit", required=True)
    p.add_argument("--vector", required=True, help="'e1', a comma list, or 'J' for the whole J basis")
    p.add_argument("--lam-max", type=float, default=1e3)
    p.add_argument("--nilpotent-only", action="store_true", help="drop the holomorphic part")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("reduce", help="reduce a point of H to the fundamental set")
    p.add_argument("--z", required=True)
    p.add_argument("--float", action="store_true")
    p.set_defaults(func=cmd_reduce)

    p = sub.add_parser("hecke", help="Hecke images of a point of H")
    p.add_argument("--orbit", default="none")
    p.add_argument("--z", required=True)
    p.add_argument("--p", type=int)
    p.add_argument("--g", help="rational matrix 'a,b;c,d'")
    p.set_defaults(func=cmd_hecke)

    p = sub.add_parser("intersectors", help="γ in SL2(Z) with γS1 ∩ S2 nonempty")
    p.add_argument("--t", default="1")
    p.add_argument("--u", default="1/2")
    p.add_argument("--t2")
    p.add_argument("--u2")
    p.add_argument("--bound", type=int, default=3)
    p.set_defaults(func=cmd_intersectors)

    p = sub.add_parser("bs-bb", help="Borel-Serre coordinates (x, t) to the Baily-Borel chart")
    p.add_argument("--x", required=True)
    p.add_argument("--t", required=True)
    p.set_defaults(func=cmd_bs_bb)

    p = sub.add_parser("locus", help="Hodge locus of a rational vector")
    p.add_argument("--orbit", required=True)
    p.add_argument("--vector", required=True)
    p.add_argument("--y0", default="2")
    p.add_argument("--json")
    p.add_argument("--allow-approximate", action="store_true")
    p.set_defaults(func=cmd_locus)

    p = sub.add_parser("report", help="run the acceptance suite")
    p.add_argument("--only", help="comma-separated criterion numbers")
    p.add_argument("--json")
    p.set_defaults(func=cmd_report)
    return parser


def run_command(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (OSError, OrbitFileError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except UnpolarizedError as exc:
        print(f"check failed: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run_command())


if __name__ == "__main__":
    main()
