"""Orbit files: JSON with rational strings, never floats.

Layout (``"schema": 1``)::

    {
      "schema": 1,
      "name": "e1",
      "rank": 2,
      "weight": 1,
      "Q": [["0", "1"], ["-1", "0"]],
      "hodge_numbers": [1, 1],
      "N": [[["0", "0"], ["1", "0"]]],
      "F": [[...vectors spanning F^0...], [...F^1...], ...],
      "psi": [...matrices g_j...],            # optional
      "metadata": {"name": "e1", "provenance": "..."}
    }

``F[p]`` lists spanning vectors of F^p for p = 0..weight; F^(weight+1) = 0.
Scalars are strings such as ``"3"``, ``"-1/2"``, ``"1/2+3/4i"``.
"""
from __future__ import annotations

import json
from pathlib import Path

from .linalg import Filtration, Matrix, Subspace, format_scalar, parse_scalar
from .mixed_hodge import NilpotentCone, PolarizedLattice
from .period import NilpotentOrbitData, validate_orbit

SCHEMA_VERSION = 1


class OrbitFileError(ValueError):
    def __init__(self, path, problems: list[str]):
        self.problems = list(problems)
        lines = "\n".join(f"  - {p}" for p in self.problems)
        super().__init__(f"invalid orbit file {path}:\n{lines}")


def _scalar(x, where: str, problems: list):
    if isinstance(x, bool) or isinstance(x, float):
        problems.append(f"{where}: floats are not allowed, use rational strings")
        return None
    try:
        return parse_scalar(x)
    except (ValueError, TypeError) as exc:
        problems.append(f"{where}: {exc}")
        return None


def _matrix(obj, where: str, problems: list) -> Matrix | None:
    if not isinstance(obj, list) or not obj or not all(isinstance(r, list) for r in obj):
        problems.append(f"{where}: expected a non-empty list of rows")
        return None
    rows = []
    for i, r in enumerate(obj):
        rows.append([_scalar(x, f"{where}[{i}][{j}]", problems) for j, x in enumerate(r)])
    if any(x is None for r in rows for x in r):
        return None
    try:
        return Matrix(rows)
    except ValueError as exc:
        problems.append(f"{where}: {exc}")
        return None


def orbit_from_dict(doc: dict, path="<dict>") -> NilpotentOrbitData:
    problems = []
    if not isinstance(doc, dict):
        raise OrbitFileError(path, ["top level must be a JSON object"])
    if doc.get("schema") != SCHEMA_VERSION:
        problems.append(f"schema must be {SCHEMA_VERSION}, got {doc.get('schema')!r}")
    for key in ("rank", "weight", "Q", "hodge_numbers", "N", "F"):
        if key not in doc:
            problems.append(f"missing field {key!r}")
    if problems:
        raise OrbitFileError(path, problems)
    rank, weight = doc["rank"], doc["weight"]
    if not isinstance(rank, int) or rank < 1:
        problems.append("rank must be a positive integer")
    if not isinstance(weight, int) or weight < 0:
        problems.append("weight must be a non-negative integer")
    hodge = doc["hodge_numbers"]
    if not isinstance(hodge, list) or not all(isinstance(h, int) and h >= 0 for h in hodge):
        problems.append("hodge_numbers must be a list of non-negative integers")
    Q = _matrix(doc["Q"], "Q", problems)
    Ns = [_matrix(N, f"N[{i}]", problems) for i, N in enumerate(doc["N"])]
    if not doc["N"]:
        problems.append("N must list at least one matrix")
    psi = None
    if doc.get("psi") is not None:
        psi = [_matrix(g, f"psi[{i}]", problems) for i, g in enumerate(doc["psi"])]
    F = None
    Fdoc = doc["F"]
    if problems:
        raise OrbitFileError(path, problems)
    if not isinstance(Fdoc, list) or len(Fdoc) != weight + 1:
        problems.append(f"F must list weight + 1 = {weight + 1} levels")
    else:
        levels = {}
        for p, vecs in enumerate(Fdoc):
            parsed = []
            for a, v in enumerate(vecs):
                if not isinstance(v, list) or len(v) != rank:
                    problems.append(f"F[{p}][{a}]: expected a vector of length {rank}")
                    continue
                parsed.append([_scalar(x, f"F[{p}][{a}][{b}]", problems) for b, x in enumerate(v)])
            if not problems:
                levels[p] = Subspace.span(parsed, rank)
        if not problems:
            levels[weight + 1] = Subspace.zero(rank)
            try:
                F = Filtration(levels, rank, decreasing=True)
            except ValueError as exc:
                problems.append(f"F: {exc}")
    if problems:
        raise OrbitFileError(path, problems)
    lattice = PolarizedLattice(rank, weight, Q, tuple(hodge))
    meta = dict(doc.get("metadata") or {})
    name = doc.get("name") or meta.get("name") or ""
    data = NilpotentOrbitData(NilpotentCone(lattice, tuple(Ns)), F, None if psi is None else tuple(psi),
                              name=name, metadata=meta)
    report = validate_orbit(data)
    if not report.ok:
        raise OrbitFileError(path, [f"{c.name}" + (f": {c.detail}" if c.detail else "") for c in report.failures()])
    return data


def resolve_orbit_path(path) -> Path:
    """A filesystem path, or the name of a bundled dataset (``e1``, ``e1.json``)."""
    p = Path(path)
    if p.exists():
        return p
    from .datasets import DATA_DIR

    name = p.name if p.name.endswith(".json") else p.name + ".json"
    bundled = DATA_DIR / name
    if bundled.exists():
        return bundled
    raise FileNotFoundError(f"no orbit file {path!s} (and no bundled dataset of that name)")


def load_orbit(path) -> NilpotentOrbitData:
    p = resolve_orbit_path(path)
    try:
        doc = json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise OrbitFileError(p, [f"not valid JSON: {exc}"]) from exc
    return orbit_from_dict(doc, p)


def _mat_json(M: Matrix) -> list:
    return M.tolist(fmt=True)


def orbit_to_dict(data: NilpotentOrbitData) -> dict:
    lat = data.lattice
    k = lat.weight
    doc = {
        "schema": SCHEMA_VERSION,
        "name": data.name,
        "rank": lat.rank,
        "weight": k,
        "Q": _mat_json(lat.Q),
        "hodge_numbers": list(lat.hodge_numbers),
        "N": [_mat_json(N) for N in data.cone.generators],
        "F": [[[format_scalar(x) for x in b] for b in data.F[p].basis] for p in range(0, k + 1)],
    }
    if data.psi is not None:
        doc["psi"] = [_mat_json(g) for g in data.psi]
    doc["metadata"] = dict(data.metadata)
    return doc


def dump_orbit(data: NilpotentOrbitData, path) -> None:
    Path(path).write_text(json.dumps(orbit_to_dict(data), indent=1) + "\n")
