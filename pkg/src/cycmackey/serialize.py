"""Canonical JSON for lattices, functors and presentations.

Scalars are strings in lowest terms; keys are sorted; output is byte-stable.
"""
from __future__ import annotations

import json

from . import dvr
from .gentle import GentleFunctor, gentle_validate
from .lattice import GLattice, make_lattice, orbit_size
from .mackey import MackeyFunctor, make_mackey
from .modules import FGModule, hom_make
from .presenter import PermPresentation


def dumps(obj: dict) -> str:
    return json.dumps(obj, sort_keys=True, indent=1) + "\n"


def _matrix(a) -> list:
    return dvr.to_nested_strings(a)


def _parse_matrix(rows, shape) -> "np.ndarray":
    if not isinstance(rows, list) or any(not isinstance(r, list) for r in rows):
        raise ValueError("matrix must be a list of rows")
    for r in rows:
        for v in r:
            if not isinstance(v, (str, int)) or isinstance(v, bool):
                raise ValueError(f"bad scalar entry {v!r}")
    return dvr.as_matrix(rows, shape)


def _require(d: dict, *keys):
    if not isinstance(d, dict):
        raise ValueError("expected a JSON object")
    missing = [k for k in keys if k not in d]
    if missing:
        raise ValueError(f"missing keys: {missing}")


# ---------------------------------------------------------------- lattices

def lattice_to_json(M: GLattice) -> dict:
    return {"p": M.p, "n": M.n, "rank": M.rank, "action": _matrix(M.action)}


def lattice_from_json(d: dict) -> GLattice:
    _require(d, "p", "n", "rank", "action")
    r = int(d["rank"])
    return make_lattice(int(d["p"]), int(d["n"]), _parse_matrix(d["action"], (r, r)))


# ---------------------------------------------------------------- modules and functors

def _module_from_json(p: int, d: dict) -> FGModule:
    _require(d, "free", "torsion")
    return FGModule(p, int(d["free"]), tuple(int(e) for e in d["torsion"]))


def mackey_to_json(X: MackeyFunctor) -> dict:
    return {"p": X.p, "n": X.n,
            "levels": [V.to_json() for V in X.levels],
            "res": [_matrix(f.matrix) for f in X.res],
            "tr": [_matrix(f.matrix) for f in X.tr],
            "gamma": [_matrix(f.matrix) for f in X.gamma]}


def mackey_from_json(d: dict, validate: bool = True) -> MackeyFunctor:
    _require(d, "p", "n", "levels", "res", "tr", "gamma")
    p, n = int(d["p"]), int(d["n"])
    V = [_module_from_json(p, v) for v in d["levels"]]
    if len(V) != n + 1:
        raise ValueError("wrong number of levels")

    def hom(rows, a, b):
        return hom_make(V[a], V[b], _parse_matrix(rows, (V[b].ngens, V[a].ngens)))

    res = [hom(d["res"][k], k, k + 1) for k in range(n)]
    tr = [hom(d["tr"][k], k + 1, k) for k in range(n)]
    gamma = [hom(d["gamma"][k], k, k) for k in range(n + 1)]
    return make_mackey(p, n, V, res, tr, gamma, validate=validate)


def gentle_to_json(F: GentleFunctor) -> dict:
    return {"p": F.p, "n": F.n,
            "vertices": [V.to_json() for V in F.vertices],
            "down": [_matrix(f.matrix) for f in F.down],
            "up": [_matrix(f.matrix) for f in F.up]}


def gentle_from_json(d: dict, validate: bool = True) -> GentleFunctor:
    _require(d, "p", "n", "vertices", "down", "up")
    p, n = int(d["p"]), int(d["n"])
    V = [_module_from_json(p, v) for v in d["vertices"]]

    def hom(rows, a, b):
        return hom_make(V[a], V[b], _parse_matrix(rows, (V[b].ngens, V[a].ngens)))

    F = GentleFunctor(p, n, V, [hom(d["down"][k], k + 1, k) for k in range(n)],
                      [hom(d["up"][k], k, k + 1) for k in range(n)])
    if validate:
        gentle_validate(F)
    return F


# ---------------------------------------------------------------- presentations

def presentation_to_json(P: PermPresentation) -> dict:
    return {"p": P.p, "n": P.n,
            "omega0": list(P.omega0), "omega1": list(P.omega1),
            "inject": _matrix(P.inject), "project": _matrix(P.project),
            "verified": P.verified}


def presentation_from_json(d: dict) -> PermPresentation:
    _require(d, "p", "n", "omega0", "omega1", "inject", "project")
    p, n = int(d["p"]), int(d["n"])
    w0, w1 = tuple(int(x) for x in d["omega0"]), tuple(int(x) for x in d["omega1"])
    r0, r1 = orbit_size(w0, p), orbit_size(w1, p)
    inject = _parse_matrix(d["inject"], (r0, r1))
    rows = len(d["project"])
    project = _parse_matrix(d["project"], (rows, r0))
    return PermPresentation(p, n, w0, w1, inject, project, bool(d.get("verified", False)))


def load_json(path: str) -> dict:
    with open(path) as fh:
        return json.load(fh)
