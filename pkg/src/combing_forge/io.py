"""JSON serialization of the package's data: meshes, combings, links,
surgery data and model configurations.

Every rational number is written exactly as the string "p/q" (the
denominator is always present, so "3" round-trips as "3/1"); floats never
appear in any file.  Dictionaries keyed by vertex id are written with
string keys, as JSON requires.
"""

from __future__ import annotations

import json
from fractions import Fraction

from .combing import Combing
from .errors import CombingForgeError
from .mesh import FramedMesh
from .meshops import BoundaryIdentification
from .pllink import Loop, PLLink, Segment
from .surgery import LPSurgeryDatum


# -- rationals ----------------------------------------------------------------

def rational_to_str(x) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def rational_from_str(s) -> Fraction:
    if isinstance(s, int):
        return Fraction(s)
    if not isinstance(s, str):
        raise CombingForgeError(f"expected a rational string, got {s!r}")
    return Fraction(s)


def _vec_out(v):
    return [rational_to_str(c) for c in v]


def _vec_in(v):
    return tuple(rational_from_str(c) for c in v)


def _mat_out(m):
    return [[rational_to_str(c) for c in row] for row in m]


def _mat_in(m):
    return tuple(tuple(rational_from_str(c) for c in row) for row in m)


# -- meshes -------------------------------------------------------------------

def mesh_to_dict(mesh: FramedMesh) -> dict:
    return {
        "nv": mesh.nv,
        "tets": [list(t) for t in mesh.tets],
        "orientations": list(mesh.orientations),
        "face_glue": [[list(a), list(b)] for a, b in mesh.face_glue],
        "regions": {name: sorted(ts) for name, ts in mesh.regions.items()},
        "frames": dict(mesh.frames),
        "transitions": [
            [v, frm, to, _mat_out(m)]
            for (v, frm, to), m in sorted(mesh.transitions.items())
        ],
    }


def mesh_from_dict(d: dict) -> FramedMesh:
    return FramedMesh(
        d["nv"],
        [tuple(t) for t in d["tets"]],
        d["orientations"],
        [((a[0], a[1]), (b[0], b[1])) for a, b in d["face_glue"]],
        {name: frozenset(ts) for name, ts in d["regions"].items()},
        dict(d["frames"]),
        {(v, frm, to): _mat_in(m) for v, frm, to, m in d.get("transitions", [])},
    )


# -- combings -----------------------------------------------------------------

def combing_to_dict(X: Combing) -> dict:
    return {
        "vectors": {str(v): _vec_out(vec) for v, vec in sorted(X.vectors.items())},
        "sigma": {str(v): _vec_out(s) for v, s in sorted(X.sigma.items())},
        "frames": {str(v): f for v, f in sorted(X.frames.items())},
    }


def combing_from_dict(d: dict, mesh: FramedMesh, check: bool = True) -> Combing:
    vectors = {int(v): _vec_in(vec) for v, vec in d["vectors"].items()}
    sigma = {int(v): _vec_in(s) for v, s in d.get("sigma", {}).items()} or None
    frames = {int(v): f for v, f in d.get("frames", {}).items()} or None
    return Combing(mesh, vectors, sigma, frames, check=check)


# -- links --------------------------------------------------------------------

def link_to_dict(link: PLLink) -> dict:
    return {
        "loops": [
            {
                "multiplicity": rational_to_str(loop.multiplicity),
                "segments": [
                    {"tet": s.tet, "entry": _vec4_out(s.entry),
                     "exit": _vec4_out(s.exit)}
                    for s in loop.segments
                ],
            }
            for loop in link.loops
        ]
    }


def _vec4_out(b):
    return [rational_to_str(c) for c in b]


def _vec4_in(b):
    return tuple(rational_from_str(c) for c in b)


def link_from_dict(d: dict) -> PLLink:
    return PLLink([
        Loop(
            [Segment(s["tet"], _vec4_in(s["entry"]), _vec4_in(s["exit"]))
             for s in loop["segments"]],
            rational_from_str(loop.get("multiplicity", "1/1")),
        )
        for loop in d["loops"]
    ])


# -- surgery data -------------------------------------------------------------

def surgery_to_dict(d: LPSurgeryDatum) -> dict:
    return {
        "region": d.region,
        "replacement": mesh_to_dict(d.replacement),
        "h": {str(v): b for v, b in sorted(d.h.vertex_map.items())},
        "combing": combing_to_dict(d.combing),
        "sigma": ({str(v): _vec_out(s) for v, s in sorted(d.sigma.items())}
                  if d.sigma else None),
    }


def surgery_from_dict(d: dict) -> LPSurgeryDatum:
    replacement = mesh_from_dict(d["replacement"])
    combing = combing_from_dict(d["combing"], replacement, check=False)
    sigma = None
    if d.get("sigma"):
        sigma = {int(v): _vec_in(s) for v, s in d["sigma"].items()}
    return LPSurgeryDatum(
        d["region"],
        replacement,
        BoundaryIdentification({int(v): b for v, b in d["h"].items()}),
        combing,
        sigma,
    )


# -- model configuration -------------------------------------------------------

MODEL_CONFIG_DEFAULTS = {
    "a": Fraction(0),
    "b": Fraction(1),
    "eps": Fraction(1, 4),
    "grid_t": 24,
    "grid_u": 24,
    "gamma_loops": 1,
}


def model_config_from_dict(d: dict) -> dict:
    """Normalized model configuration: rationals parsed, defaults filled,
    unknown keys rejected."""
    unknown = set(d) - set(MODEL_CONFIG_DEFAULTS)
    if unknown:
        raise CombingForgeError(f"unknown model config keys {sorted(unknown)}")
    cfg = dict(MODEL_CONFIG_DEFAULTS)
    for key in ("a", "b", "eps"):
        if key in d:
            cfg[key] = rational_from_str(d[key])
    for key in ("grid_t", "grid_u", "gamma_loops"):
        if key in d:
            cfg[key] = int(d[key])
    if cfg["gamma_loops"] not in (0, 1):
        raise CombingForgeError(
            "gamma_loops must be 0 (no tube) or 1 (the local model)")
    return cfg


def model_config_to_dict(cfg: dict) -> dict:
    out = dict(cfg)
    for key in ("a", "b", "eps"):
        out[key] = rational_to_str(out[key])
    return out


# -- files ----------------------------------------------------------------------

def load_json(path: str) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def dump_json(obj: dict, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")
