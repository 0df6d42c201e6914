"""Batch front door: file ingestion, subcommand dispatch and deterministic
JSON reports.

Every subcommand assembles a report {inputs, seed, result, diagnostics,
timings} with the result as an exact rational string "p/q"; with --json the
report is written to a file.  Reports are byte-identical across runs for
identical inputs and --seed; wall-clock timings would break that, so the
timings entry is a fixed placeholder and measured times go to stderr.

Exit codes: 0 on success, 1 on a domain error (invalid manifold, degenerate
configuration, incompatible data), 2 on usage errors.
"""

from __future__ import annotations

import json
import os
import sys
import time
from fractions import Fraction

import click

from . import io as cfio
from .builders import hopf_s3
from .coincidence import coincidence_link, euler_zero_chain
from .combing import perturb_pair
from .errors import CombingForgeError
from .invariants import (
    closed_alternating_sum,
    finite_type_check,
    hopf_demo,
    p1_diff,
    pseudopar_bracket,
    second_order_variation,
)
from .homology import betti, is_qhh
from .linking import homology_class_of_link, linking_number
from .pseudopar import (
    build_empty_model,
    build_model,
    example_model_field,
    exceptional_link,
    meridian_degree,
    siamese_sections,
)
from .surgery import perform, validate_lp


def max_threads() -> int:
    """Parallelism cap from COMBING_FORGE_THREADS (>=1); the current
    implementations are serial, so any cap is honored trivially."""
    try:
        return max(1, int(os.environ.get("COMBING_FORGE_THREADS", "1")))
    except ValueError:
        return 1


def _emit(report: dict, json_path: str | None, started: float) -> None:
    print(f"elapsed: {time.monotonic() - started:.2f}s", file=sys.stderr)
    text = json.dumps(report, indent=2, sort_keys=True)
    if json_path:
        with open(json_path, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        click.echo(text)


def _report(inputs: dict, seed: int, result, diagnostics: dict) -> dict:
    return {
        "inputs": inputs,
        "seed": seed,
        "result": None if result is None else cfio.rational_to_str(result),
        "diagnostics": diagnostics,
        "timings": {"wall_ms": None},
    }


def _load_mesh(path: str):
    return cfio.mesh_from_dict(cfio.load_json(path))


def _load_combing(path: str, mesh):
    return cfio.combing_from_dict(cfio.load_json(path), mesh)


def _class_coords(cls) -> list[str]:
    return [cfio.rational_to_str(c) for c in cls.coordinates]


def _parse_subset(subset: str | None, n: int):
    if subset is None:
        return None
    try:
        idx = [int(s) for s in subset.split(",") if s.strip() != ""]
    except ValueError:
        raise click.UsageError(f"bad --subset {subset!r}: expected indices like 0,1")
    for i in idx:
        if not 0 <= i < n:
            raise click.UsageError(f"--subset index {i} out of range for {n} surgeries")
    return idx


def _build_from_config(path: str | None):
    cfg = cfio.model_config_from_dict(cfio.load_json(path) if path else {})
    if cfg["gamma_loops"] == 0:
        return build_empty_model(), cfg
    model = build_model(a=cfg["a"], b=cfg["b"], eps=cfg["eps"],
                        grid_t=cfg["grid_t"], grid_u=cfg["grid_u"],
                        closed=True)
    return model, cfg


class _Domain(click.Group):
    def invoke(self, ctx):
        try:
            return super().invoke(ctx)
        except CombingForgeError as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(1)


@click.group(cls=_Domain)
def main() -> None:
    """Exact Pontrjagin-number variations of combings on triangulated
    3-manifolds."""


_mesh_opt = click.option("--mesh", "mesh_path", required=True,
                         type=click.Path(exists=True, dir_okay=False))
_seed_opt = click.option("--seed", default=0, show_default=True, type=int)
_json_opt = click.option("--json", "json_path", default=None,
                         type=click.Path(dir_okay=False))


@main.command()
@_mesh_opt
@_json_opt
def validate(mesh_path, json_path):
    """Check that a mesh file is a valid oriented manifold complex."""
    started = time.monotonic()
    mesh = _load_mesh(mesh_path)
    problems = mesh.validate_manifold()
    if problems:
        raise CombingForgeError("invalid mesh: " + "; ".join(problems))
    diag = {
        "tets": len(mesh.tets),
        "vertices": mesh.nv,
        "boundary_vertices": len(mesh.cells.boundary_vertices),
        "regions": sorted(mesh.regions),
    }
    _emit(_report({"mesh": mesh_path}, 0, Fraction(0), diag), json_path, started)


@main.command()
@_mesh_opt
@_json_opt
def homology(mesh_path, json_path):
    """Rational Betti numbers; the result is the first Betti number."""
    started = time.monotonic()
    mesh = _load_mesh(mesh_path)
    b = [betti(mesh, d) for d in range(3)]
    qhh, genus = is_qhh(mesh)
    diag = {"betti": b, "qhh": qhh, "genus": genus}
    _emit(_report({"mesh": mesh_path}, 0, Fraction(b[1]), diag),
          json_path, started)


@main.command()
@_mesh_opt
@click.option("--combing", "combing_paths", required=True, multiple=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--out", "out_prefix", default=None,
              help="write the links to OUT.plus.json / OUT.minus.json")
@_seed_opt
@_json_opt
def coincidence(mesh_path, combing_paths, out_prefix, seed, json_path):
    """Coincidence links of two combings at both signs."""
    started = time.monotonic()
    if len(combing_paths) != 2:
        raise click.UsageError("coincidence needs exactly two --combing files")
    mesh = _load_mesh(mesh_path)
    X = _load_combing(combing_paths[0], mesh)
    Y = _load_combing(combing_paths[1], mesh)
    X, Y = perturb_pair(X, Y, seed=seed)
    plus = coincidence_link(X, Y, 1)
    minus = coincidence_link(X, Y, -1)
    if out_prefix:
        cfio.dump_json(cfio.link_to_dict(plus), out_prefix + ".plus.json")
        cfio.dump_json(cfio.link_to_dict(minus), out_prefix + ".minus.json")
    diag = {
        "plus_loops": len(plus.loops),
        "minus_loops": len(minus.loops),
        "plus_class": _class_coords(homology_class_of_link(plus, mesh)),
        "minus_class": _class_coords(homology_class_of_link(minus, mesh)),
    }
    inputs = {"mesh": mesh_path, "combings": list(combing_paths)}
    _emit(_report(inputs, seed, Fraction(len(plus.loops) + len(minus.loops)),
                  diag), json_path, started)


@main.command()
@_mesh_opt
@click.option("--l1", "l1_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--l2", "l2_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@_json_opt
def lk(mesh_path, l1_path, l2_path, json_path):
    """Linking number of two disjoint rationally null-homologous links."""
    started = time.monotonic()
    mesh = _load_mesh(mesh_path)
    l1 = cfio.link_from_dict(cfio.load_json(l1_path))
    l2 = cfio.link_from_dict(cfio.load_json(l2_path))
    value = linking_number(l1, l2, mesh)
    inputs = {"mesh": mesh_path, "l1": l1_path, "l2": l2_path}
    _emit(_report(inputs, 0, value, {}), json_path, started)


@main.command()
@_mesh_opt
@click.option("--combing", "combing_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--sigma", "sigma_path", default=None,
              type=click.Path(exists=True, dir_okay=False))
@_seed_opt
@_json_opt
def euler(mesh_path, combing_path, sigma_path, seed, json_path):
    """Euler zero link of a combing; the result is 0/1 when torsion."""
    started = time.monotonic()
    mesh = _load_mesh(mesh_path)
    X = _load_combing(combing_path, mesh)
    sigma = None
    if sigma_path:
        sigma = {int(v): tuple(cfio.rational_from_str(c) for c in vec)
                 for v, vec in cfio.load_json(sigma_path).items()}
    link = euler_zero_chain(X, sigma, seed=seed)
    cls = homology_class_of_link(link, mesh)
    diag = {"loops": len(link.loops), "class": _class_coords(cls)}
    inputs = {"mesh": mesh_path, "combing": combing_path, "sigma": sigma_path}
    _emit(_report(inputs, seed, Fraction(0 if cls.is_zero() else 1), diag),
          json_path, started)


@main.command("validate-lp")
@_mesh_opt
@click.option("--surgery", "surgery_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@_json_opt
def validate_lp_cmd(mesh_path, surgery_path, json_path):
    """Homological validity of one replacement datum."""
    started = time.monotonic()
    mesh = _load_mesh(mesh_path)
    datum = cfio.surgery_from_dict(cfio.load_json(surgery_path))
    rep = validate_lp(mesh, datum)
    if not rep["passed"]:
        raise CombingForgeError("invalid datum: " + "; ".join(rep["problems"]))
    inputs = {"mesh": mesh_path, "surgery": surgery_path}
    _emit(_report(inputs, 0, Fraction(0), rep), json_path, started)


@main.command()
@_mesh_opt
@click.option("--combing", "combing_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--surgery", "surgery_paths", required=True, multiple=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--subset", default=None,
              help="comma-separated indices of the surgeries to perform")
@click.option("--out", "out_prefix", default=None,
              help="write the surgered mesh/combing to OUT.mesh.json / OUT.combing.json")
@_seed_opt
@_json_opt
def surgery(mesh_path, combing_path, surgery_paths, subset, out_prefix, seed,
            json_path):
    """Perform replacements on regions of the mesh."""
    started = time.monotonic()
    mesh = _load_mesh(mesh_path)
    X = _load_combing(combing_path, mesh)
    data = [cfio.surgery_from_dict(cfio.load_json(p)) for p in surgery_paths]
    idx = _parse_subset(subset, len(data))
    mesh2, X2 = perform(mesh, X, data, subset=idx)
    if out_prefix:
        cfio.dump_json(cfio.mesh_to_dict(mesh2), out_prefix + ".mesh.json")
        cfio.dump_json(cfio.combing_to_dict(X2), out_prefix + ".combing.json")
    diag = {"tets": len(mesh2.tets), "vertices": mesh2.nv}
    inputs = {"mesh": mesh_path, "combing": combing_path,
              "surgeries": list(surgery_paths), "subset": subset}
    _emit(_report(inputs, seed, Fraction(0), diag), json_path, started)


@main.command("p1-diff")
@_mesh_opt
@click.option("--combing", "combing_paths", required=True, multiple=True,
              type=click.Path(exists=True, dir_okay=False))
@_seed_opt
@_json_opt
def p1_diff_cmd(mesh_path, combing_paths, seed, json_path):
    """First Pontrjagin difference of two boundary-compatible torsion
    combings."""
    started = time.monotonic()
    if len(combing_paths) != 2:
        raise click.UsageError("p1-diff needs exactly two --combing files")
    mesh = _load_mesh(mesh_path)
    X = _load_combing(combing_paths[0], mesh)
    Y = _load_combing(combing_paths[1], mesh)
    value = p1_diff(X, Y, seed=seed)
    inputs = {"mesh": mesh_path, "combings": list(combing_paths)}
    _emit(_report(inputs, seed, value, {}), json_path, started)


@main.command()
@_mesh_opt
@click.option("--combing", "combing_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--surgery", "surgery_paths", required=True, multiple=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--check", is_flag=True,
              help="cross-check against the alternating sum of p1 differences")
@_seed_opt
@_json_opt
def variation(mesh_path, combing_path, surgery_paths, check, seed, json_path):
    """Second-order variation of p1 across two disjoint replacements."""
    started = time.monotonic()
    if len(surgery_paths) != 2:
        raise click.UsageError("variation needs exactly two --surgery files")
    mesh = _load_mesh(mesh_path)
    X = _load_combing(combing_path, mesh)
    d1, d2 = (cfio.surgery_from_dict(cfio.load_json(p)) for p in surgery_paths)
    value = second_order_variation(mesh, X, d1, d2, seed=seed)
    diag = {}
    if check:
        alt = closed_alternating_sum(mesh, X, d1, d2, seed=seed)
        diag["alternating_sum"] = cfio.rational_to_str(alt)
        if alt != value:
            raise CombingForgeError(
                f"alternating sum {alt} disagrees with variation {value}")
    inputs = {"mesh": mesh_path, "combing": combing_path,
              "surgeries": list(surgery_paths)}
    _emit(_report(inputs, seed, value, diag), json_path, started)


@main.command("finite-type")
@_mesh_opt
@click.option("--combing", "combing_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--surgery", "surgery_paths", required=True, multiple=True,
              type=click.Path(exists=True, dir_okay=False))
@_seed_opt
@_json_opt
def finite_type(mesh_path, combing_path, surgery_paths, seed, json_path):
    """Degree-two finite-type check across three disjoint replacements."""
    started = time.monotonic()
    if len(surgery_paths) != 3:
        raise click.UsageError("finite-type needs exactly three --surgery files")
    mesh = _load_mesh(mesh_path)
    X = _load_combing(combing_path, mesh)
    d1, d2, d3 = (cfio.surgery_from_dict(cfio.load_json(p)) for p in surgery_paths)
    value = finite_type_check(mesh, X, d1, d2, d3, seed=seed)
    inputs = {"mesh": mesh_path, "combing": combing_path,
              "surgeries": list(surgery_paths)}
    _emit(_report(inputs, seed, value, {}), json_path, started)


@main.command()
@click.option("--model", "model_path", default=None,
              type=click.Path(exists=True, dir_okay=False),
              help="model config JSON; defaults apply when omitted")
@_json_opt
def model(model_path, json_path):
    """Build the twisted-tube model and report its diagnostics."""
    started = time.monotonic()
    m, cfg = _build_from_config(model_path)
    if m.empty:
        diag = {"empty": True, "exceptional_loops": 0}
    else:
        diag = {
            "empty": False,
            "lift_parity": m.diagnostics["lift_parity"],
            "meridian_degree_d": meridian_degree(m, "d"),
            "meridian_degree_g": meridian_degree(m, "g"),
            "exceptional_loops": len(exceptional_link(m).loops),
            "host_tets": len(m.host.tets),
        }
    inputs = {"model": cfio.model_config_to_dict(cfg)}
    _emit(_report(inputs, 0, Fraction(1), diag), json_path, started)


@main.command()
@click.option("--model", "model_path", default=None,
              type=click.Path(exists=True, dir_okay=False),
              help="model config JSON; defaults apply when omitted")
@click.option("--combing", "combing_path", default=None,
              type=click.Path(exists=True, dir_okay=False),
              help="field on the model host; defaults to the example field")
@_seed_opt
@_json_opt
def bracket(model_path, combing_path, seed, json_path):
    """Bracket of a compatible torsion field against the model."""
    started = time.monotonic()
    m, cfg = _build_from_config(model_path)
    if combing_path:
        X = _load_combing(combing_path, m.host)
    else:
        X = example_model_field(m)
    value = pseudopar_bracket(m, X, seed=seed)
    inputs = {"model": cfio.model_config_to_dict(cfg), "combing": combing_path}
    _emit(_report(inputs, seed, value, {}), json_path, started)


@main.command("hopf-demo")
@_seed_opt
@_json_opt
def hopf_demo_cmd(seed, json_path):
    """End-to-end two-tube example on the 3-sphere; the result is -8."""
    started = time.monotonic()
    out = hopf_demo(seed=seed)
    diag = {
        "mesh_tets": out["mesh_tets"],
        "alternating_sum": cfio.rational_to_str(out["alternating_sum"]),
        "agree": out["agree"],
    }
    _emit(_report({}, seed, out["variation"], diag), json_path, started)


if __name__ == "__main__":
    main()
