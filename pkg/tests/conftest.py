"""Shared fixtures and field constructions used across the test modules."""

from __future__ import annotations

import random

import pytest

import combing_forge as cf
from combing_forge.combing import Combing
from combing_forge.mesh import GLOBAL_FRAME
from combing_forge.ratgeom import E1, mat_vec, random_small_rotation


@pytest.fixture(scope="session")
def hopf33():
    return cf.hopf_s3(3, 3)


@pytest.fixture(scope="session")
def solid33():
    return cf.solid_torus(3, 3)


@pytest.fixture(scope="session")
def triple():
    return cf.hopf_s3_triple()


@pytest.fixture(scope="session")
def model_bounded():
    return cf.build_model()


@pytest.fixture(scope="session")
def model_closed():
    return cf.build_model(closed=True)


def collar_random(mesh, seed, max_angle=1.2):
    """A field equal to e1 on the boundary and on every vertex of a
    boundary-touching tetrahedron, random beyond that collar; pairs of such
    fields keep their coincidence loci away from the boundary."""
    bdry = set(mesh.cells.boundary_vertices)
    near = set(bdry)
    for tet in mesh.tets:
        if any(v in bdry for v in tet):
            near.update(tet)
    rng = random.Random(seed)
    vectors = {}
    for v in range(mesh.nv):
        if v in near:
            vectors[v] = E1
        else:
            vectors[v] = mat_vec(random_small_rotation(rng, max_angle, 10**3), E1)
    return Combing(mesh, vectors)


def homotope(X, seed, angle=0.01):
    """A small seeded homotopy of a field: one rotation applied to every
    interior value in the global chart, boundary values kept."""
    rng = random.Random(seed)
    rot = random_small_rotation(rng, angle, 10**5)
    mesh = X.mesh
    bdry = mesh.cells.boundary_vertices
    vectors = {}
    for v, vec in X.vectors.items():
        if v in bdry:
            vectors[v] = vec
            continue
        back = mesh.transition(v, GLOBAL_FRAME, X.frames[v])
        vectors[v] = mat_vec(back, mat_vec(rot, X.value(v, GLOBAL_FRAME)))
    return X.with_vectors(vectors)


def tube_datum(mesh, region, X, combing=None):
    """Replacement datum for a product tube region: the region itself with
    the example tube field (or a given field) inside."""
    if combing is None:
        combing = cf.example_tube_combing(mesh, region, base=X)
    B = cf.region_submesh(mesh, region)
    return cf.trivial_datum(mesh, region, X, combing=cf.restrict_combing(combing, B))


def noop_datum(mesh, region, X):
    return cf.trivial_datum(mesh, region, X)


def extract_pair(mesh, X, Y, seed):
    """Coincidence links at both signs after a retried generic perturbation."""
    from combing_forge.errors import Degenerate, LinksIntersect, PerturbationFailed

    last = None
    for k in range(6):
        try:
            Xp, Yp = cf.perturb_pair(X, Y, seed=seed + 1009 * k)
            return Xp, Yp, cf.coincidence_link(Xp, Yp, 1), cf.coincidence_link(Xp, Yp, -1)
        except (PerturbationFailed, Degenerate, LinksIntersect) as exc:
            last = exc
    raise AssertionError(f"no generic configuration found: {last}")
