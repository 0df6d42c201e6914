"""Vertex-sampled unit vector fields on framed meshes, together with the
boundary section sigma of the normal plane field, plus the standard
constructions: constant fields, the degree-one tube field, seeded generic
fields and the transversality perturbation used before coincidence
extraction.
"""

from __future__ import annotations

import math
import random
import warnings
from fractions import Fraction

from . import ratgeom
from .errors import (
    BoundaryNotE1,
    CombingForgeError,
    NonInvariantUnderTransitions,
    PerturbationFailed,
    SigmaVanishes,
)
from .mesh import GLOBAL_FRAME, FramedMesh
from .ratgeom import (
    E1,
    E2,
    Vec3,
    add,
    any_unit_orthogonal,
    cross,
    dot,
    is_unit,
    is_zero,
    mat_vec,
    norm_sq,
    random_small_rotation,
    rationalize_unit,
    scale,
    sub,
)

UNIT_TOL = Fraction(1, 10**12)


def _normalized(v: Vec3) -> Vec3:
    if is_zero(v):
        raise CombingForgeError("cannot normalize the zero vector")
    if is_unit(v):
        return v
    warnings.warn("vector is not unit; normalizing", stacklevel=3)
    return rationalize_unit([float(c) for c in v])


class Combing:
    """A unit vector field sampled at mesh vertices, with the frame each
    sample is expressed in, and a nonvanishing orthogonal section sigma on
    the boundary vertices."""

    def __init__(self, mesh: FramedMesh, vectors: dict[int, Vec3],
                 sigma: dict[int, Vec3] | None = None,
                 frames: dict[int, str] | None = None,
                 check: bool = True):
        self.mesh = mesh
        self.vectors = dict(vectors)
        self.frames = dict(frames) if frames else {v: GLOBAL_FRAME for v in vectors}
        bdry = mesh.cells.boundary_vertices
        if sigma is None:
            sigma = {v: any_unit_orthogonal(self.vectors[v]) for v in bdry}
        self.sigma = dict(sigma)
        if check:
            self._check()

    def _check(self):
        unused = set(range(self.mesh.nv)) - set(self.vectors)
        if unused:
            raise CombingForgeError(f"missing combing values at vertices {sorted(unused)[:5]}")
        for v, vec in self.vectors.items():
            if abs(norm_sq(vec) - 1) > UNIT_TOL:
                raise CombingForgeError(f"combing value at vertex {v} is not unit")
        bdry = self.mesh.cells.boundary_vertices
        for v in bdry:
            s = self.sigma.get(v)
            if s is None or is_zero(s):
                raise SigmaVanishes(f"sigma missing or zero at boundary vertex {v}")
            if abs(norm_sq(s) - 1) > UNIT_TOL:
                raise CombingForgeError(f"sigma at vertex {v} is not unit")
            if abs(dot(s, self.vectors[v])) > Fraction(1, 10**12):
                raise CombingForgeError(f"sigma not orthogonal to the field at vertex {v}")

    def value(self, v: int, frame: str) -> Vec3:
        """The field at vertex v expressed in the requested frame."""
        src = self.frames[v]
        if src == frame:
            return self.vectors[v]
        return mat_vec(self.mesh.transition(v, src, frame), self.vectors[v])

    def value_in_tet(self, v: int, tet: int) -> Vec3:
        return self.value(v, self.mesh.frame_of_tet(tet))

    def sigma_value(self, v: int, frame: str) -> Vec3:
        src = self.frames[v]
        if src == frame:
            return self.sigma[v]
        return mat_vec(self.mesh.transition(v, src, frame), self.sigma[v])

    def rho(self, v: int) -> tuple[Vec3, Vec3, Vec3]:
        """The boundary trivialization (X, sigma, X ^ sigma) at a boundary
        vertex."""
        x = self.vectors[v]
        s = self.sigma[v]
        return (x, s, cross(x, s))

    def negated(self) -> "Combing":
        return Combing(
            self.mesh,
            {v: ratgeom.neg(vec) for v, vec in self.vectors.items()},
            {v: s for v, s in self.sigma.items()},
            self.frames,
            check=False,
        )

    def with_vectors(self, vectors: dict[int, Vec3]) -> "Combing":
        return Combing(self.mesh, vectors, self.sigma, self.frames, check=False)

    def boundary_equal(self, other: "Combing") -> bool:
        bdry = self.mesh.cells.boundary_vertices
        return all(
            self.value(v, GLOBAL_FRAME) == other.value(v, GLOBAL_FRAME)
            and self.sigma_value(v, GLOBAL_FRAME) == other.sigma_value(v, GLOBAL_FRAME)
            for v in bdry
        )


def constant_combing(mesh: FramedMesh, v: Vec3, frame: str = GLOBAL_FRAME,
                     sigma: Vec3 | None = None) -> Combing:
    """The field equal to v at every vertex (in the given frame)."""
    v = _normalized(tuple(Fraction(c) for c in v))
    for vert in range(mesh.nv):
        frames = mesh.frames_at_vertex(vert)
        for f in frames:
            if f == frame:
                continue
            rotated = mat_vec(mesh.transition(vert, frame, f), v)
            if rotated != v and any(abs(a - b) > Fraction(1, 10**12)
                                    for a, b in zip(rotated, v)):
                raise NonInvariantUnderTransitions(
                    f"constant value changes under the frame transition at vertex {vert}"
                )
    if sigma is not None:
        sigma = tuple(Fraction(c) for c in sigma)
        sig = {b: sigma for b in mesh.cells.boundary_vertices}
    else:
        sig = None
    return Combing(mesh, {vert: v for vert in range(mesh.nv)},
                   sig, {vert: frame for vert in range(mesh.nv)})


def default_tube_g(p: int) -> dict[int, Vec3]:
    """Degree-one disk-to-sphere map sampled on the graded p-gon disk:
    -e1 at the center, the (e2,e3)-equator along the middle ring, e1 on the
    boundary ring."""
    g: dict[int, Vec3] = {0: ratgeom.neg(E1)}
    for i in range(p):
        phi = 2.0 * math.pi * i / p
        c, s = ratgeom.rational_unit_from_angle(phi)
        g[1 + i] = (Fraction(0), c, -s)
        g[1 + p + i] = E1
    return g


def sampled_disk_degree(g: dict[int, Vec3], p: int) -> int:
    """Degree of a sampled disk map constant near the boundary, as the total
    signed solid angle of the image triangles over 4*pi."""
    from .builders import disk_base

    total = 0.0
    for tri in disk_base(p):
        a, b, c = (tuple(float(x) for x in g[v]) for v in tri)
        num = (a[0] * (b[1] * c[2] - b[2] * c[1])
               - a[1] * (b[0] * c[2] - b[2] * c[0])
               + a[2] * (b[0] * c[1] - b[1] * c[0]))
        d_ab = sum(x * y for x, y in zip(a, b))
        d_bc = sum(x * y for x, y in zip(b, c))
        d_ca = sum(x * y for x, y in zip(c, a))
        total += 2.0 * math.atan2(num, 1.0 + d_ab + d_bc + d_ca)
    return round(total / (4.0 * math.pi))


def example_tube_combing(mesh: FramedMesh, region: str = "A",
                         g: dict[int, Vec3] | None = None,
                         base: "Combing | None" = None) -> Combing:
    """The tube field on a product solid torus region: constant along the
    circle factor, equal to the sampled disk map g on each disk fiber.

    When ``base`` is given, vertices outside the tube keep the base field's
    values; this composes tube modifications on disjoint regions."""
    info = (mesh.meta.get("products") or {}).get(region)
    if info is None or info.get("kind") != "tube":
        raise CombingForgeError(f"region {region} is not a product tube")
    p = info["p"]
    if g is None:
        g = default_tube_g(p)
    for base_v, vec in g.items():
        if abs(norm_sq(vec) - 1) > UNIT_TOL:
            raise CombingForgeError(f"g sample at base vertex {base_v} is not unit")
    for i in range(p):
        if g[1 + p + i] != E1:
            raise BoundaryNotE1(f"g is not e1 at boundary base vertex {1 + p + i}")
    # vertices outside the tube (when the tube is a region of a larger mesh)
    # carry the boundary value e1, extending the field constantly
    if base is None:
        vectors: dict[int, Vec3] = {v: E1 for v in range(mesh.nv)}
    else:
        if base.mesh is not mesh:
            raise CombingForgeError("base field lives on a different mesh")
        vectors = dict(base.vectors)
    layers = info["layers"]
    for k in range(layers):
        vectors[info["center"][k]] = g[0]
        for i in range(p):
            vectors[info["mid"][i][k]] = g[1 + i]
            vectors[info["outer"][i][k]] = g[1 + p + i]
    sigma = {v: E2 for v in mesh.cells.boundary_vertices} if mesh.cells.boundary_vertices else None
    return Combing(mesh, vectors, sigma)


def random_combing(mesh: FramedMesh, seed: int, boundary_vector: Vec3 = E1,
                   max_angle: float = 2.5, sigma_vector: Vec3 = E2) -> Combing:
    """A seeded field: the boundary (if any) carries the fixed boundary
    vector with the fixed sigma, interior vertices carry the boundary vector
    turned by an independent random rotation of angle up to max_angle."""
    rng = random.Random(seed)
    bvec = tuple(Fraction(c) for c in boundary_vector)
    bdry = mesh.cells.boundary_vertices
    vectors: dict[int, Vec3] = {}
    for v in range(mesh.nv):
        if v in bdry:
            vectors[v] = bvec
        else:
            vectors[v] = mat_vec(random_small_rotation(rng, max_angle, 10**3), bvec)
    sigma = {v: tuple(Fraction(c) for c in sigma_vector) for v in bdry} if bdry else None
    return Combing(mesh, vectors, sigma)


def sigma_from_frame(X: Combing, reference: Vec3 = E2) -> dict[int, Vec3]:
    """Default boundary section: the reference vector projected onto the
    plane field orthogonal to X and normalized."""
    out: dict[int, Vec3] = {}
    for v in X.mesh.cells.boundary_vertices:
        x = X.vectors[v]
        proj = sub(reference, scale(dot(reference, x), x))
        if norm_sq(proj) < Fraction(1, 10**8):
            raise SigmaVanishes(f"projected section vanishes at boundary vertex {v}")
        out[v] = rationalize_unit([float(c) for c in proj])
    return out


def perturb_pair(X: Combing, Y: Combing, seed: int = 0,
                 delta: float = 1e-3, max_retries: int = 8):
    """Replace Y by a nearby field Y' with the same boundary values such
    that the pair (X, Y') is generic for coincidence extraction at both
    signs.  Y is returned unchanged when already generic."""
    from .coincidence import pair_is_generic

    if X.mesh is not Y.mesh:
        raise CombingForgeError("fields live on different meshes")
    if not X.boundary_equal(Y):
        raise CombingForgeError("fields differ on the boundary")
    if pair_is_generic(X, Y):
        return X, Y
    rng = random.Random(seed)
    bdry = X.mesh.cells.boundary_vertices
    schedule = [delta * (2.0 ** ((-1) ** i * (i // 2 + i % 2))) for i in range(max_retries)]
    schedule[0] = delta
    for attempt, step in enumerate(schedule):
        if attempt % 2 == 0:
            # a single rotation applied everywhere: where the fields agree
            # identically this turns the coincidence set into the locus where
            # the field is parallel to the rotation axis, which meets faces
            # transversally, unlike independent per-vertex noise.  The
            # rotation acts in the global chart (conjugated through each
            # vertex's transition) so it stays a single rotation of the
            # field, not one rotation per chart: per-chart copies of the
            # same matrix produce mirror-symmetric perturbations across
            # half-turn transitions, whose coincidence loci degenerate to
            # lines on the straddling faces
            rot = random_small_rotation(rng, step, 10**5)
            vectors = {}
            for v, vec in Y.vectors.items():
                if v in bdry:
                    vectors[v] = vec
                    continue
                frame = Y.frames[v]
                back = Y.mesh.transition(v, GLOBAL_FRAME, frame)
                vectors[v] = mat_vec(back, mat_vec(rot, Y.value(v, GLOBAL_FRAME)))
        else:
            vectors = {}
            for v, vec in Y.vectors.items():
                if v in bdry:
                    vectors[v] = vec
                else:
                    vectors[v] = mat_vec(random_small_rotation(rng, step, 10**5), vec)
        cand = Y.with_vectors(vectors)
        if pair_is_generic(X, cand):
            return X, cand
    raise PerturbationFailed(
        f"no generic perturbation of size about {delta} found in {max_retries} attempts"
    )
