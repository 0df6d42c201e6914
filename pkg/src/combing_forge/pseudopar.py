"""Computational model of a twisted double trivialization on a framed tube.

The tube N = [a,b] x circle x [-1,1] carries two vector-bundle charts: an
exterior chart `e` defined off the tube and an interior chart `d`, equal to
`e` on the whole tube boundary except the face {b} x circle x [-1,1], where
they differ by the rotation about e1 of angle pi + theta(u).  Here theta is
an odd increasing profile from -pi to pi, constant at +-pi on collars of
u = +-1.  A second interior chart `g` differs from `d` by a rotation-valued
map F on the square [a,b] x [-1,1] with prescribed collar values; F exists
because the prescribed boundary loop lifts to a closed loop of unit
quaternions, and it is filled here by spherical relaxation on a grid.

The two distinguished sections are the first chart vectors: E1d is e1 in the
d-chart, E1g is R_{e1,-pi-theta(u)} F(t,u) e1 in the d-chart; both equal the
exterior e1 outside the tube.  The module computes the sections as sampled
fields on a host mesh, the exceptional locus {E1d = -E1g} (parallels of the
tube core), the winding degrees of the exterior second vector around tube
meridians in either interior chart, and the spherical curve traced by a
field along the exceptional parallels.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import (
    CombingForgeError,
    CurveHitsPole,
    DegenerateZeroSet,
    LiftObstruction,
)
from .mesh import GLOBAL_FRAME, IDENTITY3, FramedMesh
from .ratgeom import Vec3, dot, is_zero, mat_vec, neg, rationalize_unit, vec3
from .combing import E1, E2, Combing
from .pllink import PLLink
from .builders import Assembler, _tube_info, vertical_circle

# Exact rotations about e1 by quarter turns, indexed by the turn count.
_QUARTER_TURNS = {
    0: IDENTITY3,
    1: ((Fraction(1), Fraction(0), Fraction(0)),
        (Fraction(0), Fraction(0), Fraction(-1)),
        (Fraction(0), Fraction(1), Fraction(0))),
    2: ((Fraction(1), Fraction(0), Fraction(0)),
        (Fraction(0), Fraction(-1), Fraction(0)),
        (Fraction(0), Fraction(0), Fraction(-1))),
    3: ((Fraction(1), Fraction(0), Fraction(0)),
        (Fraction(0), Fraction(0), Fraction(1)),
        (Fraction(0), Fraction(-1), Fraction(0))),
}

RELAX_TOL = 1e-10


def theta_profile(u: float, eps: float) -> float:
    """Odd increasing profile [-1,1] -> [-pi,pi], constant +-pi on the
    eps-collars of +-1, realized as an odd clamped smoothstep.

    Exact quarter values: theta(+-(1-eps)/2) = +-pi/2.
    """
    s = u / (1.0 - eps)
    if s >= 1.0:
        return math.pi
    if s <= -1.0:
        return -math.pi
    m = abs(s)
    return math.copysign(math.pi * (3.0 * m * m - 2.0 * m * m * m), s)


# -- host meshes -------------------------------------------------------------

def _disk3_tris(p: int):
    """Graded disk with three rings: center 0, rings 1..p, p+1..2p,
    2p+1..3p.  Returns (inner triangles, outer annulus triangles) where the
    inner part (fan plus first annulus) is the tube cross-section."""
    inner, outer = [], []
    for i in range(p):
        j = (i + 1) % p
        r1i, r1j = 1 + i, 1 + j
        r2i, r2j = 1 + p + i, 1 + p + j
        r3i, r3j = 1 + 2 * p + i, 1 + 2 * p + j
        inner.append((0, r1i, r1j))
        inner.append((r1i, r2i, r2j))
        inner.append((r1i, r2j, r1j))
        outer.append((r2i, r3i, r3j))
        outer.append((r2i, r3j, r2j))
    return inner, outer


def _square_ring_positions(a: Fraction, b: Fraction, eps: Fraction):
    """Positions of the 8 cross-section boundary samples on the boundary of
    the square [a,b] x [-1,1], ordered around the square.  The b-side gets
    five samples at u = -1, -(1-eps)/2, 0, (1-eps)/2, 1 where the chart
    rotation angle pi + theta(u) is an exact quarter turn; the turn counts
    are returned alongside."""
    mid_t = (a + b) / 2
    uq = (1 - eps) / 2
    positions = [
        (b, Fraction(-1)),  # angle 0
        (b, -uq),           # angle pi/2
        (b, Fraction(0)),   # angle pi
        (b, uq),            # angle 3pi/2
        (b, Fraction(1)),   # angle 2pi
        (mid_t, Fraction(1)),
        (a, Fraction(0)),
        (mid_t, Fraction(-1)),
    ]
    turns = [0, 1, 2, 3, 0, 0, 0, 0]
    return positions, turns


_RING_P = 8  # cross-section boundary samples; fixed by the exact-turn layout


def _cross_section_coords(a: Fraction, b: Fraction, eps: Fraction,
                          center: tuple[Fraction, Fraction] | None = None):
    """Square coordinates (t,u) for the tube cross-section vertices:
    center 0, inner ring 1..p, boundary ring p+1..2p.  Returns (coords dict
    base-vertex -> (t,u), turn counts on the boundary ring).

    The center vertex should sit next to (but not on) the zero of the
    transverse field: the sampled disk map then sends it near the antipode
    of the boundary value and the coarse inner ring captures the full
    winding.  Callers that know the zero pass it as center; the default is
    a generic off-symmetry point."""
    p = _RING_P
    ring, turns = _square_ring_positions(a, b, eps)
    if center is None:
        center = (a + (b - a) * Fraction(9, 16), Fraction(1, 8))
    coords = {0: center}
    # the inner ring stays at 2/5 scale so every sample lies strictly
    # inside the collar bands, where the filling actually varies
    scale = Fraction(2, 5)
    for i in range(p):
        t2, u2 = ring[i]
        coords[1 + p + i] = (t2, u2)
        coords[1 + i] = (center[0] + (t2 - center[0]) * scale,
                         center[1] + (u2 - center[1]) * scale)
    return coords, turns


def tube_host(layers: int = 3, closed: bool = False,
              a: Fraction = Fraction(0), b: Fraction = Fraction(1),
              eps: Fraction = Fraction(1, 4),
              collar_layers: int = 2,
              center: tuple[Fraction, Fraction] | None = None) -> FramedMesh:
    """Host mesh for the twisted-chart model.

    The tube N is a product solid torus over the inner disk (center plus two
    rings) of a three-ring cross-section; its tets form region "N" carrying
    frame "d".  With closed=False the host is the full three-ring solid
    torus with region "ext" outside the tube.  With closed=True the host is
    the genus-1 Heegaard sphere: tube exterior ring, a torus collar "W" and
    a second solid torus "A2" whose meridian is attached to the tube
    longitude, exactly as in the two-tube sphere builder.

    Chart transitions live on the tube boundary ring: exact quarter-turn
    rotations about e1 on the five b-side columns, the identity elsewhere.
    Interior tube vertices carry identity transitions so fields sampled in
    the global frame restrict to the d-chart unchanged; the twist is
    carried entirely by the boundary ring.
    """
    p = _RING_P
    asm = Assembler()
    inner, outer = _disk3_tris(p)
    k1 = lambda vb, k: ("A1", vb, k)
    prisms_inner = asm.add_product(inner, layers, True, k1, "N")
    regions_meta = None
    if not closed:
        asm.add_product(outer, layers, True, k1, "ext")
        mesh_args = dict(allow_boundary=True)
    else:
        asm.add_product(outer, layers, True, k1, "A1ext")
        bdry1 = sorted(asm.open_faces())
        base_keys = [tuple(asm.id_to_key[v] for v in tri) for tri in bdry1]
        kw = lambda bk, l: bk if l == 0 else ("W", bk, l)
        asm.add_product(base_keys, collar_layers, False, kw, "W")
        q = layers
        k2 = lambda vb, i: (
            ("W", ("A1", 1 + 2 * p + i, vb - (1 + q)), collar_layers)
            if vb >= 1 + q
            else ("A2", vb, i)
        )
        from .builders import disk_base

        prisms2 = asm.add_product(disk_base(q), p, True, k2, "A2")
        asm.add_flip_tets("W")
        if asm.open_faces():
            raise CombingForgeError("tube host assembly left unmatched faces")
        mesh_args = dict(allow_boundary=False)
        regions_meta = ("A2", prisms2, q)

    coords, turns = _cross_section_coords(a, b, eps, center)
    # rebuild the mesh with frames and transitions
    mesh = asm.finish(**mesh_args)
    frames = {name: GLOBAL_FRAME for name in mesh.regions}
    frames["N"] = "d"
    transitions = {}
    square_coords = {}
    for k in range(layers):
        for vb, (t, u) in coords.items():
            vid = asm.key_to_id[k1(vb, k)]
            square_coords[vid] = (t, u)
            if vb > p:  # boundary ring: the chart twist
                transitions[(vid, "d", GLOBAL_FRAME)] = _QUARTER_TURNS[turns[vb - p - 1]]
            else:  # interior tube vertices: charts agree
                transitions[(vid, "d", GLOBAL_FRAME)] = IDENTITY3
    mesh = FramedMesh(mesh.nv, mesh.tets, mesh.orientations, mesh.face_glue,
                      mesh.regions, frames, transitions)
    problems = mesh.validate_manifold()
    if problems:
        raise CombingForgeError("tube host invalid: " + "; ".join(problems))
    mesh.meta["vertex_keys"] = list(asm.id_to_key)
    mesh.meta["square_coords"] = square_coords
    mesh.meta["cross_section_coords"] = coords
    mesh.meta["cross_section_turns"] = turns
    mesh.meta["products"] = {"N": _tube_info(prisms_inner, p, layers, k1, asm)}
    if regions_meta is not None:
        name, prisms2, q = regions_meta
        mesh.meta["products"][name] = _tube_info(prisms2, q, p, k2, asm)
    mesh.meta["tube_params"] = {"a": a, "b": b, "eps": eps, "layers": layers,
                                "closed": closed}
    return mesh


# -- the model ---------------------------------------------------------------

@dataclass
class TwistedChartModel:
    """Grid model of the twisted double trivialization on the tube.

    theta_samples tabulates the profile on the u-grid; quats is the
    grid_t x grid_u array of unit quaternions lifting the rotation field F.
    The host mesh carries region "N" (the tube, chart d) and the
    cross-section square coordinates of its vertices.  empty=True models a
    trivial tube (no twist): both sections are the constant e1 field and the
    exceptional locus is empty.
    """
    a: Fraction
    b: Fraction
    eps: Fraction
    grid_t: int
    grid_u: int
    theta_samples: list
    quats: list
    host: FramedMesh
    closed: bool
    empty: bool = False
    diagnostics: dict = field(default_factory=dict)

    def theta(self, u: float) -> float:
        return theta_profile(float(u), float(self.eps))

    # -- grid access --------------------------------------------------------

    def _grid_uv(self, t: float, u: float):
        a, b = float(self.a), float(self.b)
        x = (t - a) / (b - a) * (self.grid_t - 1)
        y = (u + 1.0) / 2.0 * (self.grid_u - 1)
        return x, y

    def quat_at(self, t: float, u: float):
        """Bilinear, sign-aligned interpolation of the quaternion grid."""
        x, y = self._grid_uv(float(t), float(u))
        i = min(max(int(math.floor(x)), 0), self.grid_t - 2)
        j = min(max(int(math.floor(y)), 0), self.grid_u - 2)
        fx, fy = x - i, y - j
        corners = [self.quats[i][j], self.quats[i + 1][j],
                   self.quats[i][j + 1], self.quats[i + 1][j + 1]]
        ref = corners[0]
        aligned = []
        for q in corners:
            d = sum(r * c for r, c in zip(ref, q))
            aligned.append(tuple(-c for c in q) if d < 0 else q)
        w = [(1 - fx) * (1 - fy), fx * (1 - fy), (1 - fx) * fy, fx * fy]
        s = [sum(w[k] * aligned[k][c] for k in range(4)) for c in range(4)]
        n = math.sqrt(sum(c * c for c in s))
        if n < 1e-9:
            raise DegenerateZeroSet("quaternion interpolation degenerates")
        return tuple(c / n for c in s)

    def F_e1(self, t: float, u: float):
        """The rotation field applied to e1 (floats)."""
        w, x, y, z = self.quat_at(t, u)
        return (1.0 - 2.0 * (y * y + z * z),
                2.0 * (x * y + w * z),
                2.0 * (x * z - w * y))

    def g_section_value(self, t: float, u: float):
        """E1g at square point (t,u) in d-chart coordinates (floats):
        R_{e1,-pi-theta(u)} F(t,u) e1."""
        gx, gy, gz = self.F_e1(t, u)
        phi = -math.pi - self.theta(u)
        c, s = math.cos(phi), math.sin(phi)
        return (gx, gy * c - gz * s, gy * s + gz * c)


def _collar_angle(t: float, u: float, a: float, b: float, eps: float):
    """Continuous lift angle phi of the prescribed collar rotation
    R_{e1,phi}, or None off the collar bands.  The branch is chosen so the
    quaternion (cos(phi/2), sin(phi/2) e1) is continuous across band
    overlaps: 0 on the bottom band, pi+theta on the left band, 2pi on the
    top band, 3pi-theta (= -pi-theta mod 4pi) on the right band.

    The left and bottom bands are pinned slightly wider than required (the
    collar conditions are one-sided, so extending the prescribed values
    inward is a valid choice of filling); this breaks the square's two
    reflection symmetries and moves the zero of F e1 + e1 off the symmetry
    point, where it would degenerate every grid and mesh chart.
    """
    th = theta_profile(u, eps)
    if t <= a + 1.15 * eps:
        return math.pi + th
    if t >= b - eps:
        return 3.0 * math.pi - th
    if u >= 1.0 - eps:
        return 2.0 * math.pi
    if u <= -1.0 + 1.1 * eps:
        return 0.0
    return None


def boundary_lift_parity(a: float = 0.0, b: float = 1.0, eps: float = 0.25,
                         samples: int = 512, corrupt: bool = False) -> int:
    """Walks the prescribed rotation loop around the square boundary and
    returns +1 when its continuous angle accumulates an even multiple of
    2pi (the quaternion lift closes), -1 otherwise.

    corrupt=True inserts an extra full turn about e1 along the top edge:
    the rotation loop stays continuous but its class flips, so the lift no
    longer closes.
    """
    angles = []
    # the loop: left edge up, top edge right, right edge down, bottom left
    for k in range(samples + 1):
        angles.append(math.pi + theta_profile(-1.0 + 2.0 * k / samples, eps))
    for k in range(samples + 1):
        s = k / samples
        extra = 2.0 * math.pi * (3 * s * s - 2 * s ** 3) if corrupt else 0.0
        angles.append(2.0 * math.pi + extra)
    for k in range(samples + 1):
        angles.append(-math.pi - theta_profile(1.0 - 2.0 * k / samples, eps))
    for _ in range(samples + 1):
        angles.append(0.0)
    total = 0.0
    for i in range(1, len(angles)):
        d = angles[i] - angles[i - 1]
        while d > math.pi:
            d -= 2.0 * math.pi
        while d < -math.pi:
            d += 2.0 * math.pi
        total += d
    turns = round(total / (2.0 * math.pi))
    return 1 if turns % 2 == 0 else -1


def _relax_grid(a: float, b: float, eps: float, grid_t: int, grid_u: int):
    """Quaternion grid with prescribed collar bands, interior filled by
    normalized neighbor averaging to RELAX_TOL."""
    import numpy as np

    ts = [a + (b - a) * i / (grid_t - 1) for i in range(grid_t)]
    us = [-1.0 + 2.0 * j / (grid_u - 1) for j in range(grid_u)]
    q = np.zeros((grid_t, grid_u, 4))
    fixed = np.zeros((grid_t, grid_u), dtype=bool)
    for i, t in enumerate(ts):
        for j, u in enumerate(us):
            phi = _collar_angle(t, u, a, b, eps)
            if phi is not None:
                q[i, j] = (math.cos(phi / 2), math.sin(phi / 2), 0.0, 0.0)
                fixed[i, j] = True
            else:
                # off the rotations-about-e1 circle, so the relaxation can
                # reach the nontrivial filling instead of collapsing in the
                # circle's plane, where no continuous filling exists
                q[i, j] = (0.0, 0.0, 1.0, 0.0)
    for sweep in range(200000):
        s = np.zeros_like(q)
        s[1:-1, 1:-1] = (q[:-2, 1:-1] + q[2:, 1:-1]
                         + q[1:-1, :-2] + q[1:-1, 2:])
        flip = (s * q).sum(axis=2) < 0
        s[flip] = -s[flip]
        norms = np.sqrt((s * s).sum(axis=2, keepdims=True))
        norms[norms == 0] = 1.0
        s /= norms
        s[fixed] = q[fixed]
        delta = np.abs(s - q).max()
        q = s
        if delta < RELAX_TOL:
            break
    else:
        raise CombingForgeError("grid relaxation did not converge")
    # hemisphere continuity of the converged lift
    if ((q[:-1, :] * q[1:, :]).sum(axis=2) <= 0).any() or \
       ((q[:, :-1] * q[:, 1:]).sum(axis=2) <= 0).any():
        raise DegenerateZeroSet("adjacent grid lifts farther than a hemisphere")
    return ts, us, [[tuple(q[i, j]) for j in range(grid_u)] for i in range(grid_t)]


def build_model(a: Fraction = Fraction(0), b: Fraction = Fraction(1),
                eps: Fraction = Fraction(1, 4), grid_t: int = 24,
                grid_u: int = 24, layers: int = 3, closed: bool = False,
                corrupt: bool = False,
                host: FramedMesh | None = None) -> TwistedChartModel:
    """Builds the grid model: profile samples, lift parity check, relaxed
    quaternion field and host mesh.

    Raises LiftObstruction when the prescribed collar rotation loop does
    not lift to a closed quaternion loop (for instance with corrupt=True),
    since no continuous filling exists then.
    """
    if not Fraction(0) < eps < Fraction(1, 2):
        raise CombingForgeError("eps must lie in (0, 1/2)")
    if grid_t < 5 or grid_u < 5:
        raise CombingForgeError("grid too coarse for the collar bands")
    af, bf, ef = float(a), float(b), float(eps)
    if boundary_lift_parity(af, bf, ef, corrupt=corrupt) != 1:
        raise LiftObstruction(
            "collar rotation loop lifts to a non-closed quaternion loop")
    ts, us, quats = _relax_grid(af, bf, ef, grid_t, grid_u)
    theta_samples = [theta_profile(u, ef) for u in us]
    model = TwistedChartModel(a=a, b=b, eps=eps, grid_t=grid_t,
                              grid_u=grid_u, theta_samples=theta_samples,
                              quats=quats, host=host, closed=closed)
    if host is None:
        # aim the cross-section center at the first transverse root so the
        # sampled disk map carries the section's winding; keep the center
        # a little off the root itself so the root stays inside an open
        # fan triangle rather than on the 1-skeleton
        center = None
        roots = _grid_roots(model)
        if roots:
            rt, ru, _ = roots[0]
            center = (Fraction(round(rt * 64) + 1, 64),
                      Fraction(round(ru * 64), 64) + Fraction(3, 128))
        model.host = tube_host(layers=layers, closed=closed, a=a, b=b,
                               eps=eps, center=center)
    model.diagnostics["lift_parity"] = 1
    return model


def build_empty_model(p: int = 3, layers: int = 3) -> TwistedChartModel:
    """Degenerate model with no twisted tube: the host is a plain solid
    torus, both sections are the constant e1 field, the exceptional locus
    is empty."""
    from .builders import solid_torus

    host = solid_torus(p, layers)
    return TwistedChartModel(a=Fraction(0), b=Fraction(1), eps=Fraction(1, 4),
                             grid_t=0, grid_u=0, theta_samples=[], quats=[],
                             host=host, closed=False, empty=True)


# -- sections ----------------------------------------------------------------

def _tube_vertex_frames(host: FramedMesh) -> dict[int, str]:
    """Per-vertex frames: chart d at tube-interior vertices (center and
    inner ring columns), the global frame elsewhere."""
    info = host.meta["products"]["N"]
    frames = {v: GLOBAL_FRAME for v in range(host.nv)}
    for vid in info["center"]:
        frames[vid] = "d"
    for col in info["mid"]:
        for vid in col:
            frames[vid] = "d"
    return frames


def _host_sigma(host: FramedMesh):
    bdry = host.cells.boundary_vertices
    return {v: E2 for v in bdry} if bdry else None


def siamese_sections(model: TwistedChartModel) -> tuple[Combing, Combing]:
    """The two section fields as sampled combings on the host mesh.

    E1d is e1 in every chart (the chart rotations fix the e1 axis).  E1g
    equals e1 outside the open tube and R_{e1,-pi-theta(u)} F(t,u) e1 in
    d-chart coordinates at tube-interior vertices, rationalized to exact
    unit vectors.
    """
    host = model.host
    sigma = _host_sigma(host)
    if model.empty:
        e1d = Combing(host, {v: E1 for v in range(host.nv)}, sigma)
        return e1d, Combing(host, dict(e1d.vectors), sigma)
    frames = _tube_vertex_frames(host)
    e1d = Combing(host, {v: E1 for v in range(host.nv)}, sigma, frames)
    coords = host.meta["square_coords"]
    vectors = {v: E1 for v in range(host.nv)}
    for v, frame in frames.items():
        if frame == "d":
            t, u = coords[v]
            vectors[v] = rationalize_unit(model.g_section_value(t, u))
    e1g = Combing(host, vectors, sigma, frames)
    return e1d, e1g


def exterior_second_reference(model: TwistedChartModel) -> Combing:
    """A reference extension of the exterior second vector e2 into the tube,
    suitable for euler zero chains on the twisted host.

    In d-chart coordinates the tube boundary ring carries the chart images
    of e2, which wind once around the e1 axis along a meridian; a unit
    extension must therefore escape through the e1 pole.  The inner ring
    carries the winding lifted halfway to the pole and the center column a
    near-pole value, kept off the exact axis so coincidence loci with
    axis-aligned fields stay transverse.
    """
    host = model.host
    if model.empty:
        return Combing(host, {v: E2 for v in range(host.nv)},
                       _host_sigma(host), check=False)
    frames = _tube_vertex_frames(host)
    info = host.meta["products"]["N"]
    turns = host.meta["cross_section_turns"]
    vectors = {v: E2 for v in range(host.nv)}
    for i in range(_RING_P):
        alpha = turns[i] * math.pi / 2.0
        tilt = (1.0, math.cos(alpha), math.sin(alpha))
        for vid in info["mid"][i]:
            vectors[vid] = rationalize_unit(tilt)
    near_pole = rationalize_unit((1.0, 0.21, 0.073))
    for vid in info["center"]:
        vectors[vid] = near_pole
    return Combing(host, vectors, _host_sigma(host), frames, check=False)


def example_model_field(model: TwistedChartModel) -> Combing:
    """A compatible field for bracket computations: the constant e1 field
    away from the tube (matching both sections there and on the boundary),
    sweeping e1 -> e2 -> -e1 across the tube cross-section in d-chart
    coordinates, so its coincidence loci with the sections are nonempty and
    transverse after the generic perturbation."""
    host = model.host
    sigma = _host_sigma(host)
    if model.empty:
        return Combing(host, {v: E1 for v in range(host.nv)}, sigma)
    frames = _tube_vertex_frames(host)
    info = host.meta["products"]["N"]
    vectors = {v: E1 for v in range(host.nv)}
    for vid in info["center"]:
        vectors[vid] = neg(E1)
    for col in info["mid"]:
        for vid in col:
            vectors[vid] = E2
    return Combing(host, vectors, sigma, frames, check=False)


# -- exceptional locus -------------------------------------------------------

def _grid_roots(model: TwistedChartModel):
    """Roots of F e1 = -e1 on the square by per-cell Newton iteration on
    the bilinear interpolants of the transverse coordinates (y,z) of F e1,
    restricted to cells where the first coordinate is negative."""
    nt, nu = model.grid_t, model.grid_u
    af, bf = float(model.a), float(model.b)
    g = [[model.F_e1(af + (bf - af) * i / (nt - 1), -1.0 + 2.0 * j / (nu - 1))
          for j in range(nu)] for i in range(nt)]
    roots = []
    for i in range(nt - 1):
        for j in range(nu - 1):
            cell = [g[i][j], g[i + 1][j], g[i][j + 1], g[i + 1][j + 1]]
            ys = [c[1] for c in cell]
            zs = [c[2] for c in cell]
            if min(ys) > 0 or max(ys) < 0 or min(zs) > 0 or max(zs) < 0:
                continue
            if min(c[0] for c in cell) > 0:
                continue
            # Newton on the bilinear maps y(s,w), z(s,w) over the unit cell
            s = w = 0.5
            ok = False
            for _ in range(60):
                def bil(vals):
                    return (vals[0] * (1 - s) * (1 - w) + vals[1] * s * (1 - w)
                            + vals[2] * (1 - s) * w + vals[3] * s * w)

                def dbs(vals):
                    return ((vals[1] - vals[0]) * (1 - w) + (vals[3] - vals[2]) * w)

                def dbw(vals):
                    return ((vals[2] - vals[0]) * (1 - s) + (vals[3] - vals[1]) * s)

                fy, fz = bil(ys), bil(zs)
                jac = [[dbs(ys), dbw(ys)], [dbs(zs), dbw(zs)]]
                det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0]
                if abs(det) < 1e-12:
                    raise DegenerateZeroSet(
                        "transverse coordinates have a singular cell Jacobian")
                ds = (-fy * jac[1][1] + fz * jac[0][1]) / det
                dw = (-fz * jac[0][0] + fy * jac[1][0]) / det
                s, w = s + ds, w + dw
                if abs(ds) < 1e-13 and abs(dw) < 1e-13:
                    ok = True
                    break
            if not ok or not (-1e-6 <= s <= 1 + 1e-6) or not (-1e-6 <= w <= 1 + 1e-6):
                continue
            t = af + (bf - af) * (i + s) / (nt - 1)
            u = -1.0 + 2.0 * (j + w) / (nu - 1)
            gx = (cellx := [c[0] for c in cell])[0] * (1 - s) * (1 - w) \
                + cellx[1] * s * (1 - w) + cellx[2] * (1 - s) * w + cellx[3] * s * w
            if gx > -0.5:
                raise DegenerateZeroSet(
                    "transverse root does not point along -e1")
            sign = 1 if det > 0 else -1
            roots.append((t, u, sign))
    # a root on or next to a shared cell edge is found by both cells:
    # merge coincident roots, which must agree in sign
    tol = max((bf - af) / (nt - 1), 2.0 / (nu - 1)) * 1e-3
    merged: list[tuple[float, float, int]] = []
    for t, u, sign in sorted(roots):
        for t2, u2, sign2 in merged:
            if abs(t - t2) < tol and abs(u - u2) < tol:
                if sign != sign2:
                    raise DegenerateZeroSet(
                        "coincident transverse roots with opposite signs")
                break
        else:
            merged.append((t, u, sign))
    return merged


def _locate_cross_section(model: TwistedChartModel, t: float, u: float):
    """The cross-section triangle containing the square point and its
    rational barycentric coordinates (small denominators, interior)."""
    host = model.host
    coords = {vb: (float(x), float(y))
              for vb, (x, y) in host.meta["cross_section_coords"].items()}
    inner, _ = _disk3_tris(_RING_P)
    best = None
    for tri in inner:
        (x0, y0), (x1, y1), (x2, y2) = (coords[v] for v in tri)
        det = (x1 - x0) * (y2 - y0) - (x2 - x0) * (y1 - y0)
        if abs(det) < 1e-12:
            continue
        l1 = ((t - x0) * (y2 - y0) - (u - y0) * (x2 - x0)) / det
        l2 = ((u - y0) * (x1 - x0) - (t - x0) * (y1 - y0)) / det
        l0 = 1.0 - l1 - l2
        m = min(l0, l1, l2)
        if best is None or m > best[0]:
            best = (m, tri, (l0, l1, l2))
    m, tri, lams = best
    if m < 1e-6:
        raise DegenerateZeroSet("exceptional point lies on the cross-section "
                                "1-skeleton")
    # rational interior approximation, ordered to match the sorted triangle
    order = sorted(range(3), key=lambda k: tri[k])
    l0 = Fraction(lams[order[0]]).limit_denominator(128)
    l1 = Fraction(lams[order[1]]).limit_denominator(128)
    l2 = 1 - l0 - l1
    if min(l0, l1, l2) <= 0:
        raise DegenerateZeroSet("exceptional point too close to the "
                                "cross-section 1-skeleton")
    return tuple(sorted(tri)), (l0, l1, l2)


def exceptional_link(model: TwistedChartModel) -> PLLink:
    """The locus {E1d = -E1g} as parallels of the tube core.

    Since every chart rotation fixes the e1 axis, the locus is exactly
    {F e1 = -e1} x circle; the square roots are isolated on the grid and
    each yields the vertical circle over its cross-section point, oriented
    by the sign of the transverse root index so that the link class equals
    half the difference of the section Euler classes (it agrees with the
    coincidence orientation of the sampled sections).
    """
    if model.empty:
        return PLLink([])
    loops = []
    for t, u, sign in _grid_roots(model):
        tri, lam = _locate_cross_section(model, t, u)
        circ = vertical_circle(model.host, "N", lam=lam, tri=tri,
                               reverse=(sign > 0))
        loops.extend(circ.loops)
    link = PLLink(loops)
    link.validate(model.host)
    return link


# -- meridian degrees --------------------------------------------------------

def meridian_degree(model: TwistedChartModel, which: str = "d",
                    samples: int = 2048) -> int:
    """Winding number of the exterior second vector around a tube meridian,
    expressed in the requested interior chart.

    The meridian bounds a cross-section square; along it the exterior and
    interior charts agree except on the b-side, where the interior
    coordinates of the exterior e2 are R_{e1,-pi-theta(u)} e2 (chart d) or
    R_{e1,pi+theta(u)} e2 (chart g).  The meridian is oriented to traverse
    the b-side with u decreasing.
    """
    if which not in ("d", "g"):
        raise CombingForgeError("chart must be 'd' or 'g'")
    if model.empty:
        return 0
    sgn = -1.0 if which == "d" else 1.0
    ef = float(model.eps)
    total = 0.0
    prev = sgn * (math.pi + theta_profile(1.0, ef))
    for k in range(1, samples + 1):
        u = 1.0 - 2.0 * k / samples
        phi = sgn * (math.pi + theta_profile(u, ef))
        d = phi - prev
        while d > math.pi:
            d -= 2.0 * math.pi
        while d < -math.pi:
            d += 2.0 * math.pi
        total += d
        prev = phi
    # the three other sides carry the constant e2: no further winding
    return round(total / (2.0 * math.pi))


# -- the spherical correction curve ------------------------------------------

def correction_curve(model: TwistedChartModel, X: Combing) -> list[list[Vec3]]:
    """The field X along each exceptional parallel, in d-chart coordinates:
    one closed polyline of (unnormalized) direction samples per component,
    ready for the spherical linking count against the e1 axis.

    Raises CurveHitsPole when a sample is parallel to the e1 axis (its
    transverse part vanishes), since the spherical count is then undefined.
    """
    if X.mesh is not model.host:
        raise CombingForgeError("field lives on a different mesh")
    link = exceptional_link(model)
    curves = []
    for loop in link.loops:
        pts = []
        for seg in loop.segments:
            tet = model.host.tets[seg.tet]
            for lam in (seg.entry, _bary_mid(seg.entry, seg.exit)):
                val = vec3(0, 0, 0)
                for v, c in zip(tet, lam):
                    if c:
                        w = X.value(v, "d")
                        val = (val[0] + c * w[0], val[1] + c * w[1],
                               val[2] + c * w[2])
                if val[1] == 0 and val[2] == 0:
                    raise CurveHitsPole(
                        "field is parallel to the e1 axis on the "
                        "exceptional locus")
                pts.append(val)
        if loop.multiplicity < 0:
            pts.reverse()
        curves.append(pts)
    return curves


def _bary_mid(a, b):
    return tuple((x + y) / 2 for x, y in zip(a, b))
