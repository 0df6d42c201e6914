"""Extraction of oriented coincidence links of two vertex-sampled unit
fields, and of the zero link of a generic normal section representing the
relative Euler class.

Per interior face of the mesh, both fields are pushed through one gnomonic
chart (pole = the sum of all six vertex vectors) whose coordinates are
affinely interpolated over the face; the coincidence locus crosses the face
at the unique zero of the difference of the two chart maps.  This makes the
locus PL, makes the symmetry identities of the swap and of global negation
hold exactly, and each tetrahedron is crossed by a straight segment joining
its two crossed faces.
"""

from __future__ import annotations

import random
from fractions import Fraction

from .combing import Combing
from .errors import Degenerate
from .mesh import FramedMesh
from .pllink import Loop, PLLink, Segment
from .ratgeom import E1, E2, E3, Vec3, add, cross, dot, is_zero, mat_vec, random_small_rotation, scale, sub

# Global orientation convention of extracted links: a crossed face is
# outgoing from a tet when the chart crossing sign times the face's
# coefficient in the tet boundary equals this constant.  Linking numbers of
# coincidence links are insensitive to the choice (both links reverse
# together); the value is pinned by the Euler classes of the two twisted
# tube sections, which must be plus/minus the core class matching their
# meridian disk degrees.
CROSSING_SIGN = -1


def _hemisphere_pole(vs, msum):
    """A vector with positive dot product against every vector in ``vs``.

    The sum of the vectors is tried first; when it fails (it can sit exactly
    on the equator of one of the directions), the closest point of the convex
    hull of ``vs`` to the origin is computed exactly.  That point is a valid
    pole whenever an open hemisphere containing all the directions exists;
    otherwise (the origin lies in the hull) None is returned.
    """
    if not is_zero(msum) and all(dot(msum, v) > 0 for v in vs):
        return msum
    uniq = []
    for v in vs:
        if v not in uniq:
            uniq.append(v)
    candidates = [v for v in uniq]
    n = len(uniq)
    for i in range(n):
        u = uniq[i]
        for j in range(i + 1, n):
            d = sub(uniq[j], u)
            dd = dot(d, d)
            if dd == 0:
                continue
            t = -dot(u, d) / dd
            if 0 < t < 1:
                candidates.append(add(u, scale(t, d)))
            for k in range(j + 1, n):
                d2 = sub(uniq[k], u)
                g00, g01, g11 = dot(d, d), dot(d, d2), dot(d2, d2)
                det = g00 * g11 - g01 * g01
                if det == 0:
                    continue
                b0, b1 = -dot(u, d), -dot(u, d2)
                s0 = (b0 * g11 - b1 * g01) / det
                s1 = (b1 * g00 - b0 * g01) / det
                if s0 > 0 and s1 > 0 and s0 + s1 < 1:
                    candidates.append(add(u, add(scale(s0, d), scale(s1, d2))))
    best = None
    for p in candidates:
        if all(dot(p, v) > 0 for v in vs):
            key = (dot(p, p), p)
            if best is None or key < best[0]:
                best = (key, p)
    return None if best is None else best[1]


def _chart_crossing(mesh: FramedMesh, X: Combing, Y: Combing, s: int, face_idx: int):
    """Crossing of the locus {X = s Y} with an interior face.

    Returns None (no crossing) or (lam, sigma): the barycentric coordinates
    over the sorted face vertices and the crossing sign relative to the
    face's canonical (sorted-vertex) orientation.  Raises Degenerate when
    the zero set of the chart difference meets the face non-transversally
    away from structural corners (vertices where the fields coincide
    exactly, e.g. on a shared boundary).
    """
    cells = mesh.cells
    t, f = min(cells.face_slots[face_idx])
    frame = mesh.frame_of_tet(t)
    verts = cells.face_verts[face_idx]
    Xi = [X.value(v, frame) for v in verts]
    Yi = [scale(Fraction(s), Y.value(v, frame)) for v in verts]
    structural = [Xi[k] == Yi[k] for k in range(3)]
    bdry = cells.boundary_vertices
    for k in range(3):
        if structural[k] and verts[k] not in bdry:
            # the locus meets an interior vertex: a perturbation of the
            # second field removes this, unlike coincidences forced on the
            # boundary by compatibility
            raise Degenerate(f"fields coincide at interior vertex {verts[k]}")
    msum = add(add(Xi[0], Xi[1]), add(Xi[2], add(Yi[0], add(Yi[1], Yi[2]))))
    if is_zero(msum) and any(structural):
        # the two fields sum to zero on average yet agree at a vertex
        raise Degenerate(f"chart pole vanishes on face {face_idx}")
    m = _hemisphere_pole(Xi + Yi, msum)
    if m is None:
        # no open hemisphere contains all six sampled directions, so the
        # chart interpolation places no coincidence on this face
        return None
    j = min(range(3), key=lambda i: (abs(m[i]), i))
    a = cross(m, (E1, E2, E3)[j])
    b = cross(m, a)

    def chart(v: Vec3):
        den = dot(m, v)
        return (dot(a, v) / den, dot(b, v) / den)

    D = []
    for k in range(3):
        cx, ex = chart(Xi[k]), chart(Yi[k])
        D.append((cx[0] - ex[0], cx[1] - ex[1]))
    a00, a10 = D[0][0] - D[2][0], D[0][1] - D[2][1]
    a01, a11 = D[1][0] - D[2][0], D[1][1] - D[2][1]
    det = a00 * a11 - a01 * a10
    if det == 0:
        if a00 == a01 == a10 == a11 == 0:
            if D[2] == (0, 0):
                if all(structural):
                    # the face lies in a region where the fields agree
                    # identically (a structural sheet); an infinitesimal
                    # rotation of one field on the region's interior removes
                    # all coincidences there, so the sheet contributes nothing
                    return None
                raise Degenerate(f"fields coincide on all of face {face_idx}")
            return None
        # rank-one affine system: the zero set is a line or empty
        # consistency: rows (a00,a01|-D2x), (a10,a11|-D2y) proportional?
        if a00 * (-D[2][1]) - a10 * (-D[2][0]) != 0 or a01 * (-D[2][1]) - a11 * (-D[2][0]) != 0:
            return None
        # both difference components vanish on the same line psi = 0; read
        # off the sign of psi at the three corners to see where that line
        # meets the face
        p, q, r = ((a00, a01, D[2][0]) if (a00, a01, D[2][0]) != (0, 0, 0)
                   else (a10, a11, D[2][1]))
        corner_vals = (p + r, q + r, r)
        if all(c > 0 for c in corner_vals) or all(c < 0 for c in corner_vals):
            return None
        if all(structural[k] for k in range(3) if corner_vals[k] == 0) and (
            all(c >= 0 for c in corner_vals) or all(c <= 0 for c in corner_vals)
        ):
            # the zero line touches the face only at structural corners
            return None
        raise Degenerate(f"zero set of the chart difference is a line on face {face_idx}")
    l0 = (-D[2][0] * a11 - a01 * -D[2][1]) / det
    l1 = (a00 * -D[2][1] - -D[2][0] * a10) / det
    lam = (l0, l1, 1 - l0 - l1)
    if any(l < 0 for l in lam):
        return None
    if any(l == 0 for l in lam):
        corner = [k for k in range(3) if lam[k] == 1]
        if corner and structural[corner[0]]:
            return None
        raise Degenerate(f"coincidence point on the boundary of face {face_idx}")
    return lam, (1 if det > 0 else -1)


def _tet_point(mesh: FramedMesh, t: int, verts, lam):
    pt = [Fraction(0)] * 4
    tet = mesh.tets[t]
    for k, w in enumerate(verts):
        pt[tet.index(w)] = lam[k]
    return tuple(pt)


def coincidence_link(X: Combing, Y: Combing, sign: int) -> PLLink:
    """The oriented locus {X = sign * Y} in the interior of the mesh, as a
    PL link with one straight segment per crossed tetrahedron."""
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    mesh = X.mesh
    if mesh is not Y.mesh:
        raise Degenerate("fields live on different meshes")
    cells = mesh.cells
    boundary = set(cells.boundary_faces)
    crossings: dict[int, tuple] = {}
    for i in range(len(cells.face_cells)):
        if i in boundary:
            continue
        hit = _chart_crossing(mesh, X, Y, sign, i)
        if hit is not None:
            crossings[i] = hit

    # assemble one segment per tet carrying exactly two crossings
    seg_of_tet: dict[int, tuple] = {}
    for t in range(len(mesh.tets)):
        hits = []
        for f in range(4):
            i = cells.face_index[(t, f)]
            if i in crossings:
                lam, sigma = crossings[i]
                outgoing = sigma * cells.face_slot_sign(t, f) == CROSSING_SIGN
                hits.append((i, f, lam, outgoing))
        if not hits:
            continue
        if len(hits) != 2 or hits[0][3] == hits[1][3]:
            raise Degenerate(f"tet {t} crossed {len(hits)} times or without a through-track")
        inc = hits[0] if not hits[0][3] else hits[1]
        out = hits[0] if hits[0][3] else hits[1]
        seg_of_tet[t] = (
            inc[0],
            out[0],
            _tet_point(mesh, t, cells.face_verts[inc[0]], inc[2]),
            _tet_point(mesh, t, cells.face_verts[out[0]], out[2]),
        )

    loops = []
    used: set[int] = set()
    for start in sorted(seg_of_tet):
        if start in used:
            continue
        segs = []
        t = start
        while True:
            used.add(t)
            face_in, face_out, p_in, p_out = seg_of_tet[t]
            segs.append(Segment(t, p_in, p_out))
            slots = cells.face_slots[face_out]
            others = [ts for ts, fs in slots if ts != t]
            if len(others) != 1:
                # the face may join the tet to itself; pick the slot whose
                # tet expects this face as its entry
                others = [ts for ts, fs in slots
                          if seg_of_tet.get(ts, (None,))[0] == face_out and ts not in used]
                others = others or [ts for ts, fs in slots if ts == t]
            t = others[0]
            if t == start:
                break
            if t in used or t not in seg_of_tet or seg_of_tet[t][0] != face_out:
                raise Degenerate("crossing segments do not chain into loops")
        loops.append(Loop(segs, Fraction(1)))
    link = PLLink(loops)
    link.validate(mesh)
    return link


def pair_is_generic(X: Combing, Y: Combing) -> bool:
    """True when coincidence extraction succeeds for both signs."""
    try:
        coincidence_link(X, Y, 1)
        coincidence_link(X, Y, -1)
    except Degenerate:
        return False
    return True


def euler_zero_chain(X: Combing, sigma: dict[int, Vec3] | None = None,
                     seed: int = 0, max_retries: int = 8,
                     reference: Combing | None = None) -> PLLink:
    """The oriented zero link of a generic section of the plane field
    orthogonal to X extending sigma on the boundary; its homology class is
    the Poincare dual of the relative Euler class.

    The section is the projection of a reference unit field W onto the
    plane field, so its zeros are the two coincidence loci {X = W} and
    {X = -W}, which both inherit the positive coincidence orientation.

    A constant reference interpolates through zero on meshes whose chart
    transitions wind it around the field axis; such hosts must supply an
    explicit reference whose samples stay within a hemisphere of their
    neighbors (escaping through the field axis where the winding forces
    it).  Retries jitter the given reference instead of replacing it.
    """
    mesh = X.mesh
    if sigma is None:
        sigma = X.sigma
    bdry = mesh.cells.boundary_vertices
    rng = random.Random(seed)
    last: Exception | None = None
    for attempt in range(max_retries):
        if reference is not None:
            vectors = {}
            for v in range(mesh.nv):
                if v in bdry:
                    vectors[v] = sigma[v]
                elif attempt == 0:
                    vectors[v] = reference.vectors[v]
                else:
                    rot = random_small_rotation(rng, 0.002 * 2.0 ** attempt, 10**5)
                    vectors[v] = mat_vec(rot, reference.vectors[v])
            W = Combing(mesh, vectors, {v: sigma[v] for v in bdry} or None,
                        dict(reference.frames), check=False)
            try:
                plus = coincidence_link(X, W, 1)
                minus = coincidence_link(X, W, -1)
                return PLLink(plus.loops + minus.loops)
            except Degenerate as exc:
                last = exc
            continue
        if attempt == 0:
            ref = E2
        elif attempt % 2 == 1:
            # a rotated constant reference: any unit field works and a
            # constant one keeps the zero locus geometric rather than noisy
            rot = random_small_rotation(rng, 0.05 * 2.0 ** (attempt // 2), 10**5)
            ref = mat_vec(rot, E2)
        else:
            ref = None
        vectors: dict[int, Vec3] = {}
        for v in range(mesh.nv):
            if v in bdry:
                vectors[v] = sigma[v]
            elif ref is not None:
                vectors[v] = ref
            else:
                rot = random_small_rotation(rng, 0.002 * 2.0 ** attempt, 10**5)
                vectors[v] = mat_vec(rot, E2)
        W = Combing(mesh, vectors, {v: sigma[v] for v in bdry} or None,
                    dict(X.frames), check=False)
        try:
            plus = coincidence_link(X, W, 1)
            minus = coincidence_link(X, W, -1)
            return PLLink(plus.loops + minus.loops)
        except Degenerate as exc:
            last = exc
    raise Degenerate(f"no generic normal section found: {last}")
