"""Exact rational linking numbers of disjoint rationally null-homologous PL
links in a triangulated oriented 3-manifold, plus the signed crossing count
of spherical curves with a fixed meridian arc.

A link is paired against a bounding 2-chain of the other link: the link is
first snapped to a simplicial 1-cycle (one gate vertex per crossed face), a
face chain with that boundary is solved for exactly, and the pairing is the
sum of signed crossings of the second link through the chain's faces plus
its signed crossings through the annulus joining the first link to its
snapped cycle.
"""

from __future__ import annotations

from fractions import Fraction

from .errors import CombingForgeError, Degenerate, LinksIntersect, NotNullHomologous, CurveHitsPole
from .mesh import FramedMesh
from .pllink import PLLink
from .sparselin import LinearSolver

# Global sign of the intersection pairing; pinned so the standard positive
# Hopf pair of tube cores has linking number +1.
INTERSECTION_SIGN = -1


def snap_to_cycle(link: PLLink, mesh: FramedMesh) -> dict[int, Fraction]:
    """Simplicial 1-cycle homologous to the link: per loop, the closed walk
    through the smallest vertex of each crossed face, as edge-cell
    coefficients."""
    cells = mesh.cells
    cycle: dict[int, Fraction] = {}
    for loop in link.loops:
        gates = []
        for seg in loop.segments:
            f = seg.face_of(seg.exit)
            face_idx = cells.face_index[(seg.tet, f)]
            gates.append((seg.tet, min(cells.face_verts[face_idx])))
        n = len(gates)
        for i in range(n):
            w0 = gates[i - 1][1]
            w1 = gates[i][1]
            t = loop.segments[i].tet  # both gate vertices lie on faces of this tet
            if w0 == w1:
                continue
            tet = mesh.tets[t]
            pair = tuple(sorted((tet.index(w0), tet.index(w1))))
            e = cells.edge_index[(t, pair)]
            sign = 1 if w0 < w1 else -1
            cycle[e] = cycle.get(e, Fraction(0)) + sign * loop.multiplicity
        for e in [e for e, c in cycle.items() if c == 0]:
            del cycle[e]
    return cycle


def _boundary1(mesh: FramedMesh, chain2: dict[int, Fraction]) -> dict[int, Fraction]:
    cc = mesh.chain_complex()
    out: dict[int, Fraction] = {}
    for f, c in chain2.items():
        for e, s in cc.bnd[2][f].items():
            out[e] = out.get(e, Fraction(0)) + c * s
    return {e: c for e, c in out.items() if c != 0}


def bounding_chain(cycle: dict[int, Fraction], mesh: FramedMesh) -> dict[int, Fraction]:
    """A face chain with the given boundary, from a cached exact
    factorization of the boundary operator; deterministic."""
    cc = mesh.chain_complex()
    solver = cc.cache.get("d2_solver")
    if solver is None:
        rows: dict[int, dict[int, Fraction]] = {}
        for f in range(cc.dims[2]):
            for e, s in cc.bnd[2][f].items():
                rows.setdefault(e, {})[f] = s
        solver = LinearSolver([rows.get(e, {}) for e in range(cc.dims[1])])
        cc.cache["d2_solver"] = solver
    x = solver.solve(dict(cycle))
    if x is None:
        raise NotNullHomologous("cycle does not bound rationally")
    return {f: c for f, c in x.items() if c != 0}


def _drop0(p):
    return (p[1], p[2], p[3])


def _sub3(a, b):
    return (a[0] - b[0], a[1] - b[1], a[2] - b[2])


def _det3(a, b, c):
    return (a[0] * (b[1] * c[2] - b[2] * c[1])
            - a[1] * (b[0] * c[2] - b[2] * c[0])
            + a[2] * (b[0] * c[1] - b[1] * c[0]))


def _tri_segment_crossing(tri, p, q, end_open: bool):
    """Signed crossing of the oriented segment p->q with the oriented
    triangle (a,b,c), all in barycentric 4-coordinates of one tet.

    Counts interior triangle hits with the parameter in (0,1) -- or (0,1]
    when end_open is False.  Returns 0, the sign, or raises Degenerate on
    non-transverse contact.
    """
    a, b, c = tri
    a3, b3, c3, p3, q3 = _drop0(a), _drop0(b), _drop0(c), _drop0(p), _drop0(q)
    u, v, d = _sub3(b3, a3), _sub3(c3, a3), _sub3(q3, p3)
    det = _det3(u, v, d)
    if det == 0:
        # segment parallel to the triangle plane: contact only if the
        # endpoints meet the plane, treated as non-transverse
        w = _sub3(p3, a3)
        if _det3(u, v, w) == 0:
            raise Degenerate("segment lies in a chain triangle's plane")
        return 0
    # solve a + alpha u + beta v = p + s (q - p)
    w = _sub3(p3, a3)
    alpha = _det3(w, v, d) / det
    beta = _det3(u, w, d) / det
    s = -_det3(u, v, w) / det
    if s <= 0 or s > 1 or (end_open and s == 1):
        return 0
    gamma = 1 - alpha - beta
    if alpha < 0 or beta < 0 or gamma < 0:
        return 0
    if alpha == 0 or beta == 0 or gamma == 0 or (s == 1 and end_open):
        raise Degenerate("segment grazes the edge of a chain triangle")
    return 1 if det < 0 else -1


def _face_pairing(mesh: FramedMesh, chain2: dict[int, Fraction], link: PLLink) -> Fraction:
    """Signed crossings of the link through the faces of a simplicial
    2-chain; each crossing is counted at the segment that ends on the face."""
    cells = mesh.cells
    total = Fraction(0)
    for loop in link.loops:
        for seg in loop.segments:
            f = seg.face_of(seg.exit)
            face_idx = cells.face_index[(seg.tet, f)]
            coeff = chain2.get(face_idx)
            if not coeff:
                continue
            tet = mesh.tets[seg.tet]
            tri = []
            for w in cells.face_verts[face_idx]:
                pt = [Fraction(0)] * 4
                pt[tet.index(w)] = Fraction(1)
                tri.append(tuple(pt))
            sgn = _tri_segment_crossing(tri, seg.entry, seg.exit, end_open=False)
            if sgn == 0:
                raise Degenerate("link exits a face without crossing it")
            total += coeff * loop.multiplicity * sgn * mesh.orientations[seg.tet]
    return total


def _annulus_pairing(mesh: FramedMesh, l1: PLLink, l2: PLLink) -> Fraction:
    """Signed crossings of l2 through the annulus joining l1 to its snapped
    cycle, two triangles per l1 segment inside the segment's tet."""
    cells = mesh.cells
    by_tet: dict[int, list] = {}
    for loop in l2.loops:
        for seg in loop.segments:
            by_tet.setdefault(seg.tet, []).append((seg, loop.multiplicity))
    total = Fraction(0)
    for loop in l1.loops:
        segs = loop.segments
        n = len(segs)
        for i in range(n):
            seg = segs[i]
            if seg.tet not in by_tet:
                continue
            tet = mesh.tets[seg.tet]

            def vertex_point(w):
                pt = [Fraction(0)] * 4
                pt[tet.index(w)] = Fraction(1)
                return tuple(pt)

            f_in = seg.face_of(seg.entry)
            f_out = seg.face_of(seg.exit)
            w_in = min(cells.face_verts[cells.face_index[(seg.tet, f_in)]])
            w_out = min(cells.face_verts[cells.face_index[(seg.tet, f_out)]])
            tris = [(seg.entry, seg.exit, vertex_point(w_out))]
            if w_in != w_out:
                tris.append((seg.entry, vertex_point(w_out), vertex_point(w_in)))
            for other, mult in by_tet[seg.tet]:
                for tri in tris:
                    sgn = _tri_segment_crossing(tri, other.entry, other.exit, end_open=True)
                    if sgn:
                        total += loop.multiplicity * mult * sgn * mesh.orientations[seg.tet]
    return total


def _check_disjoint(mesh: FramedMesh, l1: PLLink, l2: PLLink):
    by_tet: dict[int, list] = {}
    for loop in l2.loops:
        for seg in loop.segments:
            by_tet.setdefault(seg.tet, []).append(seg)
    for loop in l1.loops:
        for seg in loop.segments:
            for other in by_tet.get(seg.tet, ()):  # exact segment-segment test
                p, q = _drop0(seg.entry), _drop0(seg.exit)
                r, s = _drop0(other.entry), _drop0(other.exit)
                d1, d2 = _sub3(q, p), _sub3(s, r)
                w = _sub3(r, p)
                # coplanarity then 2x2 solve in the best coordinate pair
                if _det3(d1, d2, w) != 0:
                    continue
                hit = False
                for i in range(3):
                    for j in range(i + 1, 3):
                        det = d1[i] * (-d2[j]) - (-d2[i]) * d1[j]
                        if det == 0:
                            continue
                        a = (w[i] * (-d2[j]) - (-d2[i]) * w[j]) / det
                        bpar = (d1[i] * w[j] - w[i] * d1[j]) / det
                        if all(p[k] + a * d1[k] == r[k] + bpar * d2[k] for k in range(3)):
                            if 0 <= a <= 1 and 0 <= bpar <= 1:
                                hit = True
                        break
                    else:
                        continue
                    break
                else:
                    # parallel segments on one line
                    hit = any(x == y for x in (p, q) for y in (r, s))
                if hit:
                    raise LinksIntersect(f"links meet inside tet {seg.tet}")


def homology_class_of_link(link: PLLink, mesh: FramedMesh):
    from .homology import HomologyClass

    return HomologyClass(mesh, 1, snap_to_cycle(link, mesh))


def linking_number(l1: PLLink, l2: PLLink, mesh: FramedMesh) -> Fraction:
    """lk(l1, l2): the pairing of a rational 2-chain bounded by l1 with l2."""
    if l1.is_empty() or l2.is_empty():
        return Fraction(0)
    _check_disjoint(mesh, l1, l2)
    if not homology_class_of_link(l2, mesh).is_zero():
        raise NotNullHomologous("second link is not rationally null-homologous")
    c1 = snap_to_cycle(l1, mesh)
    sigma = bounding_chain(c1, mesh)
    total = _face_pairing(mesh, sigma, l2) + _annulus_pairing(mesh, l1, l2)
    return INTERSECTION_SIGN * total


def s2_linking(curve: list[tuple]) -> int:
    """Signed crossings of a closed spherical polyline with the meridian arc
    from -e1 to e1 through e3: the linking of the 0-cycle e1 - (-e1) with
    the curve on the 2-sphere."""
    if not curve:
        return 0
    n = len(curve)
    for pt in curve:
        if pt[1] == 0 and pt[2] <= 0:
            raise CurveHitsPole(f"curve point {pt} lies on the polar great circle arc")
    total = 0
    for i in range(n):
        u, v = curve[i], curve[(i + 1) % n]
        if (u[1] > 0) == (v[1] > 0):
            continue
        # crossing point of the u-v great circle with the y=0 plane
        w = tuple(u[k] * v[1] - v[k] * u[1] for k in range(3))
        # orient w toward the short arc between u and v
        mid = tuple(u[k] + v[k] for k in range(3))
        d = sum(w[k] * mid[k] for k in range(3))
        if d == 0:
            raise CurveHitsPole("curve segment is antipodal across the meridian plane")
        if d < 0:
            w = tuple(-c for c in w)
        if w[2] == 0:
            raise CurveHitsPole("curve crosses the meridian plane at a pole")
        if w[2] > 0:
            total += 1 if v[1] > 0 else -1
    return total
