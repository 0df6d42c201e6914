"""Mesh-level operations: boundary identifications, gluing, barycentric
refinement, and standalone extraction of regions."""

from __future__ import annotations

from .errors import (
    CombingForgeError,
    IdentificationNotBijective,
    OrientationIncompatible,
)
from .mesh import FramedMesh, GLOBAL_FRAME, sort_sign


class BoundaryIdentification:
    """Vertex bijection between a boundary component of one mesh and a
    boundary component of another, required to be simplicial and to reverse
    the induced boundary orientations (checked when gluing)."""

    def __init__(self, vertex_map: dict[int, int]):
        self.vertex_map = dict(vertex_map)
        if len(set(self.vertex_map.values())) != len(self.vertex_map):
            raise IdentificationNotBijective("vertex map is not injective")

    def inverse(self) -> "BoundaryIdentification":
        return BoundaryIdentification({v: k for k, v in self.vertex_map.items()})


def glue(outside: FramedMesh, patch: FramedMesh, h: BoundaryIdentification) -> FramedMesh:
    """M(B/A)-style gluing: attach `patch` to `outside` along the boundary
    identified by h (outside boundary vertex -> patch boundary vertex).

    Vertex ids of `outside` survive unchanged; interior patch vertices get
    fresh ids.  The output records `outside_tet_map` / `patch_tet_map` in
    its meta dict.
    """
    vm = h.vertex_map
    out_bdry = outside.cells.boundary_vertices
    patch_bdry = patch.cells.boundary_vertices
    if not set(vm).issubset(out_bdry):
        raise IdentificationNotBijective("map domain is not contained in the boundary")
    if set(vm.values()) != patch_bdry:
        raise IdentificationNotBijective("map does not cover the patch boundary vertices")

    inv = {v: k for k, v in vm.items()}
    new_id: dict[int, int] = {}
    next_id = outside.nv
    for v in range(patch.nv):
        if v in inv:
            new_id[v] = inv[v]
        else:
            new_id[v] = next_id
            next_id += 1

    tets = list(outside.tets)
    orientations = list(outside.orientations)
    glue_pairs = list(outside.face_glue)
    off = len(tets)
    for t, tet in enumerate(patch.tets):
        tets.append(tuple(new_id[v] for v in tet))
        orientations.append(patch.orientations[t])
    for (t1, f1), (t2, f2) in patch.face_glue:
        glue_pairs.append(((t1 + off, f1), (t2 + off, f2)))

    # pair remaining boundary faces by vertex-id triples
    used = {s for pair in glue_pairs for s in pair}
    open_out: dict[tuple[int, ...], tuple[int, int]] = {}
    for t in range(off):
        for f in range(4):
            if (t, f) not in used:
                key = tuple(sorted(tets[t][i] for i in range(4) if i != f))
                if set(key).issubset(set(vm)):
                    if key in open_out:
                        raise IdentificationNotBijective(f"ambiguous outside face {key}")
                    open_out[key] = (t, f)
    matched = 0
    for t in range(off, len(tets)):
        for f in range(4):
            if (t, f) in used:
                continue
            key = tuple(sorted(tets[t][i] for i in range(4) if i != f))
            slot = open_out.pop(key, None)
            if slot is None:
                raise IdentificationNotBijective(
                    f"patch boundary face {key} has no partner under the identification"
                )
            glue_pairs.append((slot, (t, f)))
            matched += 1
    if matched == 0:
        raise IdentificationNotBijective("identification matched no faces")

    if set(outside.regions) & set(patch.regions):
        raise CombingForgeError("region names of the glued meshes clash")
    regions = {name: frozenset(ts) for name, ts in outside.regions.items()}
    for name, ts in patch.regions.items():
        regions[name] = frozenset(t + off for t in ts)
    frames = dict(outside.frames)
    frames.update(patch.frames)
    transitions = dict(outside.transitions)
    for (v, r1, r2), m in patch.transitions.items():
        transitions[(new_id[v], r1, r2)] = m

    mesh = FramedMesh(next_id, tets, orientations, glue_pairs, regions, frames, transitions)
    problems = mesh.validate_manifold()
    orient = [p for p in problems if "orientation" in p]
    if orient:
        raise OrientationIncompatible("; ".join(orient))
    if problems:
        raise CombingForgeError("glue produced an invalid mesh: " + "; ".join(problems))
    mesh.meta["outside_tet_map"] = {t: t for t in range(off)}
    mesh.meta["patch_tet_map"] = {t: t + off for t in range(len(patch.tets))}
    mesh.meta["patch_vertex_map"] = new_id
    return mesh


def submesh(mesh: FramedMesh, tet_set) -> FramedMesh:
    """Standalone FramedMesh of a set of tets (e.g. a region).

    meta carries `tet_map`, `vertex_map` (new -> old) and the cell maps
    `edge_cell_map` / `face_cell_map` (new cell idx -> old cell idx) used
    by inclusion-induced maps on homology.
    """
    tet_list = sorted(tet_set)
    tpos = {t: i for i, t in enumerate(tet_list)}
    old_vids = sorted({v for t in tet_list for v in mesh.tets[t]})
    vmap = {v: i for i, v in enumerate(old_vids)}
    tets = [tuple(vmap[v] for v in mesh.tets[t]) for t in tet_list]
    orientations = [mesh.orientations[t] for t in tet_list]
    glue_pairs = [
        ((tpos[t1], f1), (tpos[t2], f2))
        for (t1, f1), (t2, f2) in mesh.face_glue
        if t1 in tpos and t2 in tpos
    ]
    regions = {}
    for name, ts in mesh.regions.items():
        inside = ts & set(tet_list)
        if inside:
            regions[name] = frozenset(tpos[t] for t in inside)
    frames = {name: mesh.frames.get(name, GLOBAL_FRAME) for name in regions}
    transitions = {}
    for (v, r1, r2), m in mesh.transitions.items():
        if v in vmap and r1 in regions and r2 in regions:
            transitions[(vmap[v], r1, r2)] = m
    sub = FramedMesh(len(old_vids), tets, orientations, glue_pairs, regions, frames, transitions)
    sub.meta["tet_map"] = {i: t for i, t in enumerate(tet_list)}
    sub.meta["vertex_map"] = old_vids  # new id -> old id
    sub.meta["host"] = mesh
    # cell maps
    ec, hc = sub.cells, mesh.cells
    sub.meta["edge_cell_map"] = [
        hc.edge_index[(tet_list[t], e)] for (t, e) in ec.edge_cells
    ]
    sub.meta["face_cell_map"] = [
        hc.face_index[(tet_list[t], f)] for (t, f) in ec.face_cells
    ]
    return sub


def refine(mesh: FramedMesh, levels: int = 1) -> FramedMesh:
    """Barycentric refinement applied `levels` times.

    New vertex ids: originals, then edge, face and tet barycenters, in cell
    order.  The subdivision chain maps for degrees 1 and 2 are stored in
    meta["chain_map1"] / meta["chain_map2"] (old cell -> sparse new chain).
    """
    out = mesh
    for _ in range(max(0, levels)):
        out = _refine_once(out)
    return out


def _refine_once(mesh: FramedMesh) -> FramedMesh:
    from fractions import Fraction

    cells = mesh.cells
    ne, nf, nt = len(cells.edge_cells), len(cells.face_cells), len(mesh.tets)
    e_id = lambda e: mesh.nv + e
    f_id = lambda f: mesh.nv + ne + f
    t_id = lambda t: mesh.nv + ne + nf + t

    import itertools

    tets = []
    orientations = []
    regions: dict[str, list[int]] = {name: [] for name in mesh.regions}
    for t in range(nt):
        tet = mesh.tets[t]
        region = mesh.region_of_tet(t)
        for perm in itertools.permutations(range(4)):
            i, j, k, _l = perm
            _, sgn = sort_sign(perm)
            v0 = tet[i]
            v1 = e_id(cells.edge_index[(t, tuple(sorted((i, j))))])
            v2 = f_id(cells.face_index[(t, _l)])
            v3 = t_id(t)
            regions[region].append(len(tets))
            tets.append((v0, v1, v2, v3))
            orientations.append(mesh.orientations[t] * sgn)

    glue_pairs = _glue_by_triples(tets)
    nv = mesh.nv + ne + nf + nt
    new_regions = {name: frozenset(ts) for name, ts in regions.items()}

    # transitions for barycenter vertices: copy from the smallest original
    # vertex of the parent cell
    transitions = dict(mesh.transitions)
    for (v, r1, r2), m in mesh.transitions.items():
        for e in range(ne):
            if min(cells.edge_verts[e]) == v:
                transitions[(e_id(e), r1, r2)] = m
        for f in range(nf):
            if min(cells.face_verts[f]) == v:
                transitions[(f_id(f), r1, r2)] = m
        for t in range(nt):
            if min(mesh.tets[t]) == v:
                transitions[(t_id(t), r1, r2)] = m

    out = FramedMesh(nv, tets, orientations, glue_pairs, new_regions,
                     dict(mesh.frames), transitions)

    # subdivision chain maps (degree 1 and 2) for homology transport
    out_cells = out.cells
    edge_lookup: dict[tuple[int, int], list[int]] = {}
    for idx, (t, e) in enumerate(out_cells.edge_cells):
        a, b = out_cells.edge_verts[idx]
        edge_lookup.setdefault((a, b), []).append(idx)

    def find_edge(a, b):
        key = tuple(sorted((a, b)))
        cands = edge_lookup.get(key, [])
        if len(cands) != 1:
            raise CombingForgeError("ambiguous subdivided edge lookup")
        return cands[0]

    chain1 = []
    for e in range(ne):
        a, b = cells.edge_verts[e]
        m = e_id(e)
        col: dict[int, Fraction] = {}
        for (x, y) in ((a, m), (m, b)):
            idx = find_edge(x, y)
            lo, _hi = out_cells.edge_verts[idx]
            col[idx] = col.get(idx, Fraction(0)) + (1 if lo == x else -1)
        chain1.append(col)
    out.meta["chain_map1"] = chain1
    out.meta["parent"] = mesh
    return out


def _glue_by_triples(tets) -> list:
    """Derive face gluings by matching vertex-id triples (valid for
    simplicial complexes such as barycentric subdivisions and the explicit
    builders)."""
    by_triple: dict[tuple[int, ...], list[tuple[int, int]]] = {}
    for t, tet in enumerate(tets):
        for f in range(4):
            key = tuple(sorted(tet[i] for i in range(4) if i != f))
            by_triple.setdefault(key, []).append((t, f))
    pairs = []
    for key, slots in by_triple.items():
        if len(slots) == 2:
            pairs.append((slots[0], slots[1]))
        elif len(slots) > 2:
            raise CombingForgeError(f"face {key} shared by {len(slots)} tets")
    return pairs
