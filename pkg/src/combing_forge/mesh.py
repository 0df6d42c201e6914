"""Oriented tetrahedral Δ-complexes with regions, frames and transitions.

A `FramedMesh` is a list of tetrahedra given as ordered 4-tuples of global
vertex ids (distinct within each tet) together with orientation signs and a
list of face gluings.  Glued faces must carry the same 3 vertex ids, so the
vertex ids are already the quotient ids of the Δ-complex; faces and edges
are still identified cell by cell (two cells may share a vertex-id set
without being equal).

Regions partition the tetrahedra.  Each region carries a frame name; at a
vertex shared by two regions a transition rotation converts combing
coordinates between the frames.  All meshes built by `builders` use a single
global frame except the pseudo-parallelization host, whose inner region is
framed by the twisted trivialization.
"""

from __future__ import annotations

from fractions import Fraction

from .errors import (
    CombingForgeError,
    IdentificationNotBijective,
    OrientationIncompatible,
)
from .ratgeom import Mat3, IDENTITY3, is_rotation, mat_mul, transpose

GLOBAL_FRAME = "global"

# Local vertex tuples of face f (the face opposite local vertex f), in the
# order induced by omitting index f from the tet tuple.
FACE_LOCALS = ((1, 2, 3), (0, 2, 3), (0, 1, 3), (0, 1, 2))
EDGE_LOCALS = ((0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3))


def sort_sign(seq):
    """(sorted tuple, permutation sign) of a sequence of distinct values."""
    items = list(seq)
    sign = 1
    for i in range(len(items)):
        for j in range(len(items) - 1, i, -1):
            if items[j - 1] > items[j]:
                items[j - 1], items[j] = items[j], items[j - 1]
                sign = -sign
    return tuple(items), sign


class _UnionFind:
    def __init__(self):
        self.parent = {}

    def find(self, x):
        p = self.parent.setdefault(x, x)
        if p != x:
            p = self.parent[x] = self.find(p)
        return p

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            # keep the smaller key as root for determinism
            if rb < ra:
                ra, rb = rb, ra
            self.parent[rb] = ra


class ChainComplexData:
    """Boundary operators of a finite chain complex over Q.

    dims[k] is the number of k-cells; bnd[k][i] is the boundary of the i-th
    k-cell as a sparse dict over (k-1)-cell indices.
    """

    def __init__(self, dims: dict[int, int], bnd: dict[int, list[dict[int, Fraction]]]):
        self.dims = dims
        self.bnd = bnd
        self.cache: dict = {}  # write-once caches used by homology/linking

    def boundary_of(self, degree: int, chain: dict[int, Fraction]) -> dict[int, Fraction]:
        out: dict[int, Fraction] = {}
        cols = self.bnd.get(degree)
        if cols is None:
            return out
        for i, c in chain.items():
            for j, v in cols[i].items():
                w = out.get(j, Fraction(0)) + c * v
                if w:
                    out[j] = w
                else:
                    out.pop(j, None)
        return out


class Cells:
    """Derived cell structure of a FramedMesh (faces, edges, boundaries)."""

    def __init__(self, mesh: "FramedMesh"):
        self.mesh = mesh
        tets = mesh.tets
        uf_face = _UnionFind()
        for (t1, f1), (t2, f2) in mesh.face_glue:
            uf_face.union((t1, f1), (t2, f2))
        uf_edge = _UnionFind()
        for t in range(len(tets)):
            for e in EDGE_LOCALS:
                uf_edge.find((t, e))
        for (t1, f1), (t2, f2) in mesh.face_glue:
            ids1 = mesh.face_vertices(t1, f1)
            pos2 = {v: i for i, v in enumerate(tets[t2])}
            for a in range(3):
                for b in range(a + 1, 3):
                    va, vb = ids1[a], ids1[b]
                    la = tuple(sorted((tets[t1].index(va), tets[t1].index(vb))))
                    lb = tuple(sorted((pos2[va], pos2[vb])))
                    uf_edge.union((t1, la), (t2, lb))

        # canonical face cells
        slot_lists: dict = {}
        for t in range(len(tets)):
            for f in range(4):
                slot_lists.setdefault(uf_face.find((t, f)), []).append((t, f))
        self.face_cells = sorted(slot_lists)
        self.face_index = {}
        for i, root in enumerate(self.face_cells):
            for slot in slot_lists[root]:
                self.face_index[slot] = i
        self.face_slots = [slot_lists[r] for r in self.face_cells]
        self.face_verts = [tuple(sorted(mesh.face_vertices(*r))) for r in self.face_cells]

        # canonical edge cells
        eslot_lists: dict = {}
        for t in range(len(tets)):
            for e in EDGE_LOCALS:
                eslot_lists.setdefault(uf_edge.find((t, e)), []).append((t, e))
        self.edge_cells = sorted(eslot_lists)
        self.edge_index = {}
        for i, root in enumerate(self.edge_cells):
            for slot in eslot_lists[root]:
                self.edge_index[slot] = i
        self.edge_verts = [
            tuple(sorted((tets[t][e[0]], tets[t][e[1]]))) for t, e in self.edge_cells
        ]

        self.boundary_faces = [i for i, slots in enumerate(self.face_slots) if len(slots) == 1]
        self.boundary_vertices = set()
        self.boundary_edges = set()
        for i in self.boundary_faces:
            self.boundary_vertices.update(self.face_verts[i])
            t, f = self.face_slots[i][0]
            ids = mesh.face_vertices(t, f)
            for a in range(3):
                for b in range(a + 1, 3):
                    la = tuple(sorted((tets[t].index(ids[a]), tets[t].index(ids[b]))))
                    self.boundary_edges.add(self.edge_index[(t, la)])

    def tets_at_vertex(self, v: int) -> list[int]:
        return [t for t, tet in enumerate(self.mesh.tets) if v in tet]

    def face_slot_sign(self, t: int, f: int) -> int:
        """Coefficient of face slot (t,f) in the boundary of the oriented
        tet t, relative to the face cell's canonical (sorted-id) orientation."""
        mesh = self.mesh
        ids = mesh.face_vertices(t, f)
        _, sgn = sort_sign(ids)
        return mesh.orientations[t] * (-1) ** f * sgn

    def tet_edge_cell(self, t: int, va: int, vb: int) -> int:
        tet = self.mesh.tets[t]
        la = tuple(sorted((tet.index(va), tet.index(vb))))
        return self.edge_index[(t, la)]


class FramedMesh:
    def __init__(
        self,
        nv: int,
        tets,
        orientations,
        face_glue,
        regions: dict[str, frozenset[int]] | None = None,
        frames: dict[str, str] | None = None,
        transitions: dict[tuple[int, str, str], Mat3] | None = None,
    ):
        self.nv = nv
        self.tets = [tuple(t) for t in tets]
        self.orientations = list(orientations)
        self.face_glue = [((a[0], a[1]), (b[0], b[1])) for a, b in face_glue]
        if regions is None:
            regions = {"all": frozenset(range(len(self.tets)))}
        self.regions = {k: frozenset(v) for k, v in regions.items()}
        self.frames = frames or {name: GLOBAL_FRAME for name in self.regions}
        self.transitions = dict(transitions or {})
        self._cells: Cells | None = None
        self._cc: ChainComplexData | None = None
        self.product_info = None  # set by product builders
        self.meta: dict = {}

    # -- derived structure -------------------------------------------------

    def face_vertices(self, t: int, f: int):
        tet = self.tets[t]
        return tuple(tet[i] for i in FACE_LOCALS[f])

    @property
    def cells(self) -> Cells:
        if self._cells is None:
            self._cells = Cells(self)
        return self._cells

    def region_of_tet(self, t: int) -> str:
        for name, ts in sorted(self.regions.items()):
            if t in ts:
                return name
        raise CombingForgeError(f"tet {t} belongs to no region")

    def frame_of_tet(self, t: int) -> str:
        return self.frames[self.region_of_tet(t)]

    def frames_at_vertex(self, v: int) -> set[str]:
        return {self.frame_of_tet(t) for t in self.cells.tets_at_vertex(v)}

    def transition(self, v: int, frm: str, to: str) -> Mat3:
        """Rotation converting coordinates in frame `frm` to frame `to` at
        vertex v."""
        if frm == to:
            return IDENTITY3
        m = self.transitions.get((v, frm, to))
        if m is not None:
            return m
        m = self.transitions.get((v, to, frm))
        if m is not None:
            return transpose(m)
        raise CombingForgeError(f"no transition at vertex {v}: {frm} -> {to}")

    def chain_complex(self) -> ChainComplexData:
        if self._cc is not None:
            return self._cc
        cells = self.cells
        nt = len(self.tets)
        nf = len(cells.face_cells)
        ne = len(cells.edge_cells)
        bnd3 = []
        for t in range(nt):
            col: dict[int, Fraction] = {}
            for f in range(4):
                i = cells.face_index[(t, f)]
                c = col.get(i, Fraction(0)) + cells.face_slot_sign(t, f)
                if c:
                    col[i] = c
                else:
                    col.pop(i, None)
            bnd3.append(col)
        bnd2 = []
        for i in range(nf):
            p, q, r = cells.face_verts[i]
            t, f = cells.face_slots[i][0]
            col = {}
            for (a, b), sgn in (((q, r), 1), ((p, r), -1), ((p, q), 1)):
                e = cells.tet_edge_cell(t, a, b)
                c = col.get(e, Fraction(0)) + sgn
                if c:
                    col[e] = Fraction(c)
                else:
                    col.pop(e, None)
            bnd2.append(col)
        bnd1 = []
        for a, b in cells.edge_verts:
            bnd1.append({b: Fraction(1), a: Fraction(-1)} if a != b else {})
        self._cc = ChainComplexData(
            dims={0: self.nv, 1: ne, 2: nf, 3: nt},
            bnd={1: bnd1, 2: bnd2, 3: bnd3},
        )
        return self._cc

    # -- validation ---------------------------------------------------------

    def validate_manifold(self) -> list[str]:
        """Diagnostics: empty list means the mesh passes."""
        report: list[str] = []
        seen_slots = set()
        for t, tet in enumerate(self.tets):
            if len(set(tet)) != 4:
                report.append(f"tet {t} has repeated vertex ids")
            if any(v < 0 or v >= self.nv for v in tet):
                report.append(f"tet {t} has out-of-range vertex ids")
        for (t1, f1), (t2, f2) in self.face_glue:
            for slot in ((t1, f1), (t2, f2)):
                if slot in seen_slots:
                    report.append(f"face slot {slot} glued twice")
                seen_slots.add(slot)
            if (t1, f1) == (t2, f2):
                report.append(f"face slot {(t1, f1)} glued to itself")
            if set(self.face_vertices(t1, f1)) != set(self.face_vertices(t2, f2)):
                report.append(f"glued faces {(t1, f1)} and {(t2, f2)} have different vertex ids")
        if report:
            return report

        cells = self.cells
        for i, slots in enumerate(cells.face_slots):
            if len(slots) > 2:
                report.append(f"face cell {cells.face_verts[i]} belongs to {len(slots)} tets")
            elif len(slots) == 2:
                s = cells.face_slot_sign(*slots[0]) + cells.face_slot_sign(*slots[1])
                if s != 0:
                    report.append(
                        f"orientation mismatch across face {cells.face_verts[i]}"
                    )
        # boundary surface closedness: each boundary edge in exactly 2
        # boundary faces
        edge_count: dict[int, int] = {}
        cc = self.chain_complex()
        for i in cells.boundary_faces:
            for e in cc.bnd[2][i]:
                edge_count[e] = edge_count.get(e, 0) + 1
        for e, c in edge_count.items():
            if c != 2:
                report.append(f"boundary edge {cells.edge_verts[e]} lies in {c} boundary faces")

        # regions partition the tets and are face-connected
        covered: set[int] = set()
        for name, ts in self.regions.items():
            if covered & ts:
                report.append(f"region {name} overlaps another region")
            covered |= ts
            if ts and not self._region_connected(ts):
                report.append(f"region {name} is not face-connected")
        if covered != set(range(len(self.tets))):
            report.append("regions do not cover all tets")

        for (v, r1, r2), m in self.transitions.items():
            if not is_rotation(m):
                report.append(f"transition at vertex {v} ({r1}->{r2}) is not a rotation")
        # cocycle consistency on triples sharing a vertex
        names_at: dict[int, set[str]] = {}
        for (v, r1, r2) in self.transitions:
            names_at.setdefault(v, set()).update((r1, r2))
        for v in sorted(names_at):
            frames_here = sorted(names_at[v])
            for a in frames_here:
                for b in frames_here:
                    for c in frames_here:
                        try:
                            ab = self.transition(v, a, b)
                            bc = self.transition(v, b, c)
                            ac = self.transition(v, a, c)
                        except CombingForgeError:
                            continue
                        prod = mat_mul(bc, ab)
                        if any(
                            abs(float(prod[i][j] - ac[i][j])) > 1e-12
                            for i in range(3)
                            for j in range(3)
                        ):
                            report.append(
                                f"transition cocycle violated at vertex {v} ({a},{b},{c})"
                            )
        return report

    def _region_connected(self, ts: frozenset[int]) -> bool:
        adj: dict[int, list[int]] = {t: [] for t in ts}
        for (t1, _f1), (t2, _f2) in self.face_glue:
            if t1 in adj and t2 in adj:
                adj[t1].append(t2)
                adj[t2].append(t1)
        start = min(ts)
        seen = {start}
        stack = [start]
        while stack:
            for u in adj[stack.pop()]:
                if u not in seen:
                    seen.add(u)
                    stack.append(u)
        return seen == set(ts)

    # -- boundary surfaces ---------------------------------------------------

    def boundary_surface(self, face_subset=None) -> "SurfaceComplex":
        """The boundary as a surface complex with the induced orientation
        (coefficients of the image of the fundamental 3-chain)."""
        cells = self.cells
        faces = cells.boundary_faces if face_subset is None else sorted(face_subset)
        return SurfaceComplex.from_mesh_boundary(self, faces)

    def boundary_components(self) -> list["SurfaceComplex"]:
        cells = self.cells
        cc = self.chain_complex()
        # connect boundary faces through shared edges
        by_edge: dict[int, list[int]] = {}
        for i in cells.boundary_faces:
            for e in cc.bnd[2][i]:
                by_edge.setdefault(e, []).append(i)
        uf = _UnionFind()
        for i in cells.boundary_faces:
            uf.find(i)
        for group in by_edge.values():
            for x in group[1:]:
                uf.union(group[0], x)
        comps: dict[int, list[int]] = {}
        for i in cells.boundary_faces:
            comps.setdefault(uf.find(i), []).append(i)
        return [SurfaceComplex.from_mesh_boundary(self, sorted(comps[k])) for k in sorted(comps)]


class SurfaceComplex:
    """A closed oriented triangulated surface, possibly a boundary of a
    FramedMesh (in which case cell inclusion maps into the mesh are kept)."""

    def __init__(self, nv_ids, triangles, tri_signs, edge_pairs, tri_edges,
                 mesh=None, face_map=None, edge_map=None):
        # nv_ids: sorted list of global vertex ids
        self.vertex_ids = list(nv_ids)
        self.vindex = {v: i for i, v in enumerate(self.vertex_ids)}
        self.triangles = [tuple(t) for t in triangles]  # sorted id triples
        self.tri_signs = list(tri_signs)  # orientation coefficients
        self.edge_pairs = [tuple(e) for e in edge_pairs]  # sorted id pairs
        self.tri_edges = [tuple(te) for te in tri_edges]  # per tri: 3 edge idxs (qr, pr, pq)
        self.mesh = mesh
        self.face_map = face_map  # surface tri idx -> mesh face cell idx
        self.edge_map = edge_map  # surface edge idx -> mesh edge cell idx
        self._cc: ChainComplexData | None = None

    @classmethod
    def from_mesh_boundary(cls, mesh: FramedMesh, face_idxs: list[int]) -> "SurfaceComplex":
        cells = mesh.cells
        cc = mesh.chain_complex()
        edge_set = sorted({e for i in face_idxs for e in cc.bnd[2][i]})
        edge_map = {e: k for k, e in enumerate(edge_set)}
        verts = sorted({v for i in face_idxs for v in cells.face_verts[i]})
        tris, signs, tri_edges = [], [], []
        for i in face_idxs:
            p, q, r = cells.face_verts[i]
            t, f = cells.face_slots[i][0]
            sign = cells.face_slot_sign(t, f)
            tris.append((p, q, r))
            signs.append(sign)
            tri_edges.append(
                (
                    edge_map[cells.tet_edge_cell(t, q, r)],
                    edge_map[cells.tet_edge_cell(t, p, r)],
                    edge_map[cells.tet_edge_cell(t, p, q)],
                )
            )
        edge_pairs = [cells.edge_verts[e] for e in edge_set]
        return cls(
            verts, tris, signs, edge_pairs, tri_edges,
            mesh=mesh, face_map=list(face_idxs), edge_map=edge_set,
        )

    @classmethod
    def from_triangles(cls, triangles, signs=None) -> "SurfaceComplex":
        """Standalone surface from oriented triangles (id triples).  Edges
        are identified by vertex-id pairs, which must be unambiguous."""
        tris_in = [tuple(t) for t in triangles]
        verts = sorted({v for t in tris_in for v in t})
        edge_map: dict[tuple[int, int], int] = {}
        edge_pairs: list[tuple[int, int]] = []
        tris, tri_signs, tri_edges = [], [], []
        for n, tri in enumerate(tris_in):
            srt, sgn = sort_sign(tri)
            p, q, r = srt
            if signs is not None:
                sgn *= signs[n]
            idxs = []
            for pair in ((q, r), (p, r), (p, q)):
                if pair not in edge_map:
                    edge_map[pair] = len(edge_pairs)
                    edge_pairs.append(pair)
                idxs.append(edge_map[pair])
            tris.append(srt)
            tri_signs.append(sgn)
            tri_edges.append(tuple(idxs))
        return cls(verts, tris, tri_signs, edge_pairs, tri_edges)

    def chain_complex(self) -> ChainComplexData:
        if self._cc is not None:
            return self._cc
        bnd2 = []
        for k in range(len(self.triangles)):
            eqr, epr, epq = self.tri_edges[k]
            col: dict[int, Fraction] = {}
            for e, s in ((eqr, 1), (epr, -1), (epq, 1)):
                c = col.get(e, Fraction(0)) + s
                if c:
                    col[e] = Fraction(c)
                else:
                    col.pop(e, None)
            bnd2.append(col)
        bnd1 = []
        for a, b in self.edge_pairs:
            bnd1.append({self.vindex[b]: Fraction(1), self.vindex[a]: Fraction(-1)})
        self._cc = ChainComplexData(
            dims={0: len(self.vertex_ids), 1: len(self.edge_pairs), 2: len(self.triangles)},
            bnd={1: bnd1, 2: bnd2},
        )
        return self._cc

    def fundamental_chain(self) -> dict[int, Fraction]:
        return {i: Fraction(s) for i, s in enumerate(self.tri_signs)}

    def euler_characteristic(self) -> int:
        return len(self.vertex_ids) - len(self.edge_pairs) + len(self.triangles)

    def genus(self) -> int:
        return (2 - self.euler_characteristic()) // 2
