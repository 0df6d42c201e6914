"""Concrete mesh constructions used by the tests, the CLI and the worked
examples: balls, spheres, product solid tori, the genus-1 Heegaard model of
S^3 with two Hopf-linked tube regions, connected sums, S^2 x S^1 and a
genus-2 handlebody.

All products use the staircase prism triangulation whose quad diagonals run
from the lower copy of the smaller base vertex to the upper copy of the
larger one; this makes boundary patterns of equal products match exactly,
and the residual mismatch between the two Heegaard solid tori is bridged by
one "diagonal flip" tetrahedron per differing boundary square.
"""

from __future__ import annotations

from fractions import Fraction

from .errors import CombingForgeError, OrientationIncompatible
from .mesh import FramedMesh, sort_sign, FACE_LOCALS
from .meshops import _glue_by_triples
from .pllink import Loop, PLLink, Segment


def orient_tets(tets, glue_pairs):
    """Orientation signs making glued faces cancel, by propagation from the
    first tet of each connected component (seeded +1)."""
    n = len(tets)
    adj: dict[int, list] = {t: [] for t in range(n)}
    for (t1, f1), (t2, f2) in glue_pairs:
        adj[t1].append(((t1, f1), (t2, f2)))
        adj[t2].append(((t2, f2), (t1, f1)))

    def slot_sign(t, f):
        ids = tuple(tets[t][i] for i in FACE_LOCALS[f])
        _, sgn = sort_sign(ids)
        return (-1) ** f * sgn

    sign = [0] * n
    for seed in range(n):
        if sign[seed]:
            continue
        sign[seed] = 1
        stack = [seed]
        while stack:
            t = stack.pop()
            for (ta, fa), (tb, fb) in adj[t]:
                want = -sign[ta] * slot_sign(ta, fa) * slot_sign(tb, fb)
                if sign[tb] == 0:
                    sign[tb] = want
                    stack.append(tb)
                elif sign[tb] != want:
                    raise OrientationIncompatible("complex is not orientable")
    return sign


class Assembler:
    """Accumulates tets over hashable vertex keys, then emits a FramedMesh
    with gluings recovered by face-triple matching."""

    def __init__(self):
        self.tets: list[tuple[int, int, int, int]] = []
        self.tet_regions: list[str] = []
        self.key_to_id: dict = {}
        self.id_to_key: list = []

    def v(self, key) -> int:
        if key not in self.key_to_id:
            self.key_to_id[key] = len(self.id_to_key)
            self.id_to_key.append(key)
        return self.key_to_id[key]

    def add_tet(self, ids, region: str) -> int:
        if len(set(ids)) != 4:
            raise CombingForgeError(f"degenerate tet {ids}")
        self.tets.append(tuple(ids))
        self.tet_regions.append(region)
        return len(self.tets) - 1

    def open_faces(self) -> dict[tuple[int, int, int], list[tuple[int, int]]]:
        count: dict[tuple[int, int, int], list[tuple[int, int]]] = {}
        for t, tet in enumerate(self.tets):
            for f in range(4):
                key = tuple(sorted(tet[i] for i in range(4) if i != f))
                count.setdefault(key, []).append((t, f))
        return {k: v for k, v in count.items() if len(v) == 1}

    def add_product(self, base_tris, layers: int, closed: bool, key_fn, region: str):
        """Staircase product of a triangulated base with S^1 (closed) or an
        interval.  Returns {(sorted base triangle, layer): (t0, t1, t2)}."""
        if closed and layers < 3:
            raise CombingForgeError("closed products need at least 3 layers")
        prisms = {}
        for tri in base_tris:
            a, b, c = sorted(tri)
            for k in range(layers):
                k2 = (k + 1) % layers if closed else k + 1
                a0, b0, c0 = self.v(key_fn(a, k)), self.v(key_fn(b, k)), self.v(key_fn(c, k))
                a1, b1, c1 = self.v(key_fn(a, k2)), self.v(key_fn(b, k2)), self.v(key_fn(c, k2))
                t0 = self.add_tet((a0, b0, c0, c1), region)
                t1 = self.add_tet((a0, b0, b1, c1), region)
                t2 = self.add_tet((a0, a1, b1, c1), region)
                prisms[(a, b, c), k] = (t0, t1, t2)
        return prisms

    def add_flip_tets(self, region: str) -> int:
        """Bridge two boundary triangulations of the same vertex set that
        differ by diagonal flips: one tet per flipped square."""
        singles = set(self.open_faces())
        added = 0
        progress = True
        while singles and progress:
            progress = False
            by_edge: dict[tuple[int, int], list] = {}
            for tri in singles:
                for e in ((tri[0], tri[1]), (tri[0], tri[2]), (tri[1], tri[2])):
                    by_edge.setdefault(e, []).append(tri)
            for e, tris in sorted(by_edge.items()):
                if len(tris) != 2:
                    continue
                t1, t2 = tris
                quad = set(t1) | set(t2)
                if len(quad) != 4:
                    continue
                u, v = sorted(quad - set(e))
                x, y = e
                opp1 = tuple(sorted((u, v, x)))
                opp2 = tuple(sorted((u, v, y)))
                if opp1 in singles and opp2 in singles:
                    self.add_tet(tuple(sorted(quad)), region)
                    singles -= {t1, t2, opp1, opp2}
                    added += 1
                    progress = True
                    break
        return added

    def finish(self, mirror: bool = False, allow_boundary: bool = True) -> FramedMesh:
        glue_pairs = _glue_by_triples(self.tets)
        orientations = orient_tets(self.tets, glue_pairs)
        if mirror:
            orientations = [-s for s in orientations]
        regions: dict[str, set] = {}
        for t, r in enumerate(self.tet_regions):
            regions.setdefault(r, set()).add(t)
        mesh = FramedMesh(
            len(self.id_to_key), self.tets, orientations, glue_pairs,
            {k: frozenset(v) for k, v in regions.items()},
        )
        problems = mesh.validate_manifold()
        if problems:
            raise CombingForgeError("builder produced invalid mesh: " + "; ".join(problems))
        if not allow_boundary and mesh.cells.boundary_faces:
            raise CombingForgeError("expected a closed mesh")
        mesh.meta["vertex_keys"] = list(self.id_to_key)
        return mesh


# -- base complexes ----------------------------------------------------------

def disk_base(p: int):
    """Graded disk: center 0, middle ring 1..p, outer ring p+1..2p.

    The middle ring exists so tube combings can sample a full equator
    between the center value and the boundary value.
    """
    if p < 3:
        raise CombingForgeError("disk needs at least 3 boundary vertices")
    tris = []
    for i in range(p):
        j = (i + 1) % p
        m_i, m_j = 1 + i, 1 + j
        o_i, o_j = 1 + p + i, 1 + p + j
        tris.append((0, m_i, m_j))
        tris.append((m_i, o_i, o_j))
        tris.append((m_i, o_j, m_j))
    return tris


def octahedron_triangles():
    # equator 0..3, poles 4 (north) / 5 (south)
    tris = []
    for i in range(4):
        j = (i + 1) % 4
        tris.append((i, j, 4))
        tris.append((j, i, 5))
    return tris


def torus_grid_triangles(p: int, q: int):
    """Standalone torus triangulation on the p x q grid, consistently
    oriented, with main diagonals."""
    tris = []
    v = lambda i, j: (i % p) * q + (j % q)
    for i in range(p):
        for j in range(q):
            tris.append((v(i, j), v(i + 1, j), v(i + 1, j + 1)))
            tris.append((v(i, j), v(i + 1, j + 1), v(i, j + 1)))
    return tris


def holed_rectangle_base(width: int = 5, height: int = 3, holes=((1, 1), (3, 1))):
    """Rectangle grid of unit squares with interior square holes removed;
    base of the genus-(number of holes) product handlebody."""
    tris = []
    v = lambda i, j: i * (height + 1) + j
    for i in range(width):
        for j in range(height):
            if (i, j) in holes:
                continue
            tris.append((v(i, j), v(i + 1, j), v(i + 1, j + 1)))
            tris.append((v(i, j), v(i + 1, j + 1), v(i, j + 1)))
    return tris


# -- meshes ------------------------------------------------------------------

def single_tet() -> FramedMesh:
    asm = Assembler()
    asm.add_tet((asm.v(0), asm.v(1), asm.v(2), asm.v(3)), "all")
    return asm.finish()


def two_tet_s3() -> FramedMesh:
    """Closed Δ-complex model of S^3: two tets glued along all four faces."""
    asm = Assembler()
    ids = tuple(asm.v(i) for i in range(4))
    asm.add_tet(ids, "all")
    asm.add_tet(ids, "all")
    return asm.finish(allow_boundary=False)


def _tube_info(prisms, p: int, layers: int, key_fn, asm: Assembler):
    return {
        "kind": "tube",
        "p": p,
        "layers": layers,
        "closed": True,
        "prisms": dict(prisms),
        "center": [asm.key_to_id[key_fn(0, k)] for k in range(layers)],
        "mid": [[asm.key_to_id[key_fn(1 + i, k)] for k in range(layers)] for i in range(p)],
        "outer": [[asm.key_to_id[key_fn(1 + p + i, k)] for k in range(layers)] for i in range(p)],
        "fan_tris": [tuple(sorted((0, 1 + i, 1 + (i + 1) % p))) for i in range(p)],
    }


def solid_torus(p: int = 3, layers: int = 3) -> FramedMesh:
    """Product solid torus: graded p-gon disk times a layers-gon S^1."""
    asm = Assembler()
    key_fn = lambda vb, k: ("A", vb, k)
    prisms = asm.add_product(disk_base(p), layers, True, key_fn, "A")
    mesh = asm.finish()
    mesh.meta["products"] = {"A": _tube_info(prisms, p, layers, key_fn, asm)}
    return mesh


def hopf_s3(p: int = 3, q: int = 3, collar_layers: int = 2, mirror: bool = False) -> FramedMesh:
    """S^3 as a genus-1 Heegaard union of two product solid tori A1, A2
    separated by a T^2 x I collar region W, with the meridian of A2 attached
    to the longitude of A1.  The tube cores form a Hopf link.
    """
    asm = Assembler()
    k1 = lambda vb, k: ("A1", vb, k)
    prisms1 = asm.add_product(disk_base(p), q, True, k1, "A1")
    bdry1 = sorted(asm.open_faces())
    # collar: product of the boundary torus (keyed by its vertex keys) with I
    base_keys = [tuple(asm.id_to_key[v] for v in tri) for tri in bdry1]
    kw = lambda bk, l: bk if l == 0 else ("W", bk, l)
    asm.add_product(base_keys, collar_layers, False, kw, "W")
    # second tube, its outer ring attached to the collar top with the swap
    # (outer index j, layer i) -> collar top point over A1's (ring i, layer j)
    k2 = lambda vb, i: (
        ("W", ("A1", 1 + p + i, vb - (1 + q)), collar_layers)
        if vb >= 1 + q
        else ("A2", vb, i)
    )
    prisms2 = asm.add_product(disk_base(q), p, True, k2, "A2")
    flips = asm.add_flip_tets("W")
    if not asm.open_faces() == {}:
        raise CombingForgeError("Heegaard assembly left unmatched boundary faces")
    mesh = asm.finish(mirror=mirror, allow_boundary=False)
    mesh.meta["products"] = {
        "A1": _tube_info(prisms1, p, q, k1, asm),
        "A2": _tube_info(prisms2, q, p, k2, asm),
    }
    mesh.meta["flip_tets"] = flips
    return mesh


def s2xs1(layers: int = 3) -> FramedMesh:
    asm = Assembler()
    key_fn = lambda vb, k: (vb, k)
    prisms = asm.add_product(octahedron_triangles(), layers, True, key_fn, "all")
    mesh = asm.finish(allow_boundary=False)
    mesh.meta["products"] = {
        "all": {"kind": "product", "prisms": dict(prisms), "layers": layers, "closed": True}
    }
    mesh.meta["octa_vertex"] = {
        (vb, k): asm.key_to_id[(vb, k)] for vb in range(6) for k in range(layers)
    }
    return mesh


def genus2_handlebody(layers: int = 2) -> FramedMesh:
    """Genus-2 handlebody as (two-holed disk) x interval."""
    asm = Assembler()
    prisms = asm.add_product(
        holed_rectangle_base(), layers, False, lambda vb, k: (vb, k), "all"
    )
    mesh = asm.finish()
    mesh.meta["products"] = {
        "all": {"kind": "product", "prisms": dict(prisms), "layers": layers, "closed": False}
    }
    return mesh


def connect_sum(m1: FramedMesh, m2: FramedMesh, t1: int, t2: int,
                region_renames: dict[str, str]) -> FramedMesh:
    """Connected sum: remove tet t1 from m1 and t2 from m2 and glue the
    boundary spheres, preserving both orientations.  m2's regions are
    renamed via region_renames; renamed regions falling together with m1
    regions of the same name are merged.
    """
    tets1 = [m1.tets[t] for t in range(len(m1.tets)) if t != t1]
    regs1 = [m1.region_of_tet(t) for t in range(len(m1.tets)) if t != t1]
    ids2map: dict[int, int] = {}
    removed1 = m1.tets[t1]
    removed2 = m2.tets[t2]

    import itertools

    for perm in itertools.permutations(range(4)):
        ids2map = {removed2[i]: removed1[perm[i]] for i in range(4)}
        next_id = m1.nv
        full_map = dict(ids2map)
        for v in range(m2.nv):
            if v not in full_map:
                full_map[v] = next_id
                next_id += 1
        tets = list(tets1)
        regs = list(regs1)
        for t in range(len(m2.tets)):
            if t == t2:
                continue
            tets.append(tuple(full_map[v] for v in m2.tets[t]))
            regs.append(region_renames.get(m2.region_of_tet(t), m2.region_of_tet(t)))
        try:
            glue_pairs = _glue_by_triples(tets)
            orientations = orient_tets(tets, glue_pairs)
        except (CombingForgeError, OrientationIncompatible):
            continue
        # normalize the global sign to m1's and check both pieces keep their
        # original orientations (orientation-preserving sum)
        if orientations[0] != m1.orientations[0 if t1 != 0 else 1]:
            orientations = [-s for s in orientations]
        ok = all(
            orientations[i] == m1.orientations[t]
            for i, t in enumerate(tt for tt in range(len(m1.tets)) if tt != t1)
        )
        n1 = len(tets1)
        old2 = [t for t in range(len(m2.tets)) if t != t2]
        ok = ok and all(
            orientations[n1 + i] == m2.orientations[t] for i, t in enumerate(old2)
        )
        if not ok:
            continue
        regions: dict[str, set] = {}
        for t, r in enumerate(regs):
            regions.setdefault(r, set()).add(t)
        mesh = FramedMesh(next_id, tets, orientations, glue_pairs,
                          {k: frozenset(v) for k, v in regions.items()})
        problems = mesh.validate_manifold()
        if problems:
            continue
        # transport product infos
        tmap1 = {}
        for t in range(len(m1.tets)):
            if t != t1:
                tmap1[t] = t if t < t1 else t - 1
        tmap2 = {}
        for i, t in enumerate(old2):
            tmap2[t] = n1 + i
        products = {}
        for name, info in (m1.meta.get("products") or {}).items():
            products[name] = _remap_info(info, tmap1, lambda v: v)
        for name, info in (m2.meta.get("products") or {}).items():
            products[region_renames.get(name, name)] = _remap_info(
                info, tmap2, lambda v: full_map[v]
            )
        mesh.meta["products"] = products
        mesh.meta["tet_map_1"] = tmap1
        mesh.meta["tet_map_2"] = tmap2
        mesh.meta["vertex_map_2"] = full_map
        return mesh
    raise OrientationIncompatible("no orientation-preserving identification found")


def _remap_info(info: dict, tmap: dict[int, int], vmap) -> dict:
    out = dict(info)
    if "prisms" in info:
        out["prisms"] = {k: tuple(tmap[t] for t in ts) for k, ts in info["prisms"].items()}
    for key in ("center",):
        if key in info:
            out[key] = [vmap(v) for v in info[key]]
    for key in ("mid", "outer"):
        if key in info:
            out[key] = [[vmap(v) for v in row] for row in info[key]]
    return out


def hopf_s3_triple(p: int = 3, q: int = 3, collar_layers: int = 2) -> FramedMesh:
    """S^3 with three disjoint tube regions: the Hopf pair A1, A2 and a
    distant tube A3 split from them by the connect-sum sphere."""
    m1 = hopf_s3(p, q, collar_layers)
    m2 = hopf_s3(p, q, collar_layers)
    t1 = min(m1.regions["W"])
    t2 = min(m2.regions["W"])
    return connect_sum(m1, m2, t1, t2, {"A1": "A3", "A2": "W", "W": "W"})


# -- canonical curves ---------------------------------------------------------

def vertical_circle(mesh: FramedMesh, region: str, lam=None,
                    multiplicity=Fraction(1), reverse: bool = False,
                    tri=None) -> PLLink:
    """The circle over a fixed interior point of the product base, as a PL
    link through the prism stacks of the given product region.

    The default base point lies inside the first fan triangle of a tube
    region, so the circle is isotopic to the tube core and avoids the
    1-skeleton.
    """
    info = (mesh.meta.get("products") or {}).get(region)
    if info is None:
        raise CombingForgeError(f"region {region} has no product structure")
    if not info.get("closed"):
        raise CombingForgeError("vertical circles need a closed product")
    if tri is None:
        tri = info["fan_tris"][0]
    if lam is None:
        lam = (Fraction(5, 8), Fraction(1, 4), Fraction(1, 8))
    a, b, c = sorted(tri)
    la, lb, lc = (Fraction(x) for x in lam)
    if la + lb + lc != 1 or min(la, lb, lc) <= 0:
        raise CombingForgeError("base point must be interior")
    segs = []
    for k in range(info["layers"]):
        t0, t1, t2 = info["prisms"][(a, b, c), k]
        segs.append(Segment(t0, (la, lb, lc, Fraction(0)), (la, lb, Fraction(0), lc)))
        segs.append(Segment(t1, (la, lb, Fraction(0), lc), (la, Fraction(0), lb, lc)))
        segs.append(Segment(t2, (la, Fraction(0), lb, lc), (Fraction(0), la, lb, lc)))
    link = PLLink([Loop(segs, Fraction(multiplicity))])
    if reverse:
        link = link.reversed()
    link.validate(mesh)
    return link
