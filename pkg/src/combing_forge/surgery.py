"""Lagrangian-preserving replacement of rational homology handlebodies:
datum validation, execution on combed meshes, torsion checks and the
homology class measuring how a replacement twists the normal Euler class.
"""

from __future__ import annotations

from fractions import Fraction

from .combing import Combing
from .coincidence import euler_zero_chain
from .errors import (
    BoundaryMismatch,
    CombingForgeError,
    NotCompatible,
    RegionsOverlap,
    SigmaVanishes,
)
from .homology import (
    HomologyClass,
    betti,
    homology_basis,
    induced_map_surface_to_mesh,
    is_qhh,
    lagrangian_of,
)
from .linking import homology_class_of_link
from .mesh import FramedMesh
from .meshops import BoundaryIdentification, glue, submesh
from .ratgeom import Vec3, cross, any_unit_orthogonal
from .sparselin import LinearSolver


class LPSurgeryDatum:
    """Replacement data for one region: the region name A in the host, the
    replacement mesh B, the boundary identification h mapping host vertices
    of the region's boundary to B vertices, the field X_B on B, and an
    optional boundary section sigma_A keyed by host vertex ids."""

    def __init__(self, region: str, replacement: FramedMesh,
                 h: BoundaryIdentification, combing: Combing,
                 sigma: dict[int, Vec3] | None = None):
        self.region = region
        self.replacement = replacement
        self.h = h
        self.combing = combing
        if combing.mesh is not replacement:
            raise CombingForgeError("replacement field lives on a different mesh")
        self.sigma = dict(sigma) if sigma else None


def region_submesh(mesh: FramedMesh, region: str) -> FramedMesh:
    """Standalone mesh of a named region, cached on the host."""
    cache = mesh.meta.setdefault("region_submeshes", {})
    if region not in cache:
        if region not in mesh.regions:
            raise CombingForgeError(f"no region named {region}")
        cache[region] = submesh(mesh, mesh.regions[region])
    return cache[region]


def restrict_combing(X: Combing, sub: FramedMesh) -> Combing:
    """X restricted to a submesh extracted from X's mesh; sigma on the
    submesh boundary defaults vertex-wise to a unit orthogonal."""
    old_of_new = sub.meta["vertex_map"]
    vectors = {v: X.vectors[old_of_new[v]] for v in range(sub.nv)}
    frames = {v: X.frames[old_of_new[v]] for v in range(sub.nv)}
    return Combing(sub, vectors, None, frames, check=False)


def trivial_datum(mesh: FramedMesh, region: str, X: Combing,
                  combing: Combing | None = None) -> LPSurgeryDatum:
    """Datum with B equal to the region itself and h the identity; the
    replacement field defaults to the restriction of X (a no-op surgery)."""
    B = region_submesh(mesh, region)
    old_of_new = B.meta["vertex_map"]
    vm = {old_of_new[b]: b for b in B.cells.boundary_vertices}
    if combing is None:
        combing = restrict_combing(X, B)
    return LPSurgeryDatum(region, B, BoundaryIdentification(vm), combing)


def _surface_of(mesh: FramedMesh):
    comps = mesh.boundary_components()
    if len(comps) != 1:
        raise CombingForgeError("expected a connected boundary")
    return comps[0]


def _push_surface_cycle(chain, src_surface, dst_surface, vertex_map):
    """Transport a 1-chain on src_surface to dst_surface through a vertex
    bijection (src mesh vertex -> dst mesh vertex); edge orientation is
    min->max on ids in each surface, so a swap flips the sign."""
    dst_index = {}
    for k, (a, b) in enumerate(dst_surface.edge_pairs):
        dst_index[(a, b)] = k
    out: dict[int, Fraction] = {}
    for e, c in chain.items():
        a, b = src_surface.edge_pairs[e]
        da, db = vertex_map[a], vertex_map[b]
        sign = 1
        if da > db:
            da, db = db, da
            sign = -1
        j = dst_index.get((da, db))
        if j is None:
            raise NotCompatible("identification is not simplicial on an edge")
        w = out.get(j, Fraction(0)) + sign * c
        if w:
            out[j] = w
        else:
            out.pop(j, None)
    return out


def validate_lp(mesh: FramedMesh, datum: LPSurgeryDatum) -> dict:
    """Homological validity report for a replacement datum: both sides
    rational homology handlebodies of equal genus and the identification
    carrying the kernel Lagrangian of A onto that of B."""
    report = {"passed": True, "problems": []}

    def fail(msg):
        report["passed"] = False
        report["problems"].append(msg)

    A = region_submesh(mesh, datum.region)
    B = datum.replacement
    ok_a, g_a = is_qhh(A)
    ok_b, g_b = is_qhh(B)
    if not ok_a:
        fail(f"region {datum.region} is not a rational homology handlebody")
    if not ok_b:
        fail("replacement is not a rational homology handlebody")
    if ok_a and ok_b and g_a != g_b:
        fail(f"genus mismatch: {g_a} vs {g_b}")
    if not report["passed"]:
        return report

    # identification vertex map in A-local ids
    old_of_new = A.meta["vertex_map"]
    a_to_b = {}
    for v_local in A.cells.boundary_vertices:
        host_v = old_of_new[v_local]
        if host_v not in datum.h.vertex_map:
            fail(f"identification misses boundary vertex {host_v}")
            return report
        a_to_b[v_local] = datum.h.vertex_map[host_v]

    surf_a = _surface_of(A)
    surf_b = _surface_of(B)
    lag_a = lagrangian_of(A)
    lag_b = lagrangian_of(B)
    for k, cls in enumerate(lag_a.basis):
        try:
            pushed = _push_surface_cycle(cls.representative, surf_a, surf_b, a_to_b)
        except NotCompatible as exc:
            fail(str(exc))
            return report
        pushed_cls = HomologyClass(surf_b, 1, pushed)
        if not lag_b.contains(pushed_cls):
            fail(
                "identification does not carry the kernel of the region into "
                f"the kernel of the replacement (basis element {k}, image "
                f"coordinates {[str(c) for c in pushed_cls.coordinates]})"
            )
    return report


def _check_regions(mesh: FramedMesh, data, subset) -> list[int]:
    idx = sorted(subset)
    names = [data[i].region for i in idx]
    if len(set(names)) != len(names):
        raise RegionsOverlap(f"duplicate surgery regions {names}")
    seen: set[int] = set()
    for i in idx:
        tets = mesh.regions.get(data[i].region)
        if tets is None:
            raise CombingForgeError(f"no region named {data[i].region}")
        if seen & tets:
            raise RegionsOverlap("surgery regions share tetrahedra")
        seen |= tets
    return idx


def _combing_values_match(X: Combing, host_v: int, XB: Combing, b_v: int) -> bool:
    if X.frames[host_v] == XB.frames[b_v]:
        return X.vectors[host_v] == XB.vectors[b_v]
    # compare in the host frame via the recorded transitions on each side
    return X.value(host_v, X.frames[host_v]) == XB.value(b_v, X.frames[host_v])


def perform(mesh: FramedMesh, X: Combing, data, subset=None,
            in_place: bool = False):
    """Replace the regions indexed by `subset` (default: all) and produce the
    surgered mesh with the combined field: X outside, each X_B inside.

    With in_place=True every datum's replacement must be the region submesh
    itself under the identity identification; the result then lives on the
    original mesh object with only the field values swapped, which lets
    fields before/after surgery be compared directly.
    """
    if subset is None:
        subset = range(len(data))
    idx = _check_regions(mesh, data, subset)
    if not idx:
        return mesh, X

    if in_place:
        vectors = dict(X.vectors)
        frames = dict(X.frames)
        for i in idx:
            d = data[i]
            B = d.replacement
            if B.meta.get("host") is not mesh:
                raise CombingForgeError("in-place surgery needs region submesh data")
            old_of_new = B.meta["vertex_map"]
            for b in B.cells.boundary_vertices:
                if not _combing_values_match(X, old_of_new[b], d.combing, b):
                    raise BoundaryMismatch(
                        f"replacement field disagrees with the host field at "
                        f"boundary vertex {old_of_new[b]}"
                    )
            for b in range(B.nv):
                if b in B.cells.boundary_vertices:
                    continue
                vectors[old_of_new[b]] = d.combing.vectors[b]
                frames[old_of_new[b]] = d.combing.frames[b]
        return mesh, Combing(mesh, vectors, dict(X.sigma) or None, frames)

    current, Xc = mesh, X
    vmap = {v: v for v in range(mesh.nv)}  # host vertex -> current vertex
    tmap = {t: t for t in range(len(mesh.tets))}
    for i in idx:
        d = data[i]
        name = d.region
        a_tets = current.regions[name]
        outside_tets = set(range(len(current.tets))) - set(a_tets)
        outside = submesh(current, outside_tets)
        sub_old = outside.meta["vertex_map"]
        sub_new = {o: n for n, o in enumerate(sub_old)}
        sub_t = {old: new for new, old in outside.meta["tet_map"].items()}
        h_cur = {}
        for host_v, b_v in d.h.vertex_map.items():
            cv = vmap.get(host_v, host_v) if host_v in vmap else host_v
            h_cur[sub_new[cv]] = b_v
        glued = glue(outside, d.replacement, BoundaryIdentification(h_cur))
        patch_vm = glued.meta["patch_vertex_map"]

        vectors, frames = {}, {}
        for n, o in enumerate(sub_old):
            vectors[n] = Xc.vectors[o]
            frames[n] = Xc.frames[o]
        for b in range(d.replacement.nv):
            g = patch_vm[b]
            if g < outside.nv:
                if not _combing_values_match(Xc, sub_old[g], d.combing, b):
                    raise BoundaryMismatch(
                        "replacement field disagrees with the host field on "
                        f"the identified boundary (replacement vertex {b})"
                    )
                continue
            vectors[g] = d.combing.vectors[b]
            frames[g] = d.combing.frames[b]
        sigma = {}
        for v, s in Xc.sigma.items():
            if v in sub_new:
                sigma[sub_new[v]] = s

        # transport product structures so canonical vertical circles survive
        products = {}
        for rname, info in (current.meta.get("products") or {}).items():
            if rname == name or rname not in glued.regions:
                continue
            tets_of = {t: sub_t[t] for t in current.regions[rname]}
            products[rname] = _remap_product(info, tets_of, lambda v: sub_new[v])
        for rname, info in (d.replacement.meta.get("products") or {}).items():
            ptm = glued.meta["patch_tet_map"]
            products[rname] = _remap_product(
                info, ptm, lambda v: patch_vm[v]
            )
        glued.meta["products"] = products

        vmap = {
            host_v: sub_new[cv]
            for host_v, cv in vmap.items()
            if cv in sub_new
        }
        tmap = {
            host_t: sub_t[ct] for host_t, ct in tmap.items() if ct in sub_t
        }
        current = glued
        Xc = Combing(current, vectors, sigma or None, frames)
    current.meta["vertex_map_from_host"] = vmap
    current.meta["tet_map_from_host"] = tmap
    return current, Xc


def _remap_product(info: dict, tmap: dict[int, int], vmap) -> dict:
    out = dict(info)
    out["prisms"] = {
        key: tuple(tmap[t] for t in tets) for key, tets in info["prisms"].items()
    }
    for key in ("center",):
        out[key] = [vmap(v) for v in info[key]]
    for key in ("mid", "outer"):
        out[key] = [[vmap(v) for v in row] for row in info[key]]
    return out


def torsion_check(mesh: FramedMesh, X: Combing,
                  sigma: dict[int, Vec3] | None = None, seed: int = 0) -> bool:
    """Whether the class of the normal Euler zero link vanishes rationally.

    On a rational homology sphere the first homology is trivial, so the
    class vanishes for every combing and no extraction is needed.
    """
    if betti(mesh, 1) == 0:
        return True
    link = euler_zero_chain(X, sigma, seed=seed)
    return homology_class_of_link(link, mesh).is_zero()


def _default_sigma(X: Combing, sub: FramedMesh) -> dict[int, Vec3]:
    out = {}
    old_of_new = sub.meta["vertex_map"]
    for v in sub.cells.boundary_vertices:
        out[v] = any_unit_orthogonal(X.vectors[old_of_new[v]])
    return out


def surgery_class(mesh: FramedMesh, X: Combing, datum: LPSurgeryDatum,
                  sigma: dict[int, Vec3] | None = None, seed: int = 0,
                  check: bool = False) -> HomologyClass:
    """The first homology class of the region measuring the Euler-class
    twist of the replacement: the replacement side's Euler zero class pulled
    back to the region through the boundary, minus the region side's own.

    Independent of the boundary section; with check=True this is verified by
    recomputing with a rotated section.
    """
    A = region_submesh(mesh, datum.region)
    B = datum.replacement
    X_A = restrict_combing(X, A)
    old_of_new = A.meta["vertex_map"]

    if sigma is None and datum.sigma is not None:
        sigma = datum.sigma
    if sigma is not None:
        sigma_a = {}
        for v in A.cells.boundary_vertices:
            s = sigma.get(old_of_new[v])
            if s is None:
                raise SigmaVanishes(f"sigma missing at boundary vertex {old_of_new[v]}")
            sigma_a[v] = s
    else:
        sigma_a = _default_sigma(X, A)

    def compute(sig_a):
        cls = _one_sided_class(mesh, X_A, A, B, datum, sig_a, seed)
        return cls

    result = compute(sigma_a)
    if check:
        rotated = {v: cross(X_A.vectors[v], s) for v, s in sigma_a.items()}
        again = compute(rotated)
        if not (result - again).is_zero():
            raise CombingForgeError(
                "surgery class is not independent of the boundary section"
            )
    return result


def _one_sided_class(mesh, X_A, A, B, datum, sigma_a, seed):
    old_of_new = A.meta["vertex_map"]
    # transport sigma through the identification to the replacement boundary
    sigma_b = {}
    for v in A.cells.boundary_vertices:
        host_v = old_of_new[v]
        b_v = datum.h.vertex_map.get(host_v)
        if b_v is None:
            raise NotCompatible(f"identification misses boundary vertex {host_v}")
        sigma_b[b_v] = sigma_a[v]

    link_a = euler_zero_chain(X_A, sigma_a, seed=seed)
    class_a = homology_class_of_link(link_a, A)
    link_b = euler_zero_chain(datum.combing, sigma_b, seed=seed)
    class_b = homology_class_of_link(link_b, B)

    # solve i^B_*(c) = class_b on the boundary surface of B
    surf_b = _surface_of(B)
    imap_b = induced_map_surface_to_mesh(surf_b, 1)
    cols = imap_b.matrix()
    nb = len(cols)
    rows = []
    rank_host = len(class_b.coordinates)
    for r in range(rank_host):
        row = {j: cols[j][r] for j in range(nb) if cols[j][r]}
        rows.append(row)
    solver = LinearSolver(rows)
    x = solver.solve({r: c for r, c in enumerate(class_b.coordinates) if c})
    if x is None:
        raise CombingForgeError("Euler class is not in the image of the boundary")
    sb = homology_basis(surf_b, 1)
    rep_b: dict[int, Fraction] = {}
    for j, c in x.items():
        for e, v in sb.reps[j].items():
            w = rep_b.get(e, Fraction(0)) + c * v
            if w:
                rep_b[e] = w
            else:
                rep_b.pop(e, None)

    # pull the boundary class back to the region side and include it
    surf_a = _surface_of(A)
    b_to_a = {}
    for v in A.cells.boundary_vertices:
        b_to_a[datum.h.vertex_map[old_of_new[v]]] = v
    rep_a = _push_surface_cycle(rep_b, surf_b, surf_a, b_to_a)
    imap_a = induced_map_surface_to_mesh(surf_a, 1)
    pulled = imap_a.apply(HomologyClass(surf_a, 1, rep_a))
    return pulled - class_a
