"""Exact rational simplicial homology for meshes and surfaces.

Bases are computed once per complex and cached (write-once) on the complex's
chain data.  A homology basis at degree k is stored as an `Echelon` whose
rows span cycles modulo boundaries, with tags tracking coordinates in the
chosen basis; expressing an arbitrary cycle in the basis is a forward
reduction.
"""

from __future__ import annotations

from fractions import Fraction

from .errors import CombingForgeError, NotAHandlebody
from .mesh import ChainComplexData, FramedMesh, SurfaceComplex
from .sparselin import Echelon, nullspace, rref


def _cc(host) -> ChainComplexData:
    return host.chain_complex() if not isinstance(host, ChainComplexData) else host


class HomologyBasis:
    """Basis of H_k(host; Q): representative cycles plus the echelon
    structure needed to coordinate arbitrary cycles."""

    def __init__(self, host, degree: int):
        self.host = host
        self.degree = degree
        cc = _cc(host)
        k = degree
        ncells = cc.dims.get(k, 0)
        bnd_k = cc.bnd.get(k)
        if bnd_k is None:  # top+1 or degree 0: cycles are everything
            rows: list[dict[int, Fraction]] = []
        else:
            # rows of the matrix are (k-1)-cells; build row-wise
            rows_by_cell: dict[int, dict[int, Fraction]] = {}
            for j in range(ncells):
                for i, v in bnd_k[j].items():
                    rows_by_cell.setdefault(i, {})[j] = v
            rows = list(rows_by_cell.values())
        cycles = nullspace(rows, ncells)

        self.echelon = Echelon()
        bnd_up = cc.bnd.get(k + 1, [])
        for col in bnd_up:
            if col:
                self.echelon.insert(dict(col))
        self.reps: list[dict[int, Fraction]] = []
        for z in cycles:
            tag = {len(self.reps): Fraction(1)}
            if self.echelon.insert(z, tag):
                self.reps.append(z)

    @property
    def rank(self) -> int:
        return len(self.reps)

    def coordinates(self, chain: dict[int, Fraction]) -> list[Fraction]:
        """Coordinates of a cycle in this basis; raises if the chain is not
        a cycle in the span (it always is, for genuine cycles)."""
        residue, tag = self.echelon.reduce(chain)
        if residue:
            raise CombingForgeError("chain is not a cycle of this complex")
        # the reduction writes chain = -sum(tagged rows); coordinates flip sign
        return [-tag.get(i, Fraction(0)) for i in range(len(self.reps))]


def homology_basis(host, degree: int) -> HomologyBasis:
    cc = _cc(host)
    key = ("homology_basis", degree)
    if key not in cc.cache:
        cc.cache[key] = HomologyBasis(host, degree)
    return cc.cache[key]


def betti(host, degree: int) -> int:
    return homology_basis(host, degree).rank


class HomologyClass:
    """A degree-k rational homology class of a host complex."""

    def __init__(self, host, degree: int, representative: dict[int, Fraction]):
        self.host = host
        self.degree = degree
        self.representative = {i: Fraction(c) for i, c in representative.items() if c}
        self.coordinates = homology_basis(host, degree).coordinates(self.representative)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, HomologyClass)
            and self.host is other.host
            and self.degree == other.degree
            and self.coordinates == other.coordinates
        )

    def is_zero(self) -> bool:
        return all(c == 0 for c in self.coordinates)

    def __add__(self, other: "HomologyClass") -> "HomologyClass":
        rep = dict(self.representative)
        for i, c in other.representative.items():
            w = rep.get(i, Fraction(0)) + c
            if w:
                rep[i] = w
            else:
                rep.pop(i, None)
        return HomologyClass(self.host, self.degree, rep)

    def __sub__(self, other: "HomologyClass") -> "HomologyClass":
        return self + other.scaled(-1)

    def scaled(self, c) -> "HomologyClass":
        c = Fraction(c)
        return HomologyClass(
            self.host, self.degree, {i: c * v for i, v in self.representative.items()}
        )

    def __repr__(self) -> str:
        return f"HomologyClass(deg={self.degree}, coords={[str(c) for c in self.coordinates]})"


class InducedMap:
    """Inclusion-induced map on degree-k homology, as an exact matrix from
    the basis of `sub` to the basis of `host`.

    cell_map sends a k-cell index of `sub` to the corresponding k-cell index
    of `host` (orientation signs are +1 because both sides orient cells by
    sorted vertex ids and inclusions preserve ids).
    """

    def __init__(self, sub, host, degree: int, cell_map):
        self.sub = sub
        self.host = host
        self.degree = degree
        self.cell_map = list(cell_map)
        sb = homology_basis(sub, degree)
        self.columns: list[list[Fraction]] = []
        for rep in sb.reps:
            pushed = self.push_chain(rep)
            self.columns.append(homology_basis(host, degree).coordinates(pushed))

    def push_chain(self, chain: dict[int, Fraction]) -> dict[int, Fraction]:
        out: dict[int, Fraction] = {}
        for i, c in chain.items():
            j = self.cell_map[i]
            w = out.get(j, Fraction(0)) + c
            if w:
                out[j] = w
            else:
                out.pop(j, None)
        return out

    def apply(self, cls: HomologyClass) -> HomologyClass:
        if cls.host is not self.sub or cls.degree != self.degree:
            raise CombingForgeError("class does not live on the map's source")
        return HomologyClass(self.host, self.degree, self.push_chain(cls.representative))

    def matrix(self) -> list[list[Fraction]]:
        """Columns indexed by sub-basis elements, rows by host basis."""
        return self.columns

    def kernel_basis(self) -> list[HomologyClass]:
        """Basis of the kernel, as classes on `sub`."""
        nsub = len(self.columns)
        rows: list[dict[int, Fraction]] = []
        nhost = len(self.columns[0]) if self.columns else 0
        for r in range(nhost):
            row = {j: self.columns[j][r] for j in range(nsub) if self.columns[j][r]}
            if row:
                rows.append(row)
        kern = nullspace(rows, nsub)
        sb = homology_basis(self.sub, self.degree)
        out = []
        for vec in kern:
            rep: dict[int, Fraction] = {}
            for j, c in vec.items():
                for i, v in sb.reps[j].items():
                    w = rep.get(i, Fraction(0)) + c * v
                    if w:
                        rep[i] = w
                    else:
                        rep.pop(i, None)
            out.append(HomologyClass(self.sub, self.degree, rep))
        return out


def surface_into_mesh_map(surface: SurfaceComplex, degree: int = 1):
    """Cell map of the inclusion of a boundary surface into its mesh."""
    if surface.mesh is None:
        raise CombingForgeError("surface is not a boundary surface of a mesh")
    if degree == 1:
        return surface.edge_map
    if degree == 2:
        return surface.face_map
    raise CombingForgeError("unsupported degree")


def induced_map_surface_to_mesh(surface: SurfaceComplex, degree: int = 1) -> InducedMap:
    return InducedMap(surface, surface.mesh, degree, surface_into_mesh_map(surface, degree))


def induced_map_submesh(sub: FramedMesh, degree: int = 1) -> InducedMap:
    """Induced map of a submesh (built by meshops.submesh) into its host."""
    host = sub.meta.get("host")
    if host is None:
        raise CombingForgeError("mesh was not extracted from a host")
    if degree == 1:
        cmap = sub.meta["edge_cell_map"]
    elif degree == 2:
        cmap = sub.meta["face_cell_map"]
    else:
        raise CombingForgeError("unsupported degree")
    return InducedMap(sub, host, degree, cmap)


def is_qhh(mesh: FramedMesh) -> tuple[bool, int]:
    """Whether the mesh has the rational homology of a genus-g handlebody
    (connected, one boundary component); returns (answer, genus)."""
    comps = mesh.boundary_components()
    if len(comps) != 1:
        return False, -1
    g = comps[0].genus()
    ok = (
        betti(mesh, 0) == 1
        and betti(mesh, 1) == g
        and betti(mesh, 2) == 0
        and betti(mesh, 3) == 0
    )
    return ok, g


class Lagrangian:
    """ker(H_1(dA;Q) -> H_1(A;Q)) for a rational homology handlebody A."""

    def __init__(self, surface: SurfaceComplex, basis: list[HomologyClass]):
        self.surface = surface
        self.basis = basis

    def contains(self, cls: HomologyClass) -> bool:
        ech = Echelon()
        for b in self.basis:
            ech.insert({i: c for i, c in enumerate(b.coordinates) if c})
        res, _ = ech.reduce({i: c for i, c in enumerate(cls.coordinates) if c})
        return not res

    def equals_span(self, other: "Lagrangian") -> bool:
        if len(self.basis) != len(other.basis):
            return False
        return all(self.contains(b) for b in other.basis) and all(
            other.contains(b) for b in self.basis
        )


def lagrangian_of(mesh: FramedMesh) -> Lagrangian:
    ok, g = is_qhh(mesh)
    if not ok:
        raise NotAHandlebody("mesh does not have handlebody rational homology")
    surface = mesh.boundary_components()[0]
    imap = induced_map_surface_to_mesh(surface, 1)
    kern = imap.kernel_basis()
    if len(kern) != g:
        raise NotAHandlebody(
            f"kernel dimension {len(kern)} does not match the genus {g}"
        )
    return Lagrangian(surface, kern)


_FORM_SIGN = 1  # global sign convention; pinned by the meridian-longitude test


def intersection_form(surface: SurfaceComplex):
    """(basis of H_1(surface;Q), matrix of the intersection pairing).

    Computed as a simplicial cup product of dual cocycles evaluated on the
    fundamental class; exact and antisymmetric on homology.
    """
    cc = surface.chain_complex()
    hb = homology_basis(surface, 1)
    n = hb.rank
    ne = cc.dims[1]
    # cocycles: functions on edges with zero coboundary; coboundary matrix
    # rows are triangles
    rows = [dict(col) for col in cc.bnd[2]]
    cocycles = nullspace(rows, ne)
    # Gram matrix <cocycle_a, cycle_j>
    gram: list[dict[int, Fraction]] = []
    for a, zeta in enumerate(cocycles):
        row = {}
        for j, rep in enumerate(hb.reps):
            val = sum((zeta.get(e, Fraction(0)) * c for e, c in rep.items()), Fraction(0))
            if val:
                row[j] = val
        gram.append(row)
    # choose duals: zeta_i = sum_a C[i][a] cocycles[a] with <zeta_i, z_j> = delta_ij
    # solve the transposed system by echelon on gram rows with tags
    ech = Echelon()
    for a, row in enumerate(gram):
        ech.insert(row, {a: Fraction(1)})
    duals: list[dict[int, Fraction]] = []
    for i in range(n):
        res, tag = ech.reduce({i: Fraction(1)})
        if res:
            raise CombingForgeError("intersection pairing is degenerate")
        zeta: dict[int, Fraction] = {}
        for a, c in tag.items():
            for e, v in cocycles[a].items():
                w = zeta.get(e, Fraction(0)) - c * v
                if w:
                    zeta[e] = w
                else:
                    zeta.pop(e, None)
        duals.append(zeta)

    def cup_eval(zeta, eta) -> Fraction:
        total = Fraction(0)
        for k, (p, q, r) in enumerate(surface.triangles):
            eqr, epr, epq = surface.tri_edges[k]
            # orientations of edge cells are min->max on ids; on the ordered
            # triple (p<q<r) the cup product is zeta(pq) * eta(qr)
            total += surface.tri_signs[k] * zeta.get(epq, Fraction(0)) * eta.get(eqr, Fraction(0))
        return total

    mat = [[_FORM_SIGN * cup_eval(duals[i], duals[j]) for j in range(n)] for i in range(n)]
    return hb, mat


def pair_class_with_form(hb: HomologyBasis, mat, x: HomologyClass, y: HomologyClass) -> Fraction:
    total = Fraction(0)
    for i, a in enumerate(x.coordinates):
        if not a:
            continue
        for j, b in enumerate(y.coordinates):
            if b:
                total += a * mat[i][j]
    return total
