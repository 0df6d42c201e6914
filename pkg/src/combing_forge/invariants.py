"""Variation formulas for the first Pontrjagin number of torsion combings:
first-order differences from coincidence links, the second-order surgery
variation, degree-two finite-type checks, the twisted-frame bracket with its
sphere correction term, and the homotopy predicate."""

from __future__ import annotations

from fractions import Fraction

from . import builders
from .coincidence import coincidence_link
from .combing import Combing, constant_combing, example_tube_combing, perturb_pair
from .errors import (
    ClassNotNullHomologous,
    CombingForgeError,
    Degenerate,
    LinksIntersect,
    NotTorsion,
    RegionsOverlap,
)
from .linking import homology_class_of_link, linking_number, s2_linking
from .mesh import FramedMesh
from .pllink import PLLink, transport_link
from .ratgeom import E1
from .surgery import (
    LPSurgeryDatum,
    perform,
    region_submesh,
    restrict_combing,
    surgery_class,
    torsion_check,
    trivial_datum,
)

_RETRY_SEEDS = 6


def p1_diff(X: Combing, Y: Combing, seed: int = 0,
            check_torsion: bool = True) -> Fraction:
    """p1 of Y minus p1 of X: four times the linking number of the locus
    where the fields agree with the locus where they are antipodal.

    The pair is perturbed to a generic one first; if the extracted links
    intersect or a degeneracy survives, the perturbation is retried with
    fresh seeds (link positions stay functions of the fields alone).
    """
    if check_torsion:
        if not torsion_check(X.mesh, X):
            raise NotTorsion("first field has non-torsion Euler class")
        if not torsion_check(Y.mesh, Y):
            raise NotTorsion("second field has non-torsion Euler class")
    last: Exception | None = None
    for k in range(_RETRY_SEEDS):
        try:
            Xp, Yp = perturb_pair(X, Y, seed=seed + 1009 * k)
            plus = coincidence_link(Xp, Yp, 1)
            minus = coincidence_link(Xp, Yp, -1)
            return 4 * linking_number(plus, minus, X.mesh)
        except (Degenerate, LinksIntersect) as exc:
            last = exc
    raise Degenerate(f"no generic configuration found: {last}")


def _core_class_in_region(mesh: FramedMesh, region: str):
    """Class of the canonical vertical circle of a product region, in the
    region's standalone homology."""
    A = region_submesh(mesh, region)
    inv = {old: new for new, old in A.meta["tet_map"].items()}
    core = builders.vertical_circle(mesh, region)
    return homology_class_of_link(transport_link(core, inv), A)


def _as_core_multiple(cls, core_cls) -> Fraction:
    """Solve cls = q * core_cls in coordinates; the surgery classes of
    product-region data are always core multiples."""
    q = None
    for a, b in zip(cls.coordinates, core_cls.coordinates):
        if b == 0:
            if a != 0:
                raise CombingForgeError("class is not a multiple of the core")
            continue
        r = Fraction(a, 1) / b
        if q is None:
            q = r
        elif q != r:
            raise CombingForgeError("class is not a multiple of the core")
    if q is None:
        raise CombingForgeError("core class vanishes; cannot take a multiple")
    return q


def second_order_variation(mesh: FramedMesh, X: Combing,
                           d1: LPSurgeryDatum, d2: LPSurgeryDatum,
                           seed: int = 0, check: bool = False) -> Fraction:
    """Second-order variation of p1 across two disjoint replacements:
    -2 times the linking number of the two surgery classes, represented by
    canonical circles in the two regions."""
    if d1.region == d2.region or (
        mesh.regions[d1.region] & mesh.regions[d2.region]
    ):
        raise RegionsOverlap("surgery regions must be disjoint")
    if not torsion_check(mesh, X, seed=seed):
        raise NotTorsion("the base field has non-torsion Euler class")
    qs, links = [], []
    for d, lam in ((d1, None), (d2, (Fraction(1, 2), Fraction(5, 16), Fraction(3, 16)))):
        cls = surgery_class(mesh, X, d, seed=seed, check=check)
        core_cls = _core_class_in_region(mesh, d.region)
        q = _as_core_multiple(cls, core_cls)
        qs.append(q)
        if q == 0:
            continue
        link = builders.vertical_circle(mesh, d.region, lam=lam, multiplicity=q)
        if not homology_class_of_link(link, mesh).is_zero():
            raise ClassNotNullHomologous(
                f"surgery class of region {d.region} does not vanish in the "
                "ambient manifold; the variation linking number is undefined"
            )
        links.append(link)
    if 0 in qs:
        return Fraction(0)
    return -2 * linking_number(links[0], links[1], mesh)


def closed_alternating_sum(mesh: FramedMesh, X: Combing,
                           d1: LPSurgeryDatum, d2: LPSurgeryDatum,
                           seed: int = 0, check: bool = False) -> Fraction:
    """The alternating sum of p1 over the four subsets of two in-place
    replacements, assembled from pairwise differences against the base
    field (the subset signs sum to zero, so only differences enter):
    (p1[X^{12}] - p1[X]) - (p1[X^{1}] - p1[X]) - (p1[X^{2}] - p1[X]).

    With check=True the second-order variation is computed independently
    and compared.
    """
    _, X1 = perform(mesh, X, [d1], in_place=True)
    _, X2 = perform(mesh, X, [d2], in_place=True)
    _, X12 = perform(mesh, X, [d1, d2], in_place=True)
    total = (
        p1_diff(X, X12, seed=seed)
        - p1_diff(X, X1, seed=seed)
        - p1_diff(X, X2, seed=seed)
    )
    if check:
        other = second_order_variation(mesh, X, d1, d2, seed=seed)
        if other != total:
            raise CombingForgeError(
                f"alternating sum {total} disagrees with the second-order "
                f"variation {other}"
            )
    return total


def _transport_datum(d: LPSurgeryDatum, vmap: dict[int, int]) -> LPSurgeryDatum:
    h = type(d.h)({vmap[v]: b for v, b in d.h.vertex_map.items()})
    sigma = None
    if d.sigma is not None:
        sigma = {vmap[v]: s for v, s in d.sigma.items()}
    return LPSurgeryDatum(d.region, d.replacement, h, d.combing, sigma)


def finite_type_check(mesh: FramedMesh, X: Combing, d1: LPSurgeryDatum,
                      d2: LPSurgeryDatum, d3: LPSurgeryDatum,
                      seed: int = 0) -> Fraction:
    """Degree-two finite-type property: the second-order variation across
    (d1, d2) computed before and after performing d3; the difference must
    vanish."""
    _check_pairwise_disjoint(mesh, (d1, d2, d3))
    before = second_order_variation(mesh, X, d1, d2, seed=seed)
    mesh3, X3 = perform(mesh, X, [d3])
    vmap = mesh3.meta["vertex_map_from_host"]
    after = second_order_variation(
        mesh3, X3, _transport_datum(d1, vmap), _transport_datum(d2, vmap),
        seed=seed,
    )
    return after - before


def _check_pairwise_disjoint(mesh, data):
    names = [d.region for d in data]
    if len(set(names)) != len(names):
        raise RegionsOverlap(f"duplicate surgery regions {names}")
    seen: set[int] = set()
    for d in data:
        tets = mesh.regions[d.region]
        if seen & tets:
            raise RegionsOverlap("surgery regions share tetrahedra")
        seen |= tets


def pseudopar_bracket(model, X: Combing, seed: int = 0) -> Fraction:
    """Bracket of a torsion field against the twisted double trivialization:
    four times the linking number of the half-sum coincidence links
    (1/2)(L_{E1d=X} + L_{E1g=X}) and (1/2)(L_{E1d=-X} + L_{E1g=-X}), minus
    the sphere linking of the field restricted to the exceptional locus.

    X must agree with the sections on the boundary and be generic against
    both, with the cross loci L_{E1d=X} vs L_{E1g=-X} (and the mirror pair)
    disjoint; the field is perturbed once per attempt and the same
    perturbation feeds all four links and the correction curves, so the
    result is a function of the field's homotopy class rel boundary.
    """
    from .coincidence import pair_is_generic
    from .errors import CurveHitsPole, NotCompatible, PerturbationFailed
    from .linking import _check_disjoint
    from .pseudopar import correction_curve, siamese_sections

    host = model.host
    if X.mesh is not host:
        raise CombingForgeError("field does not live on the model host")
    E1d, E1g = siamese_sections(model)
    if not (X.boundary_equal(E1d) and X.boundary_equal(E1g)):
        raise NotCompatible("field disagrees with the sections on the boundary")
    if not torsion_check(host, X, seed=seed):
        raise NotTorsion("the field has non-torsion Euler class")
    last: Exception | None = None
    crossing = False
    for k in range(_RETRY_SEEDS):
        s = seed + 1009 * k
        try:
            _, Xp = perturb_pair(E1d, X, seed=s)
            if not pair_is_generic(E1g, Xp):
                _, Xp = perturb_pair(E1g, Xp, seed=s + 37)
                if not pair_is_generic(E1d, Xp):
                    last = Degenerate("no perturbation generic for both sections")
                    continue
            links = {(sec, sign): coincidence_link(S, Xp, sign)
                     for sec, S in (("d", E1d), ("g", E1g))
                     for sign in (1, -1)}
            try:
                _check_disjoint(host, links[("d", 1)], links[("g", -1)])
                _check_disjoint(host, links[("g", 1)], links[("d", -1)])
            except LinksIntersect as exc:
                crossing = True
                last = exc
                continue
            plus = (links[("d", 1)] + links[("g", 1)]).scaled(Fraction(1, 2))
            minus = (links[("d", -1)] + links[("g", -1)]).scaled(Fraction(1, 2))
            if plus.is_empty() or minus.is_empty():
                lk = Fraction(0)
            else:
                lk = linking_number(plus, minus, host)
            correction = sum((s2_linking(curve)
                              for curve in correction_curve(model, Xp)),
                             Fraction(0))
            return 4 * lk - correction
        except (Degenerate, LinksIntersect, CurveHitsPole,
                PerturbationFailed) as exc:
            last = exc
    if crossing:
        raise NotCompatible(
            f"cross coincidence loci stay intersecting: {last}")
    raise Degenerate(f"no generic configuration found: {last}")


def homotopy_predicate(X: Combing, Y: Combing, seed: int = 0) -> bool:
    """Whether the p1 difference of two boundary-compatible torsion fields
    vanishes; a vanishing difference is the numeric criterion for the two
    fields being homotopic relative to the boundary."""
    return p1_diff(X, Y, seed=seed) == 0


def hopf_demo(seed: int = 0, p: int = 3, q: int = 3) -> dict:
    """End-to-end run of the two-tube example on the 3-sphere: builds the
    mesh, both tube replacements, and returns the variation computed both
    ways (the expected value is -8)."""
    mesh = builders.hopf_s3(p, q)
    X = constant_combing(mesh, E1)
    data = []
    for region in ("A1", "A2"):
        tube = example_tube_combing(mesh, region, base=X)
        B = region_submesh(mesh, region)
        data.append(trivial_datum(mesh, region, X, combing=restrict_combing(tube, B)))
    variation = second_order_variation(mesh, X, data[0], data[1], seed=seed)
    alt = closed_alternating_sum(mesh, X, data[0], data[1], seed=seed)
    return {
        "mesh_tets": len(mesh.tets),
        "variation": variation,
        "alternating_sum": alt,
        "agree": variation == alt,
    }
