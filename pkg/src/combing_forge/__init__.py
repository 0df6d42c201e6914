"""Exact first-Pontrjagin-number variations of torsion combings on
triangulated compact oriented 3-manifolds.

Everything is computed over the rationals: meshes are framed simplicial
complexes with exact transition matrices, combings are rational unit vector
fields in per-vertex frames, and the invariants (p1 differences,
second-order variations under rational-homology-preserving replacements,
and the twisted-tube bracket) are returned as Fractions.
"""

from .builders import (
    genus2_handlebody,
    hopf_s3,
    hopf_s3_triple,
    s2xs1,
    solid_torus,
    two_tet_s3,
    vertical_circle,
)
from .coincidence import coincidence_link, euler_zero_chain, pair_is_generic
from .combing import (
    Combing,
    constant_combing,
    example_tube_combing,
    perturb_pair,
    random_combing,
)
from .errors import (
    CombingForgeError,
    Degenerate,
    DegenerateZeroSet,
    LiftObstruction,
    LinksIntersect,
    NotCompatible,
    NotNullHomologous,
    NotTorsion,
    PerturbationFailed,
)
from .homology import betti, is_qhh
from .invariants import (
    closed_alternating_sum,
    finite_type_check,
    homotopy_predicate,
    hopf_demo,
    p1_diff,
    pseudopar_bracket,
    second_order_variation,
)
from .linking import homology_class_of_link, linking_number, s2_linking
from .mesh import FramedMesh
from .pseudopar import (
    TwistedChartModel,
    build_empty_model,
    build_model,
    correction_curve,
    example_model_field,
    exceptional_link,
    meridian_degree,
    siamese_sections,
)
from .surgery import (
    LPSurgeryDatum,
    perform,
    region_submesh,
    restrict_combing,
    trivial_datum,
    validate_lp,
)

__all__ = [
    "Combing",
    "CombingForgeError",
    "Degenerate",
    "DegenerateZeroSet",
    "FramedMesh",
    "LPSurgeryDatum",
    "LiftObstruction",
    "LinksIntersect",
    "NotCompatible",
    "NotNullHomologous",
    "NotTorsion",
    "PerturbationFailed",
    "TwistedChartModel",
    "betti",
    "build_empty_model",
    "build_model",
    "closed_alternating_sum",
    "coincidence_link",
    "constant_combing",
    "correction_curve",
    "euler_zero_chain",
    "example_model_field",
    "example_tube_combing",
    "exceptional_link",
    "finite_type_check",
    "genus2_handlebody",
    "homology_class_of_link",
    "homotopy_predicate",
    "hopf_demo",
    "hopf_s3",
    "hopf_s3_triple",
    "is_qhh",
    "linking_number",
    "meridian_degree",
    "p1_diff",
    "pair_is_generic",
    "perform",
    "perturb_pair",
    "pseudopar_bracket",
    "random_combing",
    "region_submesh",
    "restrict_combing",
    "s2_linking",
    "s2xs1",
    "second_order_variation",
    "siamese_sections",
    "solid_torus",
    "trivial_datum",
    "two_tet_s3",
    "validate_lp",
    "vertical_circle",
]
