"""Exception hierarchy shared across the package.

Every error raised by the public API derives from :class:`CombingForgeError`
so callers (and the CLI) can distinguish "the input is bad" from genuine
bugs.  The more specific classes mirror the failure modes of the individual
pipeline stages: mesh validation, field extraction, linking-number
computation, surgery validation and the pseudo-parallelization model.
"""


class CombingForgeError(Exception):
    """Base class for all errors raised by this package."""


class IdentificationNotBijective(CombingForgeError):
    """A face identification or boundary identification is not a bijection."""


class OrientationIncompatible(CombingForgeError):
    """Glued faces do not carry opposite induced orientations."""


class NonInvariantUnderTransitions(CombingForgeError):
    """A per-vertex vector disagrees between region frames after applying
    the recorded transition rotations."""


class BoundaryNotE1(CombingForgeError):
    """A combing is required to equal the first frame vector on the boundary
    but does not."""


class SigmaVanishes(CombingForgeError):
    """The boundary section sigma has a vanishing projection where a nonzero
    one is required."""


class PerturbationFailed(CombingForgeError):
    """No perturbation in the retry schedule produced a non-degenerate
    configuration."""


class Degenerate(CombingForgeError):
    """A zero set, crossing or intersection is not transverse; the caller
    should perturb and retry."""


class NotNullHomologous(CombingForgeError):
    """A 1-cycle required to bound rationally does not."""


class LinksIntersect(CombingForgeError):
    """Two links handed to the linking-number routine share a point."""


class NotAHandlebody(CombingForgeError):
    """A region expected to be a rational homology handlebody is not one."""


class RegionsOverlap(CombingForgeError):
    """Surgery regions were required to be disjoint but share tetrahedra."""


class BoundaryMismatch(CombingForgeError):
    """A boundary identification does not match the combinatorics of the
    boundaries it is supposed to identify."""


class NotTorsion(CombingForgeError):
    """A combing whose relative Euler class must vanish rationally has a
    non-torsion Euler class."""


class ClassNotNullHomologous(CombingForgeError):
    """A homology class required to die in the ambient manifold does not."""


class NotCompatible(CombingForgeError):
    """Two pieces of data (combings, sections, identifications) disagree
    where they are required to agree."""


class LiftObstruction(CombingForgeError):
    """A path of rotations has no continuous lift to the unit quaternions
    with the required endpoints."""


class DegenerateZeroSet(CombingForgeError):
    """A zero set of a section is not a finite set of transverse points or
    a transverse curve, as required."""


class CurveHitsPole(CombingForgeError):
    """A curve on the 2-sphere passes through a pole of the chart used to
    compute winding data."""
