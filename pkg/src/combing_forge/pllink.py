"""Oriented piecewise-linear links in per-tetrahedron barycentric
coordinates.

A segment runs through one tet from an entry point to an exit point, both
on open faces (exactly one zero barycentric coordinate, marking the face).
Segments chain head-to-tail across glued faces into closed loops; each loop
carries a rational multiplicity.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .errors import CombingForgeError

Bary = tuple[Fraction, Fraction, Fraction, Fraction]


@dataclass(frozen=True)
class Segment:
    tet: int
    entry: Bary
    exit: Bary

    def face_of(self, point: Bary) -> int:
        zeros = [i for i, c in enumerate(point) if c == 0]
        if len(zeros) != 1:
            raise CombingForgeError("link point is not on an open face")
        return zeros[0]


@dataclass
class Loop:
    segments: list[Segment]
    multiplicity: Fraction = Fraction(1)


@dataclass
class PLLink:
    loops: list[Loop] = field(default_factory=list)

    def is_empty(self) -> bool:
        return not self.loops

    def scaled(self, c) -> "PLLink":
        c = Fraction(c)
        return PLLink([Loop(l.segments, l.multiplicity * c) for l in self.loops])

    def reversed(self) -> "PLLink":
        out = []
        for l in self.loops:
            segs = [Segment(s.tet, s.exit, s.entry) for s in reversed(l.segments)]
            out.append(Loop(segs, l.multiplicity))
        return PLLink(out)

    def __add__(self, other: "PLLink") -> "PLLink":
        return PLLink(list(self.loops) + list(other.loops))

    def validate(self, mesh) -> None:
        """Check chaining: the exit of each segment lies on a glued face and
        matches the entry of the next segment across the identification."""
        glue_lookup = {}
        for a, b in mesh.face_glue:
            glue_lookup[a] = b
            glue_lookup[b] = a
        for loop in self.loops:
            n = len(loop.segments)
            if n == 0:
                raise CombingForgeError("empty loop")
            for i, seg in enumerate(loop.segments):
                nxt = loop.segments[(i + 1) % n]
                f_out = seg.face_of(seg.exit)
                partner = glue_lookup.get((seg.tet, f_out))
                if partner is None or partner[0] != nxt.tet:
                    raise CombingForgeError("loop does not chain across glued faces")
                # compare points by vertex id
                pt_out = point_by_vertex(mesh, seg.tet, seg.exit)
                pt_in = point_by_vertex(mesh, nxt.tet, nxt.entry)
                if pt_out != pt_in:
                    raise CombingForgeError("segment endpoints disagree across a face")


def point_by_vertex(mesh, tet: int, bary: Bary) -> dict[int, Fraction]:
    """Barycentric point keyed by global vertex ids (face-transportable)."""
    out = {}
    for i, c in enumerate(bary):
        if c:
            out[mesh.tets[tet][i]] = c
    return out


def transport_link(link: PLLink, tet_map: dict[int, int]) -> PLLink:
    """Reindex a link's tets (e.g. into a glued or extracted mesh). The
    barycentric data is unchanged because vertex order per tet is kept."""
    out = []
    for loop in link.loops:
        segs = [Segment(tet_map[s.tet], s.entry, s.exit) for s in loop.segments]
        out.append(Loop(segs, loop.multiplicity))
    return PLLink(out)
