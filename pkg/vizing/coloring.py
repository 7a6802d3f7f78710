"""
Partial edge colorings and the chain mechanics built on them.

Colors are 1..Δ+1 and ``BLANK`` (0) marks an uncolored edge. For every vertex
the coloring keeps a bitmask of present colors and a slot table mapping
``(vertex, color)`` to the edge carrying that color, so missing-color queries
and color lookups at a vertex are O(1).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from pydantic import BaseModel

from utils.constants import BLANK_TOKEN
from utils.error_handlers import (
    DegreeTwoStart,
    EmptyMissingSet,
    MalformedLine,
    NotHappy,
    NotShiftable,
    PreconditionViolated,
)
from vizing.graph import Graph

BLANK = 0
NO_EDGE = -1


def lowest_color(mask: int) -> int:
    """Smallest color whose bit is set in ``mask`` (mask must be nonzero)."""
    return (mask & -mask).bit_length() - 1


def colors_in(mask: int) -> List[int]:
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return out


class PartialColoring:
    """
    Mutable proper partial (Δ+1)-edge-coloring of a fixed graph.

    ``delta`` is the palette parameter: colors run over 1..delta+1. It
    defaults to ``max(g.max_degree, 2)``.
    """

    __slots__ = ("graph", "delta", "num_colors", "color", "slot", "present", "uncolored_count", "_full", "_stride")

    def __init__(self, graph: Graph, delta: Optional[int] = None):
        self.graph = graph
        self.delta = max(graph.max_degree, 2) if delta is None else delta
        self.num_colors = self.delta + 1
        self._stride = self.num_colors + 1
        self._full = ((1 << (self.num_colors + 1)) - 1) & ~1
        self.color: List[int] = [BLANK] * graph.m
        self.slot: List[int] = [NO_EDGE] * (graph.n * self._stride)
        self.present: List[int] = [0] * graph.n
        self.uncolored_count = graph.m

    # ==========================================
    # QUERIES
    # ==========================================

    def get(self, e: int) -> int:
        return self.color[e]

    def edge_at(self, v: int, c: int) -> int:
        """Edge at ``v`` colored ``c``, or NO_EDGE."""
        return self.slot[v * self._stride + c]

    def missing_mask(self, v: int) -> int:
        return self._full & ~self.present[v]

    def is_missing(self, v: int, c: int) -> bool:
        return not (self.present[v] >> c) & 1

    def missing(self, v: int) -> List[int]:
        return colors_in(self.missing_mask(v))

    def uncolored_edges(self) -> List[int]:
        return [e for e, c in enumerate(self.color) if c == BLANK]

    # ==========================================
    # LOW-LEVEL MUTATION
    # ==========================================

    def _put(self, e: int, c: int):
        u, v = self.graph.ends[e]
        self.color[e] = c
        bit = 1 << c
        self.present[u] |= bit
        self.present[v] |= bit
        self.slot[u * self._stride + c] = e
        self.slot[v * self._stride + c] = e
        self.uncolored_count -= 1

    def _take(self, e: int) -> int:
        c = self.color[e]
        u, v = self.graph.ends[e]
        bit = ~(1 << c)
        self.present[u] &= bit
        self.present[v] &= bit
        self.slot[u * self._stride + c] = NO_EDGE
        self.slot[v * self._stride + c] = NO_EDGE
        self.color[e] = BLANK
        self.uncolored_count += 1
        return c

    def assign(self, e: int, c: int):
        """Color an uncolored edge, checking properness."""
        if not 1 <= c <= self.num_colors:
            raise PreconditionViolated(f"color {c} outside palette 1..{self.num_colors}")
        if self.color[e] != BLANK:
            raise PreconditionViolated(f"edge {e} already colored {self.color[e]}")
        u, v = self.graph.ends[e]
        if not (self.is_missing(u, c) and self.is_missing(v, c)):
            raise PreconditionViolated(f"color {c} not missing at both ends of edge {e}")
        self._put(e, c)

    def clear(self, e: int):
        if self.color[e] != BLANK:
            self._take(e)

    # ==========================================
    # COPIES AND COMPARISON
    # ==========================================

    def copy(self) -> "PartialColoring":
        other = PartialColoring.__new__(PartialColoring)
        other.graph = self.graph
        other.delta = self.delta
        other.num_colors = self.num_colors
        other._stride = self._stride
        other._full = self._full
        other.color = list(self.color)
        other.slot = list(self.slot)
        other.present = list(self.present)
        other.uncolored_count = self.uncolored_count
        return other

    def colors(self) -> Tuple[int, ...]:
        return tuple(self.color)

    def __eq__(self, other) -> bool:
        if not isinstance(other, PartialColoring):
            return NotImplemented
        return self.graph is other.graph and self.color == other.color

    def __repr__(self) -> str:
        return (
            f"PartialColoring(m={self.graph.m}, palette={self.num_colors}, "
            f"uncolored={self.uncolored_count})"
        )

    @classmethod
    def from_colors(
        cls,
        graph: Graph,
        colors: Sequence[int],
        delta: Optional[int] = None,
        checked: bool = True,
    ) -> "PartialColoring":
        """
        Load a color list.

        With ``checked=False`` improper or out-of-palette colors are stored
        as given so that ``validate`` can report them.
        """
        phi = cls(graph, delta)
        for e, c in enumerate(colors):
            if c == BLANK:
                continue
            if checked:
                phi.assign(e, c)
            elif 1 <= c <= phi.num_colors:
                phi._put(e, c)
            else:
                phi.color[e] = c
                phi.uncolored_count -= 1
        return phi


# ==========================================
# CHAIN OBJECTS
# ==========================================

@dataclass
class Fan:
    """Edges pivot–leaves[i]; ``edges[0]`` is the uncolored start edge."""

    pivot: int
    leaves: List[int]
    edges: List[int]

    def __len__(self) -> int:
        return len(self.edges)

    @property
    def start(self) -> int:
        return self.edges[0]

    @property
    def end(self) -> int:
        return self.edges[-1]

    @property
    def vend(self) -> int:
        return self.leaves[-1]

    def prefix(self, j: int) -> "Fan":
        return Fan(self.pivot, self.leaves[:j], self.edges[:j])

    def vertices(self) -> List[int]:
        return [self.pivot, *self.leaves]


@dataclass
class PathChain:
    """
    Start edge followed by a path.

    ``vertices`` is ``[vstart, y, x2, ..., vend]``; edge ``i`` joins
    ``vertices[i]`` and ``vertices[i + 1]``.
    """

    edges: List[int]
    vertices: List[int]
    truncated: bool = False

    def __len__(self) -> int:
        return len(self.edges)

    @property
    def start(self) -> int:
        return self.edges[0]

    @property
    def end(self) -> int:
        return self.edges[-1]

    @property
    def vstart(self) -> int:
        return self.vertices[0]

    @property
    def vend(self) -> int:
        return self.vertices[-1]

    def prefix(self, j: int) -> "PathChain":
        """Initial segment with ``j`` edges."""
        return PathChain(self.edges[:j], self.vertices[: j + 1], j < len(self.edges) or self.truncated)

    def internal_edges(self) -> List[int]:
        return self.edges[1:-1]

    def internal_vertices(self) -> List[int]:
        # Vertices not incident to the first or last edge.
        if len(self.edges) < 3:
            return []
        outer = {self.vertices[0], self.vertices[1], self.vertices[-2], self.vertices[-1]}
        return [v for v in self.vertices[2:-2] if v not in outer]


def concat(*chains: Sequence[int]) -> List[int]:
    """Sum of chains whose consecutive ends and starts coincide."""
    out: List[int] = []
    for chain in chains:
        chain = list(chain)
        if out and chain:
            if out[-1] != chain[0]:
                raise PreconditionViolated(f"cannot join chains: {out[-1]} != {chain[0]}")
            out.extend(chain[1:])
        else:
            out.extend(chain)
    return out


def reverse_chain(chain: Sequence[int]) -> List[int]:
    return list(reversed(chain))


# ==========================================
# MISSING COLORS
# ==========================================

def missing_min(phi: PartialColoring, x: int, exclude: Optional[int] = None) -> int:
    """
    Smallest color missing at ``x``, optionally ignoring ``exclude``.

    Raises:
        EmptyMissingSet: ``exclude`` removed the only missing color.
    """
    mask = phi.missing_mask(x)
    if exclude is not None:
        mask &= ~(1 << exclude)
    if not mask:
        raise EmptyMissingSet(f"no missing color at vertex {x} besides {exclude}")
    return lowest_color(mask)


def is_happy(phi: PartialColoring, e: int) -> bool:
    """Uncolored edge whose endpoints share a missing color."""
    u, v = phi.graph.ends[e]
    return phi.color[e] == BLANK and bool(phi.missing_mask(u) & phi.missing_mask(v))


def alternating_degree(phi: PartialColoring, v: int, alpha: int, beta: int) -> int:
    """deg(v; φ, αβ)"""
    return (phi.edge_at(v, alpha) != NO_EDGE) + (phi.edge_at(v, beta) != NO_EDGE)


def are_related(phi: PartialColoring, u: int, v: int, alpha: int, beta: int) -> bool:
    """
    Whether ``u`` and ``v`` lie on the same αβ-path.

    ``u`` must be a path end (αβ-degree below 2).
    """
    if u == v:
        return True
    g = phi.graph
    cur, prev_edge = u, NO_EDGE
    for _ in range(g.m + 1):
        nxt = NO_EDGE
        for c in (alpha, beta):
            e = phi.edge_at(cur, c)
            if e != NO_EDGE and e != prev_edge:
                nxt = e
                break
        if nxt == NO_EDGE:
            return False
        cur = g.other(nxt, cur)
        prev_edge = nxt
        if cur == v:
            return True
    return False


# ==========================================
# SHIFT AND AUGMENT
# ==========================================

def shift_pair(phi: PartialColoring, e0: int, e1: int, step: int = 0) -> PartialColoring:
    """
    Move the color of ``e1`` onto the uncolored adjacent edge ``e0``.

    Raises:
        NotShiftable: the pair is not φ-shiftable.
    """
    g = phi.graph
    if phi.color[e0] != BLANK:
        raise NotShiftable(f"edge {e0} is colored", step=step)
    c = phi.color[e1]
    if c == BLANK:
        raise NotShiftable(f"edge {e1} is uncolored", step=step)
    x = g.shared_vertex(e0, e1)
    if x is None or e0 == e1:
        raise NotShiftable(f"edges {e0} and {e1} are not adjacent", step=step)
    y = g.other(e0, x)
    if not phi.is_missing(y, c):
        raise NotShiftable(f"color {c} present at vertex {y}", step=step)
    phi._take(e1)
    phi._put(e0, c)
    return phi


def shift_chain(phi: PartialColoring, chain: Sequence[int]) -> PartialColoring:
    """
    Shift colors one step toward the start of ``chain``.

    All or nothing: on failure at step ``i`` the pairs already shifted are
    undone before NotShiftable(step=i) propagates.
    """
    done = 0
    try:
        for i in range(len(chain) - 1):
            shift_pair(phi, chain[i], chain[i + 1], step=i)
            done = i + 1
    except NotShiftable:
        for i in range(done - 1, -1, -1):
            c = phi._take(chain[i])
            phi._put(chain[i + 1], c)
        raise
    return phi


def unshift_chain(phi: PartialColoring, chain: Sequence[int]) -> PartialColoring:
    """Undo ``shift_chain(phi, chain)``."""
    return shift_chain(phi, list(reversed(chain)))


def augment(phi: PartialColoring, chain: Sequence[int]) -> int:
    """
    Shift a φ-happy chain and color its last edge.

    Returns:
        The color given to End(chain): the smallest common missing color.

    Raises:
        NotHappy: End(chain) has no common missing color after shifting; the
            coloring is rolled back.
    """
    shift_chain(phi, chain)
    end = chain[-1]
    u, v = phi.graph.ends[end]
    common = phi.missing_mask(u) & phi.missing_mask(v)
    if not common:
        unshift_chain(phi, chain)
        raise NotHappy(f"edge {end} has no common missing color after shifting")
    c = lowest_color(common)
    phi._put(end, c)
    return c


# ==========================================
# ALTERNATING PATHS
# ==========================================

def walk_alternating(
    phi: PartialColoring,
    start_edge: int,
    from_vertex: int,
    alpha: int,
    beta: int,
    cap: Optional[int] = None,
) -> PathChain:
    """
    Path chain P(start_edge; φ, αβ) leaving ``from_vertex`` on an α edge.

    At most ``cap`` edges are returned, counting ``start_edge``; ``truncated``
    is set when the maximal path is longer than that.

    Raises:
        DegreeTwoStart: ``from_vertex`` already has both α and β edges.
    """
    g = phi.graph
    if alternating_degree(phi, from_vertex, alpha, beta) >= 2:
        raise DegreeTwoStart(f"vertex {from_vertex} has both colors {alpha} and {beta}")
    limit = g.m + 1 if cap is None else cap

    edges = [start_edge]
    vertices = [g.other(start_edge, from_vertex), from_vertex]
    cur, want, other = from_vertex, alpha, beta
    truncated = False
    while True:
        e = phi.edge_at(cur, want)
        if e == NO_EDGE:
            break
        if len(edges) >= limit:
            truncated = True
            break
        cur = g.other(e, cur)
        edges.append(e)
        vertices.append(cur)
        want, other = other, want
    return PathChain(edges, vertices, truncated)


# ==========================================
# VALIDATION AND SERIALIZATION
# ==========================================

class ValidationReport(BaseModel):
    valid: bool
    uncolored: int
    colors_used: int
    max_color: int
    conflicts: List[Tuple[int, int]] = []
    out_of_palette: List[int] = []
    slot_desyncs: List[str] = []

    @property
    def violations(self) -> int:
        return len(self.conflicts) + len(self.out_of_palette) + len(self.slot_desyncs)


def validate(g: Graph, phi: PartialColoring) -> ValidationReport:
    """
    Full-scan audit of a coloring against its graph.

    Violations are returned as data: adjacent same-colored pairs, colors above
    Δ+1, and slot/bitmask entries that disagree with the edge colors.
    """
    conflicts = []
    out_of_palette = []
    desyncs = []
    used = set()

    for e, c in enumerate(phi.color):
        if c == BLANK:
            continue
        used.add(c)
        if not 1 <= c <= phi.num_colors:
            out_of_palette.append(e)

    for v in range(g.n):
        by_color: Dict[int, int] = {}
        expected_present = 0
        for _, e in g.adj[v]:
            c = phi.color[e]
            if c == BLANK:
                continue
            if 1 <= c <= phi.num_colors:
                expected_present |= 1 << c
            if c in by_color:
                first = by_color[c]
                conflicts.append((min(first, e), max(first, e)))
            else:
                by_color[c] = e
        for c, e in by_color.items():
            if 0 < c <= phi.num_colors and phi.edge_at(v, c) != e:
                desyncs.append(f"slot({v},{c}) = {phi.edge_at(v, c)}, expected {e}")
        for c in range(1, phi.num_colors + 1):
            if c not in by_color and phi.edge_at(v, c) != NO_EDGE:
                desyncs.append(f"slot({v},{c}) = {phi.edge_at(v, c)}, expected empty")
        if phi.present[v] != expected_present:
            desyncs.append(f"present mask at {v} out of sync")

    uncolored = sum(1 for c in phi.color if c == BLANK)
    if uncolored != phi.uncolored_count:
        desyncs.append(f"uncolored_count {phi.uncolored_count} != {uncolored}")

    conflicts = sorted(set(conflicts))
    return ValidationReport(
        valid=not (conflicts or out_of_palette or desyncs),
        uncolored=uncolored,
        colors_used=len(used),
        max_color=max(used, default=0),
        conflicts=conflicts,
        out_of_palette=out_of_palette,
        slot_desyncs=desyncs,
    )


def format_coloring(phi: PartialColoring) -> str:
    """``edge_id color`` per line, ``-`` for blank."""
    lines = [
        f"{e} {c if c != BLANK else BLANK_TOKEN}" for e, c in enumerate(phi.color)
    ]
    return "\n".join(lines) + ("\n" if lines else "")


def parse_coloring(g: Graph, text: str, delta: Optional[int] = None) -> PartialColoring:
    colors = [BLANK] * g.m
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 2:
            raise MalformedLine(f"expected 'edge color', got {line!r}", line_no=line_no)
        try:
            e = int(parts[0])
            c = BLANK if parts[1] == BLANK_TOKEN else int(parts[1])
        except ValueError:
            raise MalformedLine(f"non-integer field in {line!r}", line_no=line_no)
        if c < 0:
            raise MalformedLine(f"negative color in {line!r}", line_no=line_no)
        if not 0 <= e < g.m:
            raise MalformedLine(f"edge {e} out of range", line_no=line_no)
        colors[e] = c
    return PartialColoring.from_colors(g, colors, delta, checked=False)
