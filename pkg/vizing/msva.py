"""
Multi-Step Vizing Algorithm.

Starting from First Chain, each iteration either accepts the candidate
(path shorter than 2ℓ), or cuts its path at a random length in [ℓ, 2ℓ − 1],
shifts the coloring along the accepted prefix and asks Next Chain for the
following candidate. A candidate that runs into an earlier step sends the
run back to that step.

Shifts are applied to the caller's coloring and undone before returning, on
every exit path, so the caller always gets φ back unchanged and applies the
returned chain with ``augment``.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from utils.constants import MIN_ELL, Outcome
from utils.error_handlers import (
    InternalFailReached,
    InvariantViolation,
    IterationCapHit,
    NotShiftable,
    PreconditionViolated,
)
from vizing.chains import CandidateChain, first_chain, next_chain
from vizing.coloring import (
    BLANK,
    Fan,
    PartialColoring,
    PathChain,
    alternating_degree,
    concat,
    is_happy,
    shift_chain,
    unshift_chain,
)
from vizing.fans import FanScratch, FanStatus, fan_status, scratch_for
from vizing.records import RunRecord


# ==========================================
# VISITED INDEX
# ==========================================

class VisitedIndex:
    """
    Owner step of each marked vertex (fan vertices) and edge (internal path
    edges). A mark is live only while its stamp equals the current epoch.
    """

    __slots__ = ("vertex_owner", "vertex_stamp", "edge_owner", "edge_stamp", "epoch")

    def __init__(self, n: int, m: int):
        self.vertex_owner = [0] * n
        self.vertex_stamp = [0] * n
        self.edge_owner = [0] * m
        self.edge_stamp = [0] * m
        self.epoch = 0

    def fits(self, n: int, m: int) -> bool:
        return len(self.vertex_owner) >= n and len(self.edge_owner) >= m

    def reset(self):
        self.epoch += 1

    def vertex(self, v: int) -> Optional[int]:
        if self.vertex_stamp[v] == self.epoch:
            return self.vertex_owner[v]
        return None

    def edge(self, e: int) -> Optional[int]:
        if self.edge_stamp[e] == self.epoch:
            return self.edge_owner[e]
        return None

    def mark_step(self, step: int, fan_vertices: List[int], internal_edges: List[int]):
        for v in fan_vertices:
            self.vertex_stamp[v] = self.epoch
            self.vertex_owner[v] = step
        for e in internal_edges:
            self.edge_stamp[e] = self.epoch
            self.edge_owner[e] = step

    def clear_step(self, step: int, fan_vertices: List[int], internal_edges: List[int]):
        for v in fan_vertices:
            if self.vertex(v) == step:
                self.vertex_stamp[v] = 0
        for e in internal_edges:
            if self.edge(e) == step:
                self.edge_stamp[e] = 0

    def marked_vertices(self) -> Dict[int, int]:
        return {v: o for v, (o, s) in enumerate(zip(self.vertex_owner, self.vertex_stamp)) if s == self.epoch}

    def marked_edges(self) -> Dict[int, int]:
        return {e: o for e, (o, s) in enumerate(zip(self.edge_owner, self.edge_stamp)) if s == self.epoch}


_local = threading.local()


def visited_for(n: int, m: int) -> VisitedIndex:
    visited = getattr(_local, "visited", None)
    if visited is None or not visited.fits(n, m):
        visited = VisitedIndex(n, m)
        _local.visited = visited
    return visited


# ==========================================
# CHAIN TYPES
# ==========================================

@dataclass
class Step:
    """One accepted step F_k + P_k of the chain being built."""

    candidate: CandidateChain
    path: PathChain
    alpha: int
    beta: int
    shifted: List[int]

    @property
    def fan(self) -> Fan:
        return self.candidate.fan


@dataclass
class MultiStepChain:
    """F₀ + P₀ + ⋯ + F_{k−1} + P_{k−1}; the last pair is the accepted candidate."""

    start: int
    steps: List[Tuple[Fan, PathChain]] = field(default_factory=list)

    def edges(self) -> List[int]:
        parts: List[List[int]] = []
        for fan, path in self.steps:
            parts.append(fan.edges)
            parts.append(path.edges)
        return concat(*parts)

    def __len__(self) -> int:
        return len(self.edges())

    @property
    def end(self) -> int:
        return self.steps[-1][1].end

    def vertices(self) -> List[int]:
        out = []
        for fan, path in self.steps:
            out.extend(fan.vertices())
            out.extend(path.vertices)
        return out


@dataclass
class Intersection:
    step: int
    kind: str
    item: int


# ==========================================
# INTERSECTION CHECK
# ==========================================

def first_intersection(cand: CandidateChain, visited: VisitedIndex) -> Optional[Intersection]:
    """
    First marked element of ``cand`` in chain order.

    Order: pivot, then for each fan edge the edge and its leaf, then for each
    path edge after Start(path) the edge and the vertex it leads to.
    """
    owner = visited.vertex(cand.fan.pivot)
    if owner is not None:
        return Intersection(owner, "vertex", cand.fan.pivot)
    for f, leaf in zip(cand.fan.edges, cand.fan.leaves):
        owner = visited.edge(f)
        if owner is not None:
            return Intersection(owner, "edge", f)
        owner = visited.vertex(leaf)
        if owner is not None:
            return Intersection(owner, "vertex", leaf)
    path = cand.path
    for i in range(1, len(path.edges)):
        f = path.edges[i]
        owner = visited.edge(f)
        if owner is not None:
            return Intersection(owner, "edge", f)
        v = path.vertices[i + 1]
        owner = visited.vertex(v)
        if owner is not None:
            return Intersection(owner, "vertex", v)
    return None


def check_intersection(steps: List[Step], cand: CandidateChain, visited: VisitedIndex) -> Optional[int]:
    """Step index owning the first intersection of ``cand`` with the active steps."""
    hit = first_intersection(cand, visited)
    if hit is None:
        return None
    if not 0 <= hit.step < len(steps):
        raise InvariantViolation(
            "visited mark points at an inactive step",
            diagnostics={"step": hit.step, "active": len(steps)},
        )
    return hit.step


# ==========================================
# STATE MACHINE
# ==========================================

class MsvaRun:
    """
    One MSVA call on (φ, e, x).

    ``run`` returns the happy chain and its record, or raises
    IterationCapHit carrying the record. φ is unchanged afterwards either way.
    """

    def __init__(
        self,
        phi: PartialColoring,
        e: int,
        x: int,
        l: int,
        cap: int,
        rng: np.random.Generator,
        scratch: Optional[FanScratch] = None,
        visited: Optional[VisitedIndex] = None,
        validate_debug: bool = False,
        attempt: int = 1,
    ):
        g = phi.graph
        if phi.color[e] != BLANK:
            raise PreconditionViolated(f"edge {e} is colored")
        if x not in g.ends[e]:
            raise PreconditionViolated(f"vertex {x} is not an endpoint of edge {e}")
        if l < MIN_ELL:
            raise PreconditionViolated(f"ell must be at least {MIN_ELL}, got {l}")
        if cap < 1:
            raise PreconditionViolated(f"cap must be positive, got {cap}")

        self.phi = phi
        self.e = e
        self.x = x
        self.y = g.other(e, x)
        self.l = l
        self.cap = cap
        self.rng = rng
        self.scratch = scratch or scratch_for(g.n)
        self.visited = visited or visited_for(g.n, g.m)
        self.validate_debug = validate_debug
        self.origin = phi.copy() if validate_debug else None
        self.attempt = attempt

        self.steps: List[Step] = []
        self.d: List[int] = []
        self.cand: Optional[CandidateChain] = None

    # ==========================================
    # MAIN LOOP
    # ==========================================

    def run(self) -> Tuple[MultiStepChain, RunRecord]:
        self.visited.reset()
        try:
            self.cand = first_chain(self.phi, self.e, self.x, self.l, self.scratch)
            for it in range(1, self.cap + 1):
                if self.validate_debug:
                    self.audit()
                if len(self.cand.path) < 2 * self.l:
                    chain = self._chain()
                    return chain, self._record(it, Outcome.SUCCESS, len(chain))
                self.iterate()
        finally:
            self.rollback()
        raise IterationCapHit(self._record(self.cap, Outcome.ITERATION_CAP_HIT, 0))

    def iterate(self):
        """One pass of the loop body after the success test."""
        cand = self.cand
        l = self.l
        cut = l + int(self.rng.integers(l))
        path = cand.path.prefix(cut)
        beta = cand.path_color(cut - 1)
        alpha = cand.beta if beta == cand.alpha else cand.alpha

        shifted = concat(cand.fan.edges, path.edges)
        shift_chain(self.phi, shifted)
        k = len(self.steps)
        step = Step(cand, path, alpha, beta, shifted)
        self.steps.append(step)
        self.visited.mark_step(k, cand.fan.vertices(), path.internal_edges())

        u = path.vertices[-2]
        nxt = next_chain(self.phi, path.end, u, alpha, beta, l, self.scratch)

        hit = first_intersection(nxt, self.visited)
        if hit is not None:
            if self.validate_debug and hit.step == k and hit.kind != "vertex":
                raise InvariantViolation(
                    "intersection with the newest step is not at one of its fan vertices",
                    diagnostics={"step": k, "kind": hit.kind, "item": hit.item},
                )
            self.backtrack(hit.step)
            self.d.append(hit.step - k)
            return

        if 2 <= len(nxt.path) < 2 * l and nxt.path.vend == nxt.pivot:
            raise InternalFailReached(
                "next candidate is a short path returning to its pivot",
                diagnostics={
                    "edge": self.e,
                    "step": k,
                    "pivot": nxt.pivot,
                    "path": nxt.path.edges,
                    "d": list(self.d),
                },
            )

        self.d.append(1)
        self.cand = nxt

    def backtrack(self, j: int):
        """
        Return to step ``j``: unshift steps k..j, drop their marks and make
        (F_j, P′_j) the candidate again.
        """
        if not 0 <= j <= len(self.steps):
            raise PreconditionViolated(f"cannot backtrack to step {j} of {len(self.steps)}")
        if j == len(self.steps):
            return
        for i in range(len(self.steps) - 1, j - 1, -1):
            step = self.steps[i]
            unshift_chain(self.phi, step.shifted)
            self.visited.clear_step(i, step.fan.vertices(), step.path.internal_edges())
        self.cand = self.steps[j].candidate
        del self.steps[j:]

    def rollback(self):
        """Undo every active shift, restoring the caller's φ."""
        for step in reversed(self.steps):
            unshift_chain(self.phi, step.shifted)

    # ==========================================
    # RESULTS
    # ==========================================

    def _chain(self) -> MultiStepChain:
        pairs = [(s.fan, s.path) for s in self.steps]
        pairs.append((self.cand.fan, self.cand.path))
        return MultiStepChain(self.e, pairs)

    def terminus(self) -> Tuple[int, int]:
        if not self.steps:
            return (self.e, self.y)
        last = self.steps[-1].path
        return (last.end, last.vend)

    def _record(self, iterations: int, outcome: str, chain_length: int) -> RunRecord:
        return RunRecord(
            edge=self.e,
            attempt=self.attempt,
            iterations=iterations,
            d=list(self.d),
            terminus=self.terminus(),
            outcome=outcome,
            chain_length=chain_length,
        )

    # ==========================================
    # DEBUG AUDITS
    # ==========================================

    def audit(self):
        """Check the loop-head invariants and the per-step path structure."""
        cand = self.cand
        g = self.phi.graph

        if self.steps:
            last = self.steps[-1].path
            end, vend = last.end, last.vend
        else:
            end, vend = self.e, self.y
        if cand.fan.start != end or cand.fan.leaves[0] != vend:
            self._fail("candidate does not start where the chain ends", end=end, vend=vend)

        self._audit_non_intersecting()

        try:
            shift_chain(self.phi, cand.edges())
        except NotShiftable as exc:
            self._fail("candidate is not shiftable", step=exc.step)
        unshift_chain(self.phi, cand.edges())

        if cand.alpha == 0:
            shift_chain(self.phi, cand.fan.edges)
            happy = is_happy(self.phi, cand.fan.end)
            unshift_chain(self.phi, cand.fan.edges)
            if not happy:
                self._fail("bare candidate fan is not happy")
        else:
            status = fan_status(self.phi, cand.fan, cand.alpha, cand.beta)
            if status not in (FanStatus.HAPPY, FanStatus.SUCCESSFUL, FanStatus.DISAPPOINTED):
                self._fail("candidate fan is neither happy nor hopeful", status=status)
            if status == FanStatus.DISAPPOINTED and len(cand.path) != 2 * self.l:
                self._fail("disappointed candidate with a short path", length=len(cand.path))

        for i, step in enumerate(self.steps):
            if not self.l <= len(step.path) <= 2 * self.l - 1:
                self._fail("step path length outside [l, 2l-1]", step=i, length=len(step.path))
            if self.origin is not None:
                self._audit_against_origin(i, step)

    def _audit_against_origin(self, i: int, step: Step):
        """Step ``i`` read against the coloring the call started from."""
        a, b = step.candidate.alpha, step.candidate.beta
        if alternating_degree(self.origin, step.fan.vend, a, b) != 1:
            self._fail("vEnd of a step fan does not have alternating degree 1", step=i)
        for f in step.path.edges[1:]:
            if self.origin.color[f] not in (a, b):
                self._fail("step path edge not colored by its pair", step=i, edge=f)

    def _audit_non_intersecting(self):
        parts = [(s.fan, s.path) for s in self.steps] + [(self.cand.fan, self.cand.path)]
        for j in range(1, len(parts)):
            fan_j, path_j = parts[j]
            vertices_j = set(fan_j.vertices()) | set(path_j.vertices)
            edges_j = set(fan_j.edges) | set(path_j.edges)
            for i in range(j):
                fan_i, path_i = parts[i]
                if vertices_j & set(fan_i.vertices()):
                    self._fail("fan vertices of an earlier step reused", earlier=i, later=j)
                if edges_j & set(path_i.internal_edges()):
                    self._fail("internal path edges of an earlier step reused", earlier=i, later=j)

    def _fail(self, message: str, **diagnostics: Any):
        diagnostics.update({"edge": self.e, "steps": len(self.steps), "d": list(self.d)})
        raise InvariantViolation(message, diagnostics=diagnostics)


def msva(
    phi: PartialColoring,
    e: int,
    x: int,
    l: int,
    cap: int,
    rng: np.random.Generator,
    scratch: Optional[FanScratch] = None,
    visited: Optional[VisitedIndex] = None,
    validate_debug: bool = False,
    attempt: int = 1,
) -> Tuple[MultiStepChain, RunRecord]:
    """
    Happy multi-step Vizing chain starting at the uncolored edge ``e``.

    Raises:
        IterationCapHit: no chain within ``cap`` iterations (record attached).
        InternalFailReached: the failure branch was taken; always a bug.
    """
    run = MsvaRun(phi, e, x, l, cap, rng, scratch, visited, validate_debug, attempt)
    return run.run()
