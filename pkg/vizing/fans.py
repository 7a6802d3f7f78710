"""
First Fan and Next Fan.

Both build a fan ``(xy0, xy1, ...)`` around pivot x starting at the uncolored
edge xy0, following for each leaf z the color η assigned to it and then the
x-edge colored η. The loop stops when η is missing at x, when it reaches a
leaf already in the fan, or (Next Fan only) when η equals the given β.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from typing import List, Optional

from utils.error_handlers import InvariantViolation, NotShiftable, PreconditionViolated
from vizing.coloring import (
    BLANK,
    Fan,
    PartialColoring,
    alternating_degree,
    are_related,
    is_happy,
    lowest_color,
    shift_chain,
    unshift_chain,
)


class FanScratch:
    """
    Per-worker leaf index for fan construction.

    Entries are valid only when their stamp equals the current epoch, so
    starting a new fan is O(1) instead of clearing an O(n) array.
    """

    __slots__ = ("index", "stamp", "epoch")

    def __init__(self, n: int):
        self.index: List[int] = [0] * n
        self.stamp: List[int] = [0] * n
        self.epoch = 0

    @property
    def capacity(self) -> int:
        return len(self.index)

    def begin(self):
        self.epoch += 1

    def get(self, v: int) -> Optional[int]:
        if self.stamp[v] == self.epoch:
            return self.index[v]
        return None

    def put(self, v: int, k: int):
        self.stamp[v] = self.epoch
        self.index[v] = k


_local = threading.local()


def scratch_for(n: int) -> FanScratch:
    """Thread-local scratch with room for ``n`` vertices."""
    scratch = getattr(_local, "scratch", None)
    if scratch is None or scratch.capacity < n:
        scratch = FanScratch(n)
        _local.scratch = scratch
    return scratch


@dataclass
class FanResult:
    """
    Output (F, color, j) of a fan algorithm.

    ``color`` is missing at vEnd(F) and at vEnd(F|j).
    """

    fan: Fan
    color: int
    index: int

    def prime(self) -> Fan:
        """F' = F|j"""
        return self.fan.prefix(self.index)


def _build_fan(
    phi: PartialColoring,
    e: int,
    x: int,
    beta: Optional[int],
    scratch: Optional[FanScratch],
) -> FanResult:
    g = phi.graph
    y = g.other(e, x)
    scratch = scratch or scratch_for(g.n)
    scratch.begin()

    fan = Fan(pivot=x, leaves=[y], edges=[e])
    k = 0
    z = y
    scratch.put(z, 0)
    missing_x = phi.missing_mask(x)

    while k < g.degree(x):
        mask = phi.missing_mask(z)
        if beta is not None and z == y:
            mask &= ~(1 << beta)
        eta = lowest_color(mask)

        if (missing_x >> eta) & 1:
            return FanResult(fan, eta, k + 1)
        if beta is not None and eta == beta:
            return FanResult(fan, eta, k + 1)

        f = phi.edge_at(x, eta)
        z = g.other(f, x)
        j = scratch.get(z)
        if j is not None:
            return FanResult(fan, eta, j)

        k += 1
        scratch.put(z, k)
        fan.leaves.append(z)
        fan.edges.append(f)

    raise InvariantViolation(
        "fan loop exhausted the pivot's neighbors without returning",
        diagnostics={"edge": e, "pivot": x, "beta": beta, "leaves": fan.leaves},
    )


def first_fan(
    phi: PartialColoring,
    e: int,
    x: int,
    scratch: Optional[FanScratch] = None,
) -> FanResult:
    """
    First Fan on the uncolored edge ``e`` with pivot ``x``.

    Leaf colors are β(z) = min M(φ, z). Either the returned color is missing at
    x and F is φ-happy, or for any α ∈ M(φ, x) one of F and F|j is
    (φ, αβ)-successful.
    """
    if phi.color[e] != BLANK:
        raise PreconditionViolated(f"edge {e} is colored")
    return _build_fan(phi, e, x, None, scratch)


def next_fan(
    phi: PartialColoring,
    e: int,
    x: int,
    beta: int,
    scratch: Optional[FanScratch] = None,
) -> FanResult:
    """
    Next Fan on the uncolored edge ``e = xy`` with pivot ``x``.

    Same loop as first_fan except that δ(y) = min M(φ, y) \\ {β} and the loop
    also stops when a leaf's color equals β.

    Raises:
        PreconditionViolated: β is not missing at y, or M(φ, x) ⊆ M(φ, y).
    """
    y = phi.graph.other(e, x)
    if phi.color[e] != BLANK:
        raise PreconditionViolated(f"edge {e} is colored")
    if not phi.is_missing(y, beta):
        raise PreconditionViolated(f"beta={beta} is not missing at vertex {y}")
    if not phi.missing_mask(x) & ~phi.missing_mask(y):
        raise PreconditionViolated(f"M(x) is contained in M(y) for edge {e}")
    return _build_fan(phi, e, x, beta, scratch)


# ==========================================
# FAN CLASSIFICATION
# ==========================================

class FanStatus:
    """Classification of a fan with respect to a color pair"""
    NOT_SHIFTABLE = "not_shiftable"
    HAPPY = "happy"
    HOPELESS = "hopeless"
    SUCCESSFUL = "successful"
    DISAPPOINTED = "disappointed"


def fan_status(phi: PartialColoring, fan: Fan, alpha: int, beta: int) -> str:
    """
    Classify ``fan`` under φ for the pair αβ.

    Hopeful means the pivot and vEnd(F) each have αβ-degree below 2 under φ;
    a hopeful fan is successful when the two are not joined by an αβ-path
    after shifting F. φ is left unchanged.
    """
    x, y = fan.pivot, fan.vend
    dx = alternating_degree(phi, x, alpha, beta)
    dy = alternating_degree(phi, y, alpha, beta)

    try:
        shift_chain(phi, fan.edges)
    except NotShiftable:
        return FanStatus.NOT_SHIFTABLE

    try:
        if is_happy(phi, fan.end):
            return FanStatus.HAPPY
        if dx >= 2 or dy >= 2:
            return FanStatus.HOPELESS
        if are_related(phi, y, x, alpha, beta):
            return FanStatus.DISAPPOINTED
        return FanStatus.SUCCESSFUL
    finally:
        unshift_chain(phi, fan.edges)
