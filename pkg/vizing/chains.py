"""
Single Vizing chains.

``vizing_chain`` builds the happy chain F + P used by the n log n colorer.
``first_chain`` and ``next_chain`` build the 2ℓ-truncated candidates that the
multi-step algorithm extends one step at a time.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from utils.constants import MIN_ELL
from utils.error_handlers import PreconditionViolated
from vizing.coloring import (
    Fan,
    PartialColoring,
    PathChain,
    concat,
    missing_min,
    shift_chain,
    unshift_chain,
    walk_alternating,
)
from vizing.fans import FanResult, FanScratch, first_fan, next_fan


@dataclass
class CandidateChain:
    """
    A fan and the path hanging off its last edge.

    ``alpha`` is missing at the pivot and colors the first path edge after
    Start(path); ``beta`` is missing at vEnd(fan). Both are 0 for a bare happy
    fan. ``walked`` records the lengths of the paths explored to pick this
    chain (P and P′), used for runtime statistics.
    """

    fan: Fan
    path: PathChain
    alpha: int = 0
    beta: int = 0
    walked: Tuple[int, int] = (0, 0)

    @property
    def truncated(self) -> bool:
        return self.path.truncated

    @property
    def pivot(self) -> int:
        return self.fan.pivot

    def edges(self) -> List[int]:
        return concat(self.fan.edges, self.path.edges)

    def path_color(self, i: int) -> int:
        """Color of path edge ``i`` (i ≥ 1) in the walk that produced it."""
        return self.alpha if i % 2 else self.beta


def bare_path(fan: Fan) -> PathChain:
    return PathChain([fan.end], [fan.pivot, fan.vend])


def path_after_shift(
    phi: PartialColoring,
    fan: Fan,
    alpha: int,
    beta: int,
    cap: Optional[int] = None,
) -> PathChain:
    """P(End(F); Shift(φ, F), αβ), walked from vEnd(F). φ is restored."""
    shift_chain(phi, fan.edges)
    try:
        return walk_alternating(phi, fan.end, fan.vend, alpha, beta, cap)
    finally:
        unshift_chain(phi, fan.edges)


def _pick_branch(
    phi: PartialColoring,
    result: FanResult,
    alpha: int,
    beta: int,
    cap: Optional[int],
) -> CandidateChain:
    fan = result.fan
    x = fan.pivot
    path = path_after_shift(phi, fan, alpha, beta, cap)
    if path.truncated or path.vend != x:
        return CandidateChain(fan, path, alpha, beta, walked=(len(path), 0))
    fan_prime = result.prime()
    path_prime = path_after_shift(phi, fan_prime, alpha, beta, cap)
    return CandidateChain(fan_prime, path_prime, alpha, beta, walked=(len(path), len(path_prime)))


def vizing_chain(
    phi: PartialColoring,
    e: int,
    x: int,
    rng: np.random.Generator,
    scratch: Optional[FanScratch] = None,
) -> CandidateChain:
    """
    Happy Vizing chain starting at the uncolored edge ``e`` with pivot ``x``.

    α is drawn uniformly from M(φ, x). Both P and P′ are walked in full and
    F + P is returned unless P comes back to x.
    """
    result = first_fan(phi, e, x, scratch)
    fan = result.fan
    if phi.is_missing(x, result.color):
        return CandidateChain(fan, bare_path(fan))

    choices = phi.missing(x)
    alpha = choices[int(rng.integers(len(choices)))]
    beta = result.color
    fan_prime = result.prime()

    path = path_after_shift(phi, fan, alpha, beta)
    path_prime = path_after_shift(phi, fan_prime, alpha, beta)
    walked = (len(path), len(path_prime))
    if path.vend != x:
        return CandidateChain(fan, path, alpha, beta, walked)
    return CandidateChain(fan_prime, path_prime, alpha, beta, walked)


def first_chain(
    phi: PartialColoring,
    e: int,
    x: int,
    l: int,
    scratch: Optional[FanScratch] = None,
) -> CandidateChain:
    """
    First Chain: like vizing_chain with α = min M(φ, x) and paths cut at 2ℓ.

    F is kept when its path is longer than 2ℓ or does not return to x;
    otherwise F′ = F|j is used.
    """
    if l < MIN_ELL:
        raise PreconditionViolated(f"ell must be at least {MIN_ELL}, got {l}")
    result = first_fan(phi, e, x, scratch)
    if phi.is_missing(x, result.color):
        return CandidateChain(result.fan, bare_path(result.fan))

    alpha = missing_min(phi, x)
    return _pick_branch(phi, result, alpha, result.color, 2 * l)


def next_chain(
    phi: PartialColoring,
    e: int,
    x: int,
    alpha: int,
    beta: int,
    l: int,
    scratch: Optional[FanScratch] = None,
) -> CandidateChain:
    """
    Next Chain on ``e = xy`` given the colors αβ of the previous path.

    Requires α ∈ M(φ, x) \\ M(φ, y) and β ∈ M(φ, y). When Next Fan stops on
    δ = β the αβ-path prefix is returned; otherwise the path uses the fresh
    pair γδ with γ = min M(φ, x) \\ {α}.

    Raises:
        PreconditionViolated: on bad α or β.
    """
    y = phi.graph.other(e, x)
    if not phi.is_missing(x, alpha) or phi.is_missing(y, alpha):
        raise PreconditionViolated(f"alpha={alpha} must be missing at {x} and present at {y}")
    if not phi.is_missing(y, beta):
        raise PreconditionViolated(f"beta={beta} must be missing at {y}")

    result = next_fan(phi, e, x, beta, scratch)
    fan = result.fan
    delta = result.color
    if phi.is_missing(x, delta):
        return CandidateChain(fan, bare_path(fan))

    if delta == beta:
        path = path_after_shift(phi, fan, alpha, beta, 2 * l)
        return CandidateChain(fan, path, alpha, beta, walked=(len(path), 0))

    gamma = missing_min(phi, x, exclude=alpha)
    return _pick_branch(phi, result, gamma, delta, 2 * l)


def candidate_colors(phi: PartialColoring, cand: CandidateChain) -> List[int]:
    """Colors of the candidate's edges under φ (debug helper)."""
    return [phi.color[f] for f in cand.edges()]

