"""
Sequential colorers.

``color_vizing`` augments one random uncolored edge at a time along a Vizing
chain, ``color_msva`` does the same with multi-step Vizing chains, and
``color_greedy`` is the first-fit baseline using at most 2Δ − 1 colors.
"""

from __future__ import annotations

import math
import time
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, Field
from tenacity import RetryCallState

from utils.constants import (
    MAX_RESTARTS,
    MIN_ELL,
    SCHEMA_VERSION,
    Algorithm,
    default_ell,
    default_iteration_cap,
)
from utils.error_handlers import IterationCapHit, PreconditionViolated, restart_on_cap_hit
from utils.rng import coin, substream
from utils.structured_logger import get_logger
from vizing.chains import vizing_chain
from vizing.coloring import BLANK, PartialColoring, augment, lowest_color
from vizing.fans import scratch_for
from vizing.graph import Graph
from vizing.msva import msva, visited_for
from vizing.records import RunRecord

logger = get_logger("vizing.sequential", component="sequential")


# ==========================================
# RUN STATISTICS
# ==========================================

class RunStats(BaseModel):
    schema_: int = Field(default=SCHEMA_VERSION, alias="schema")
    algorithm: str
    n: int
    m: int
    delta: int
    ell: Optional[int] = None
    seed: Optional[int] = None
    total_iterations: int = 0
    restarts: int = 0
    wall_ns: int = 0
    max_color: int = 0
    per_color_histogram: Dict[int, int] = Field(default_factory=dict)
    path_length_sum: int = 0
    path_length_sum_prime: int = 0
    path_lengths: List[Tuple[int, int]] = Field(default_factory=list)

    model_config = {"populate_by_name": True}

    def summary(self, timing: bool = True) -> dict:
        """Stats without the per-iteration path lengths, and without wall time unless ``timing``."""
        exclude = {"path_lengths"} if timing else {"path_lengths", "wall_ns"}
        return self.model_dump(by_alias=True, exclude=exclude)


def color_histogram(phi: PartialColoring) -> Dict[int, int]:
    colors = np.asarray([c for c in phi.color if c != BLANK], dtype=np.int64)
    if not colors.size:
        return {}
    counts = np.bincount(colors)
    return {int(c): int(k) for c, k in enumerate(counts) if k}


def nlogn_bound_ok(stats: RunStats, constant: float = 8.0) -> bool:
    """T + T′ ≤ C·Δ³·n·ln n"""
    bound = constant * stats.delta ** 3 * stats.n * math.log(max(stats.n, 2))
    return stats.path_length_sum + stats.path_length_sum_prime <= bound


def _finish(stats: RunStats, phi: PartialColoring, started: int) -> RunStats:
    stats.wall_ns = time.perf_counter_ns() - started
    stats.per_color_histogram = color_histogram(phi)
    stats.max_color = max(stats.per_color_histogram, default=0)
    logger.log_run_summary(stats.algorithm, stats.summary())
    return stats


# ==========================================
# UNCOLORED POOL
# ==========================================

class UncoloredPool:
    """Dense array of uncolored edge ids with O(1) uniform removal."""

    def __init__(self, edges: Sequence[int]):
        self.items = list(edges)

    def __len__(self) -> int:
        return len(self.items)

    def take(self, i: int) -> int:
        items = self.items
        e = items[i]
        items[i] = items[-1]
        items.pop()
        return e

    def draw(self, rng: np.random.Generator) -> int:
        return self.take(int(rng.integers(len(self.items))))


def _pick(g: Graph, pool: UncoloredPool, rng: np.random.Generator) -> Tuple[int, int]:
    e = pool.draw(rng)
    x = g.ends[e][1] if coin(rng) else g.ends[e][0]
    return e, x


# ==========================================
# COLORERS
# ==========================================

def color_vizing(g: Graph, seed: int = 0) -> Tuple[PartialColoring, RunStats]:
    """
    Color every edge with Vizing chains.

    Each iteration picks a uniform uncolored edge and a uniform endpoint,
    builds a happy Vizing chain and augments it.
    """
    started = time.perf_counter_ns()
    phi = PartialColoring(g)
    stats = RunStats(algorithm=Algorithm.VIZING, n=g.n, m=g.m, delta=phi.delta, seed=seed)
    rng = substream(seed, "driver")
    scratch = scratch_for(g.n)
    pool = UncoloredPool(range(g.m))

    while pool:
        e, x = _pick(g, pool, rng)
        cand = vizing_chain(phi, e, x, rng, scratch)
        augment(phi, cand.edges())
        stats.path_lengths.append(cand.walked)
        stats.path_length_sum += cand.walked[0]
        stats.path_length_sum_prime += cand.walked[1]
        stats.total_iterations += 1

    return phi, _finish(stats, phi, started)


def color_msva(
    g: Graph,
    l: Optional[int] = None,
    seed: int = 0,
    cap: Optional[int] = None,
    max_restarts: int = MAX_RESTARTS,
    validate_debug: bool = False,
) -> Tuple[PartialColoring, RunStats, List[RunRecord]]:
    """
    Color every edge with multi-step Vizing chains.

    Args:
        g: Graph to color
        l: Truncation parameter ℓ; defaults to default_ell(Δ)
        seed: Run seed
        cap: Iterations per MSVA call before a restart
        max_restarts: MSVA attempts per edge
        validate_debug: Run the per-iteration audits

    Returns:
        (coloring, stats, one record per MSVA call including restarted ones)

    Raises:
        IterationCapHit: an edge exhausted all of its attempts
    """
    started = time.perf_counter_ns()
    phi = PartialColoring(g)
    l = default_ell(phi.delta) if l is None else l
    if l < MIN_ELL:
        raise PreconditionViolated(f"ell must be at least {MIN_ELL}, got {l}")
    cap = default_iteration_cap(g.n) if cap is None else cap

    stats = RunStats(algorithm=Algorithm.MSVA, n=g.n, m=g.m, delta=phi.delta, ell=l, seed=seed)
    records: List[RunRecord] = []
    rng = substream(seed, "driver")
    scratch = scratch_for(g.n)
    visited = visited_for(g.n, g.m)
    pool = UncoloredPool(range(g.m))

    while pool:
        e, x = _pick(g, pool, rng)

        def on_restart(state: RetryCallState, e=e):
            record = state.outcome.exception().record
            stats.restarts += 1
            logger.log_restart(e, state.attempt_number, record.iterations)

        for attempt in restart_on_cap_hit(max_restarts, on_restart):
            with attempt:
                number = attempt.retry_state.attempt_number
                try:
                    chain, record = msva(
                        phi, e, x, l, cap, substream(seed, "msva", e, number),
                        scratch, visited, validate_debug, number,
                    )
                except IterationCapHit as exc:
                    records.append(exc.record)
                    stats.total_iterations += exc.record.iterations
                    raise

        records.append(record)
        stats.total_iterations += record.iterations
        logger.log_msva_outcome(e, record.attempt, record.model_dump())
        augment(phi, chain.edges())

    return phi, _finish(stats, phi, started), records


def color_greedy(g: Graph) -> PartialColoring:
    """First-fit coloring in edge-id order over the palette 1..2Δ−1."""
    phi = PartialColoring(g, delta=max(2 * g.max_degree - 2, g.max_degree, 2))
    for e, (u, v) in enumerate(g.ends):
        common = phi.missing_mask(u) & phi.missing_mask(v)
        phi.assign(e, lowest_color(common))
    return phi


def run_colorer(
    algorithm: str,
    g: Graph,
    l: Optional[int] = None,
    seed: int = 0,
    validate_debug: bool = False,
) -> Tuple[PartialColoring, RunStats, List[RunRecord]]:
    """Dispatch by algorithm name; greedy gets stats built here."""
    if algorithm == Algorithm.VIZING:
        phi, stats = color_vizing(g, seed)
        return phi, stats, []
    if algorithm == Algorithm.MSVA:
        return color_msva(g, l, seed, validate_debug=validate_debug)
    if algorithm == Algorithm.GREEDY:
        started = time.perf_counter_ns()
        phi = color_greedy(g)
        stats = RunStats(algorithm=Algorithm.GREEDY, n=g.n, m=g.m, delta=g.max_degree, seed=seed)
        return phi, _finish(stats, phi, started), []
    raise ValueError(f"unknown algorithm: {algorithm}")
