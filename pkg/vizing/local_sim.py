"""
LOCAL-model simulation of the randomized distributed colorer.

A stage runs MSVA with an iteration budget t for every uncolored edge against
the same coloring, joins the successful chains that share a vertex in the
conflict graph Γ, picks a random independent set W of Γ and augments all
chains in W. Chains in W are vertex-disjoint, so augmenting them one after
another gives the same result as augmenting them at once.

The simulation is by equivalence rather than by message passing: a chain of
length L only reads the coloring within distance L of its edge, so a stage is
charged 2·(longest chain) rounds.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Set, Tuple

import networkx as nx
import numpy as np
from pydantic import BaseModel

from utils.constants import MIN_ELL
from utils.error_handlers import (
    IterationCapHit,
    PreconditionViolated,
    SnapshotViolation,
    StageCapExceeded,
)
from utils.rng import coin, substream
from utils.structured_logger import get_logger
from vizing.coloring import PartialColoring, augment
from vizing.fans import scratch_for
from vizing.graph import Graph
from vizing.msva import MultiStepChain, msva, visited_for
from vizing.records import RunRecord

logger = get_logger("vizing.local_sim", component="local_sim")


class StageRow(BaseModel):
    """One line of the stage trace."""

    stage: int
    U: int
    S: int
    W: int
    gamma_edges: int
    mean_conflict_degree: float
    stage_rounds: int
    rounds_charged: int


@dataclass
class StageState:
    snapshot: PartialColoring
    uncolored: List[int]
    chains: Dict[int, MultiStepChain] = field(default_factory=dict)
    failures: List[int] = field(default_factory=list)
    records: List[RunRecord] = field(default_factory=list)
    gamma: nx.Graph = field(default_factory=nx.Graph)
    winners: Set[int] = field(default_factory=set)
    round_cost: int = 0

    def mean_conflict_degree(self) -> float:
        if not self.gamma.number_of_nodes():
            return 0.0
        return 2 * self.gamma.number_of_edges() / self.gamma.number_of_nodes()


# ==========================================
# CONFLICT GRAPH AND INDEPENDENT SET
# ==========================================

def conflict_graph(chains: Dict[int, MultiStepChain]) -> nx.Graph:
    """Γ on the chain ids; two chains conflict when they share a vertex."""
    gamma = nx.Graph()
    gamma.add_nodes_from(sorted(chains))
    touching: Dict[int, List[int]] = {}
    for e in sorted(chains):
        for v in set(chains[e].vertices()):
            touching.setdefault(v, []).append(e)
    for owners in touching.values():
        for i, a in enumerate(owners):
            for b in owners[i + 1:]:
                gamma.add_edge(a, b)
    return gamma


def random_independent_set(gamma: nx.Graph, seed: int, stage: int = 0) -> Set[int]:
    """
    Every node draws x_v ~ U(0, 1) and joins W when (x_v, v) beats every
    neighbor's (x_u, u).
    """
    nodes = sorted(gamma.nodes())
    if not nodes:
        return set()
    draws = substream(seed, "mis", stage).random(len(nodes))
    key: Dict[int, Tuple[float, int]] = {v: (float(x), v) for v, x in zip(nodes, draws)}
    return {v for v in nodes if all(key[v] > key[u] for u in gamma.neighbors(v))}


def audit_disjoint(chains: Dict[int, MultiStepChain], winners: Set[int]):
    owner: Dict[int, int] = {}
    for e in sorted(winners):
        for v in set(chains[e].vertices()):
            if v in owner:
                raise SnapshotViolation(
                    "chains selected for simultaneous augmentation share a vertex",
                    diagnostics={"vertex": v, "chains": [owner[v], e]},
                )
            owner[v] = e


# ==========================================
# STAGES
# ==========================================

def stage(
    phi: PartialColoring,
    l: int,
    t: int,
    seed: int,
    stage_index: int = 1,
    validate_debug: bool = False,
) -> Tuple[PartialColoring, StageState]:
    """
    Run one stage and augment the winning chains into ``phi`` in place.

    Raises:
        PreconditionViolated: ℓ < MIN_ELL or t < 1
        SnapshotViolation: the winners' chains are not vertex-disjoint
    """
    if l < MIN_ELL:
        raise PreconditionViolated(f"ell must be at least {MIN_ELL}, got {l}")
    if t < 1:
        raise PreconditionViolated(f"iteration budget must be positive, got {t}")

    g = phi.graph
    state = StageState(snapshot=phi.copy(), uncolored=phi.uncolored_edges())
    scratch = scratch_for(g.n)
    visited = visited_for(g.n, g.m)

    for e in state.uncolored:
        rng = substream(seed, "sim", stage_index, e)
        x = g.ends[e][1] if coin(rng) else g.ends[e][0]
        try:
            chain, record = msva(phi, e, x, l, t, rng, scratch, visited, validate_debug)
        except IterationCapHit as exc:
            state.failures.append(e)
            state.records.append(exc.record)
            continue
        state.chains[e] = chain
        state.records.append(record)

    state.gamma = conflict_graph(state.chains)
    state.winners = random_independent_set(state.gamma, seed, stage_index)
    audit_disjoint(state.chains, state.winners)

    for e in sorted(state.winners):
        augment(phi, state.chains[e].edges())

    longest = max((len(c) for c in state.chains.values()), default=1)
    state.round_cost = 2 * longest
    return phi, state


def run_distributed(
    g: Graph,
    l: int,
    t: int,
    stage_cap: int,
    seed: int = 0,
    phi: Optional[PartialColoring] = None,
    validate_debug: bool = False,
) -> Tuple[PartialColoring, List[StageRow]]:
    """
    Repeat stages until every edge is colored.

    Returns:
        (coloring, trace)

    Raises:
        StageCapExceeded: edges remain after ``stage_cap`` stages; carries the
            residual edge ids, the trace and the partial coloring
    """
    if stage_cap < 1:
        raise PreconditionViolated(f"stage cap must be positive, got {stage_cap}")

    phi = PartialColoring(g) if phi is None else phi
    trace: List[StageRow] = []
    rounds = 0

    for index in range(1, stage_cap + 1):
        if not phi.uncolored_count:
            break
        phi, state = stage(phi, l, t, seed, index, validate_debug)
        rounds += state.round_cost
        row = StageRow(
            stage=index,
            U=len(state.uncolored),
            S=len(state.chains),
            W=len(state.winners),
            gamma_edges=state.gamma.number_of_edges(),
            mean_conflict_degree=state.mean_conflict_degree(),
            stage_rounds=state.round_cost,
            rounds_charged=rounds,
        )
        trace.append(row)
        logger.log_stage(row.model_dump())

    if phi.uncolored_count:
        residual = phi.uncolored_edges()
        logger.warning(
            "Stage cap reached with edges uncolored",
            extra={"component": "local_sim", "action": "run", "status": "stage_cap",
                   "details": {"residual": len(residual), "stages": len(trace)}},
        )
        raise StageCapExceeded(residual, [r.model_dump() for r in trace], phi)

    return phi, trace


def decay_ratios(trace: List[StageRow]) -> np.ndarray:
    """|U_{i+1}| / |U_i| over consecutive stages."""
    sizes = np.array([row.U for row in trace], dtype=float)
    if len(sizes) < 2:
        return np.array([])
    return sizes[1:] / np.maximum(sizes[:-1], 1)
