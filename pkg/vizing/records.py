"""
MSVA run records and their statistics.

A record D = (d_1, ..., d_t) logs one entry per loop iteration of a
multi-step run: 1 when a step is appended, j − k ≤ 0 when the run returns to
step j from step k. Together with the terminus (End(C), vEnd(C)) it is what
the summary statistics and tail fits are computed from.
"""

from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, Field

from utils.constants import SCHEMA_VERSION, Outcome


class RunRecord(BaseModel):
    """Record of a single MSVA call."""

    edge: int
    attempt: int = 1
    iterations: int
    d: List[int] = Field(default_factory=list)
    terminus: Tuple[int, int]
    outcome: str = Outcome.SUCCESS
    chain_length: int = 0

    def prefix_sums_ok(self) -> bool:
        total = 0
        for value in self.d:
            total += value
            if total < 0:
                return False
        return True

    def to_json_line(self) -> str:
        return self.model_dump_json()


def write_records(records: Iterable[RunRecord], path: Path):
    with open(path, "w") as f:
        for record in records:
            f.write(record.to_json_line() + "\n")


def read_records(path: Path) -> List[RunRecord]:
    out = []
    with open(path) as f:
        for line in f:
            line = line.strip()
            if line:
                out.append(RunRecord.model_validate(json.loads(line)))
    return out


# ==========================================
# WEIGHTS
# ==========================================

def log_val(z: int, delta: int, ell: int) -> float:
    """log of Δ⁴ for z = 1, 20Δ⁹ for z = 0, and 75ℓΔ¹¹ for z < 0."""
    if z == 1:
        return 4 * math.log(delta)
    if z == 0:
        return math.log(20) + 9 * math.log(delta)
    if z < 0:
        return math.log(75 * ell) + 11 * math.log(delta)
    raise ValueError(f"record entries are at most 1, got {z}")


def log_weight(d: Sequence[int], delta: int, ell: int) -> float:
    """log wt(D) = Σ log val(d_i)"""
    return sum(log_val(z, delta, ell) for z in d)


def theoretical_tail(t: int, m: int, delta: int, ell: int) -> float:
    """4m(1200Δ¹⁵/ℓ)^{t/2}, capped at 1."""
    log_bound = math.log(4 * m) + (t / 2) * (math.log(1200) + 15 * math.log(delta) - math.log(ell))
    if log_bound >= 0:
        return 1.0
    return math.exp(log_bound)


def proof_threshold_met(delta: int, ell: int) -> bool:
    """ℓ ≥ 1200Δ¹⁶"""
    return ell >= 1200 * delta ** 16


# ==========================================
# SUMMARY
# ==========================================

class RecordSummary(BaseModel):
    schema_: int = Field(default=SCHEMA_VERSION, alias="schema")
    runs: int
    outcomes: Dict[str, int]
    iteration_histogram: Dict[int, int]
    d_histogram: Dict[int, int]
    appends: int
    backtracks: int
    max_backtrack_depth: int
    tail: Dict[int, float]
    theoretical_tail: Dict[int, float] = Field(default_factory=dict)
    proof_threshold_met: Optional[bool] = None
    tail_slope: Optional[float] = None
    mean_log_weight: Optional[float] = None
    prefix_violations: List[int] = Field(default_factory=list)

    model_config = {"populate_by_name": True}


def _histogram(values: Sequence[int]) -> Dict[int, int]:
    if not len(values):
        return {}
    keys, counts = np.unique(np.asarray(values, dtype=np.int64), return_counts=True)
    return {int(k): int(c) for k, c in zip(keys, counts)}


def fit_tail_slope(tail: Dict[int, float]) -> Optional[float]:
    """Least-squares slope of log P[T ≥ t] against t over the nonzero tail."""
    points = [(t, p) for t, p in sorted(tail.items()) if p > 0]
    if len(points) < 2:
        return None
    ts = np.array([t for t, _ in points], dtype=float)
    logs = np.log(np.array([p for _, p in points], dtype=float))
    slope, _ = np.polyfit(ts, logs, 1)
    return float(slope)


def summarize_records(
    records: Sequence[RunRecord],
    delta: Optional[int] = None,
    ell: Optional[int] = None,
    m: Optional[int] = None,
) -> RecordSummary:
    """
    Histograms, empirical tail, and (given Δ, ℓ, m) the theoretical tail.

    The theoretical tail is reported only for the t where it is below 1.
    Records whose prefix sums go negative are listed by position.
    """
    iterations = [r.iterations for r in records]
    all_d = [z for r in records for z in r.d]

    outcomes: Dict[str, int] = {}
    for r in records:
        outcomes[r.outcome] = outcomes.get(r.outcome, 0) + 1

    appends = sum(1 for z in all_d if z == 1)
    backtracks = sum(1 for z in all_d if z <= 0)
    max_depth = max((-z for z in all_d if z <= 0), default=0)

    tail: Dict[int, float] = {}
    if records:
        arr = np.asarray(iterations)
        for t in range(1, int(arr.max()) + 2):
            tail[t] = float(np.mean(arr >= t))

    theory: Dict[int, float] = {}
    threshold = None
    mean_lw = None
    if delta is not None and ell is not None:
        threshold = proof_threshold_met(delta, ell)
        if records:
            mean_lw = float(np.mean([log_weight(r.d, delta, ell) for r in records]))
        if m is not None and tail:
            for t in tail:
                bound = theoretical_tail(t, m, delta, ell)
                if bound < 1:
                    theory[t] = bound

    return RecordSummary(
        runs=len(records),
        outcomes=outcomes,
        iteration_histogram=_histogram(iterations),
        d_histogram=_histogram(all_d),
        appends=appends,
        backtracks=backtracks,
        max_backtrack_depth=max_depth,
        tail=tail,
        theoretical_tail=theory,
        proof_threshold_met=threshold,
        tail_slope=fit_tail_slope(tail),
        mean_log_weight=mean_lw,
        prefix_violations=[i for i, r in enumerate(records) if not r.prefix_sums_ok()],
    )
