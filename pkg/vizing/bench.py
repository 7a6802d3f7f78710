"""
Benchmark harness.

Cells (algorithm, n, Δ, seed) are queued and drained by async worker loops
that hand each cell to a process pool. Results go to CSV, and per (algorithm,
Δ) the harness fits the log-log slope of wall time against n and compares a
linear model with an n·log n model by AIC.
"""

from __future__ import annotations

import asyncio
import csv
import math
from concurrent.futures import Executor, ProcessPoolExecutor
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence

import numpy as np
from pydantic import BaseModel, Field

from utils.constants import BENCH_WORKERS, SCHEMA_VERSION, Algorithm
from utils.error_handlers import EdgeColoringError
from utils.structured_logger import get_logger
from vizing.coloring import validate
from vizing.graph import gen_random_max_degree
from vizing.sequential import run_colorer

logger = get_logger("vizing.bench", component="bench")


class BenchCell(BaseModel):
    algorithm: str
    n: int
    delta: int
    seed: int
    ell: Optional[int] = None


class BenchRow(BaseModel):
    schema_: int = Field(default=SCHEMA_VERSION, alias="schema")
    algorithm: str
    n: int
    m: int
    delta: int
    ell: Optional[int] = None
    seed: int
    wall_ns: int
    total_iterations: int
    restarts: int
    path_length_sum: int
    path_length_sum_prime: int
    max_color: int
    valid: bool

    model_config = {"populate_by_name": True}


class SlopeFit(BaseModel):
    algorithm: str
    delta: int
    points: int
    slope: Optional[float] = None
    aic_linear: Optional[float] = None
    aic_nlogn: Optional[float] = None
    preferred: Optional[str] = None


def build_cells(
    algorithms: Sequence[str],
    n_grid: Sequence[int],
    delta_grid: Sequence[int],
    seeds: int,
    ell: Optional[int] = None,
    base_seed: int = 0,
) -> List[BenchCell]:
    """
    Raises:
        ValueError: an empty grid or an unknown algorithm
    """
    if not algorithms or not n_grid or not delta_grid or seeds < 1:
        raise ValueError("benchmark grids must be nonempty and seeds positive")
    for alg in algorithms:
        if alg not in Algorithm.ALL:
            raise ValueError(f"unknown algorithm: {alg}")
    return [
        BenchCell(algorithm=alg, n=n, delta=delta, seed=base_seed + s, ell=ell)
        for alg in algorithms
        for delta in delta_grid
        for n in n_grid
        for s in range(seeds)
    ]


def run_cell(cell: BenchCell) -> BenchRow:
    """Generate the cell's graph, color it and validate. Runs in a worker process."""
    g = gen_random_max_degree(cell.n, cell.delta, cell.seed)
    phi, stats, _ = run_colorer(cell.algorithm, g, cell.ell, cell.seed)
    report = validate(g, phi)
    return BenchRow(
        algorithm=cell.algorithm,
        n=g.n,
        m=g.m,
        delta=cell.delta,
        ell=stats.ell,
        seed=cell.seed,
        wall_ns=stats.wall_ns,
        total_iterations=stats.total_iterations,
        restarts=stats.restarts,
        path_length_sum=stats.path_length_sum,
        path_length_sum_prime=stats.path_length_sum_prime,
        max_color=stats.max_color,
        valid=report.valid and report.uncolored == 0,
    )


# ==========================================
# WORKER POOL
# ==========================================

class BenchRunner:
    """
    Runs one async worker loop per slot. Each loop takes the next cell from
    the queue and waits on the executor for its row.
    """

    def __init__(self, workers: int = BENCH_WORKERS, executor: Optional[Executor] = None):
        self.workers = max(1, workers)
        self.executor = executor
        self.rows: List[BenchRow] = []
        self.failures: List[Dict] = []

    async def run_worker(self, queue: asyncio.Queue, index: int):
        loop = asyncio.get_running_loop()
        while True:
            try:
                cell = queue.get_nowait()
            except asyncio.QueueEmpty:
                return
            try:
                if self.executor is None:
                    row = run_cell(cell)
                else:
                    row = await loop.run_in_executor(self.executor, run_cell, cell)
                self.rows.append(row)
                logger.info(
                    f"Cell done: {cell.algorithm} n={cell.n} delta={cell.delta} seed={cell.seed}",
                    extra={"component": "bench", "action": "cell", "status": "completed",
                           "details": {"worker": index, "wall_ns": row.wall_ns, "valid": row.valid}},
                )
            except EdgeColoringError as e:
                self.failures.append({"cell": cell.model_dump(), "error": str(e)})
                logger.error(
                    f"Cell failed: {cell.algorithm} n={cell.n} delta={cell.delta}: {e}",
                    extra={"component": "bench", "action": "cell", "status": "failed"},
                )
            finally:
                queue.task_done()

    async def run(self, cells: Iterable[BenchCell]) -> List[BenchRow]:
        queue: asyncio.Queue = asyncio.Queue()
        for cell in cells:
            queue.put_nowait(cell)
        tasks = [asyncio.create_task(self.run_worker(queue, i)) for i in range(self.workers)]
        await asyncio.gather(*tasks)
        self.rows.sort(key=lambda r: (r.algorithm, r.delta, r.n, r.seed))
        return self.rows


def run_bench(cells: Sequence[BenchCell], workers: int = BENCH_WORKERS) -> List[BenchRow]:
    """Run ``cells`` on a process pool, or inline when ``workers`` is 1."""
    if workers <= 1:
        return asyncio.run(BenchRunner(1).run(cells))
    with ProcessPoolExecutor(max_workers=workers) as executor:
        return asyncio.run(BenchRunner(workers, executor).run(cells))


# ==========================================
# OUTPUT AND FITS
# ==========================================

def write_csv(rows: Sequence[BenchRow], path: Path):
    fields = list(BenchRow.model_fields)
    with open(path, "w", newline="") as f:
        writer = csv.DictWriter(f, fieldnames=["schema" if k == "schema_" else k for k in fields])
        writer.writeheader()
        for row in rows:
            writer.writerow(row.model_dump(by_alias=True))


def _aic(residuals: np.ndarray, params: int) -> float:
    rss = float(np.sum(residuals ** 2))
    count = len(residuals)
    return count * math.log(max(rss, 1e-300) / count) + 2 * params


def fit_scaling(ns: Sequence[int], times: Sequence[float]) -> Dict[str, Optional[float]]:
    """
    Log-log slope of time against n, plus AIC of time = a·n and
    time = a·n·ln n (one parameter each, least squares through the origin).
    """
    n = np.asarray(ns, dtype=float)
    t = np.asarray(times, dtype=float)
    if len(np.unique(n)) < 2:
        return {"slope": None, "aic_linear": None, "aic_nlogn": None}
    slope, _ = np.polyfit(np.log(n), np.log(np.maximum(t, 1.0)), 1)
    out = {"slope": float(slope)}
    for name, basis in (("aic_linear", n), ("aic_nlogn", n * np.log(n))):
        a = float(basis @ t / (basis @ basis))
        out[name] = _aic(t - a * basis, 1)
    return out


def fit_slopes(rows: Sequence[BenchRow]) -> List[SlopeFit]:
    """One fit per (algorithm, Δ) over the mean wall time at each n."""
    groups: Dict[tuple, Dict[int, List[int]]] = {}
    for row in rows:
        groups.setdefault((row.algorithm, row.delta), {}).setdefault(row.n, []).append(row.wall_ns)

    fits = []
    for (alg, delta), by_n in sorted(groups.items()):
        ns = sorted(by_n)
        times = [float(np.mean(by_n[n])) for n in ns]
        fit = fit_scaling(ns, times)
        preferred = None
        if fit["aic_linear"] is not None:
            preferred = "n" if fit["aic_linear"] <= fit["aic_nlogn"] else "n_log_n"
        fits.append(SlopeFit(algorithm=alg, delta=delta, points=len(ns), preferred=preferred, **fit))
    return fits


def fits_path(path: Path) -> Path:
    """``bench.csv`` -> ``bench_fits.csv``"""
    return path.with_name(f"{path.stem}_fits{path.suffix or '.csv'}")


def write_fits_csv(fits: Sequence[SlopeFit], path: Path):
    """One row per (algorithm, Δ); empty cells where a fit needs more sizes."""
    with open(path, "w", newline="") as f:
        writer = csv.DictWriter(f, fieldnames=list(SlopeFit.model_fields))
        writer.writeheader()
        for fit in fits:
            writer.writerow(fit.model_dump())
