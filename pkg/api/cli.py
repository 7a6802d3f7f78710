"""
Command-line interface for the Vizing edge-coloring toolkit

Commands:
    color      color a graph with greedy, vizing or msva
    bench      run a benchmark grid and fit scaling slopes
    distsim    run the LOCAL-model simulation
    gen        generate a random bounded-degree graph
    summarize  summarize a file of MSVA run records
"""

import json
from pathlib import Path
from typing import List, Optional

import typer
from rich.console import Console
from rich.table import Table

from utils.constants import (
    BENCH_WORKERS,
    DEFAULT_SEED,
    LOG_LEVEL,
    SCHEMA_VERSION,
    STAGE_CAP,
    VALIDATE_DEBUG,
    Algorithm,
    ExitCode,
    GraphFormat,
    default_ell,
    default_local_budget,
)
from utils.error_handlers import EdgeColoringError, StageCapExceeded, exit_code_for
from utils.structured_logger import get_logger, set_level
from vizing.bench import build_cells, fit_slopes, fits_path, run_bench, write_csv, write_fits_csv
from vizing.coloring import format_coloring, validate
from vizing.graph import format_edge_list, gen_random_max_degree, graph_to_json, load_graph
from vizing.local_sim import run_distributed
from vizing.records import read_records, summarize_records, write_records
from vizing.sequential import run_colorer

app = typer.Typer(add_completion=False, help="(Δ+1)-edge-coloring with Vizing chains")
console = Console()
err_console = Console(stderr=True)
logger = get_logger("vizing.cli", component="cli")

TRACE_COLUMNS = ("stage", "U", "S", "W", "gamma_edges", "mean_conflict_degree", "rounds_charged")


# ==========================================
# HELPERS
# ==========================================

def _fail(error: BaseException) -> typer.Exit:
    err_console.print(f"[red]error:[/red] {error}")
    logger.error(str(error), extra={"component": "cli", "status": "failed",
                                    "details": {"type": type(error).__name__}})
    return typer.Exit(code=exit_code_for(error))


def _read_graph(path: Path):
    try:
        return load_graph(path.read_bytes())
    except (EdgeColoringError, OSError, ValueError) as e:
        raise _fail(e)


def _int_list(value: str, name: str) -> List[int]:
    try:
        items = [int(v) for v in value.split(",") if v.strip()]
    except ValueError:
        raise typer.BadParameter(f"{name} must be a comma-separated list of integers")
    if not items:
        raise typer.BadParameter(f"{name} must not be empty")
    return items


def _emit_json(document: dict):
    typer.echo(json.dumps(document, sort_keys=True, default=str))


def _kv_table(title: str, rows: dict) -> Table:
    table = Table(title=title)
    table.add_column("field", style="cyan")
    table.add_column("value")
    for key, value in rows.items():
        table.add_row(str(key), str(value))
    return table


@app.callback()
def main(
    log_level: str = typer.Option(LOG_LEVEL, "--log-level", envvar="VIZING_LOG_LEVEL", help="Logging level"),
):
    set_level(log_level)


# ==========================================
# COMMANDS
# ==========================================

@app.command()
def color(
    input: Path = typer.Argument(..., help="Graph file (edge list or JSON)"),
    alg: str = typer.Option(Algorithm.MSVA, "--alg", help="greedy, vizing or msva"),
    ell: Optional[int] = typer.Option(None, "--ell", envvar="VIZING_ELL", min=4, help="Truncation parameter ℓ"),
    seed: int = typer.Option(DEFAULT_SEED, "--seed", envvar="VIZING_SEED"),
    out: Optional[Path] = typer.Option(None, "--out", help="Coloring output file"),
    stats_path: Optional[Path] = typer.Option(None, "--stats", help="Run stats JSON file"),
    records_path: Optional[Path] = typer.Option(None, "--records", help="MSVA records (JSON lines)"),
    as_json: bool = typer.Option(False, "--json", help="Print one JSON document to stdout"),
    validate_debug: bool = typer.Option(VALIDATE_DEBUG, "--validate-debug", envvar="VIZING_VALIDATE_DEBUG"),
    timing: bool = typer.Option(False, "--timing", help="Include wall time in the stats output"),
):
    """Color every edge of INPUT and validate the result."""
    if alg not in Algorithm.ALL:
        raise typer.BadParameter(f"--alg must be one of {', '.join(Algorithm.ALL)}")
    g = _read_graph(input)

    try:
        phi, stats, records = run_colorer(alg, g, ell, seed, validate_debug)
    except EdgeColoringError as e:
        raise _fail(e)

    report = validate(g, phi)
    ok = report.valid and report.uncolored == 0
    summary = stats.summary(timing=timing)

    if out:
        out.write_text(format_coloring(phi))
    if stats_path:
        stats_path.write_text(json.dumps(summary, sort_keys=True) + "\n")
    if records_path:
        write_records(records, records_path)

    if as_json:
        _emit_json({"schema": SCHEMA_VERSION, "stats": summary, "validation": report.model_dump()})
    else:
        rows = {k: v for k, v in summary.items() if k != "per_color_histogram"}
        rows["valid"] = ok
        rows["violations"] = report.violations
        console.print(_kv_table(f"{alg} coloring", rows))
        if not out:
            typer.echo(format_coloring(phi), nl=False)

    if not ok:
        err_console.print(f"[red]validation failed:[/red] {report.violations} violations, {report.uncolored} uncolored")
        raise typer.Exit(code=ExitCode.VALIDATION_FAILED)


@app.command()
def bench(
    alg: str = typer.Option("msva,vizing", "--alg", help="Comma-separated algorithms"),
    n_grid: str = typer.Option("1000,2000,4000", "--n-grid"),
    delta_grid: str = typer.Option("5", "--delta-grid"),
    ell: Optional[int] = typer.Option(None, "--ell", envvar="VIZING_ELL", min=4),
    seeds: int = typer.Option(3, "--seeds", min=1, help="Seeds per cell"),
    seed: int = typer.Option(DEFAULT_SEED, "--seed", envvar="VIZING_SEED", help="Base seed"),
    out: Path = typer.Option(Path("bench.csv"), "--out"),
    workers: int = typer.Option(BENCH_WORKERS, "--workers", envvar="VIZING_BENCH_WORKERS", min=1),
    as_json: bool = typer.Option(False, "--json"),
):
    """Benchmark a grid of (algorithm, n, Δ, seed) cells."""
    algorithms = [a.strip() for a in alg.split(",") if a.strip()]
    ns = _int_list(n_grid, "--n-grid")
    deltas = _int_list(delta_grid, "--delta-grid")
    try:
        cells = build_cells(algorithms, ns, deltas, seeds, ell, seed)
    except ValueError as e:
        raise typer.BadParameter(str(e))

    rows = run_bench(cells, workers)
    write_csv(rows, out)
    fits = fit_slopes(rows)
    fits_csv = fits_path(out)
    write_fits_csv(fits, fits_csv)

    if as_json:
        _emit_json({"schema": SCHEMA_VERSION, "rows": len(rows), "csv": str(out), "fits_csv": str(fits_csv),
                    "fits": [f.model_dump() for f in fits]})
    else:
        table = Table(title="scaling fits")
        for column in ("algorithm", "delta", "points", "slope", "aic_linear", "aic_nlogn", "preferred"):
            table.add_column(column)
        for fit in fits:
            table.add_row(*(str(v) for v in fit.model_dump().values()))
        console.print(table)
        console.print(f"rows: {out}  fits: {fits_csv}")

    if not all(r.valid for r in rows) or len(rows) != len(cells):
        raise typer.Exit(code=ExitCode.VALIDATION_FAILED)


@app.command()
def distsim(
    input: Path = typer.Argument(..., help="Graph file (edge list or JSON)"),
    ell: Optional[int] = typer.Option(None, "--ell", envvar="VIZING_ELL", min=4),
    t: Optional[int] = typer.Option(None, "--t", envvar="VIZING_T", min=1, help="MSVA iterations per stage"),
    stage_cap: int = typer.Option(STAGE_CAP, "--stage-cap", envvar="VIZING_STAGE_CAP", min=1),
    seed: int = typer.Option(DEFAULT_SEED, "--seed", envvar="VIZING_SEED"),
    trace_path: Optional[Path] = typer.Option(None, "--trace", help="Stage trace (JSON lines)"),
    out: Optional[Path] = typer.Option(None, "--out", help="Coloring output file"),
    as_json: bool = typer.Option(False, "--json"),
    validate_debug: bool = typer.Option(VALIDATE_DEBUG, "--validate-debug", envvar="VIZING_VALIDATE_DEBUG"),
):
    """Run the LOCAL-model simulation until every edge is colored."""
    g = _read_graph(input)
    l = ell if ell is not None else default_ell(max(g.max_degree, 2))
    budget = t if t is not None else default_local_budget(g.n)

    exit_code = ExitCode.OK
    try:
        phi, trace = run_distributed(g, l, budget, stage_cap, seed, validate_debug=validate_debug)
        rows = [r.model_dump() for r in trace]
        residual: List[int] = []
    except StageCapExceeded as e:
        phi, rows, residual = e.coloring, e.trace, e.residual
        exit_code = ExitCode.STAGE_CAP
    except EdgeColoringError as e:
        raise _fail(e)

    if trace_path:
        with open(trace_path, "w") as f:
            for row in rows:
                f.write(json.dumps(row, sort_keys=True) + "\n")
    if out:
        out.write_text(format_coloring(phi))

    report = validate(g, phi)
    if as_json:
        _emit_json({"schema": SCHEMA_VERSION, "ell": l, "t": budget, "stages": len(rows),
                    "residual": len(residual), "trace": rows, "valid": report.valid})
    else:
        table = Table(title=f"distsim ℓ={l} t={budget}")
        for column in TRACE_COLUMNS:
            table.add_column(column)
        for row in rows:
            table.add_row(*(str(row[c]) for c in TRACE_COLUMNS))
        console.print(table)

    if not report.valid:
        raise typer.Exit(code=ExitCode.VALIDATION_FAILED)
    if exit_code != ExitCode.OK:
        err_console.print(f"[yellow]stage cap reached:[/yellow] {len(residual)} edges uncolored")
        raise typer.Exit(code=exit_code)


@app.command()
def gen(
    n: int = typer.Option(..., "--n", min=2),
    delta: int = typer.Option(..., "--delta", min=2),
    seed: int = typer.Option(DEFAULT_SEED, "--seed", envvar="VIZING_SEED"),
    regular: bool = typer.Option(False, "--regular", help="Every vertex gets degree exactly Δ"),
    out: Optional[Path] = typer.Option(None, "--out"),
    fmt: str = typer.Option(GraphFormat.EDGE_LIST, "--format", help="el or json"),
):
    """Generate a random graph with maximum degree at most Δ."""
    if fmt not in (GraphFormat.EDGE_LIST, GraphFormat.JSON):
        raise typer.BadParameter("--format must be el or json")
    try:
        g = gen_random_max_degree(n, delta, seed, regular=regular)
    except EdgeColoringError as e:
        raise _fail(e)

    text = graph_to_json(g) + "\n" if fmt == GraphFormat.JSON else format_edge_list(g)
    if out:
        out.write_text(text)
    else:
        typer.echo(text, nl=False)


@app.command()
def summarize(
    records: Path = typer.Argument(..., help="MSVA records (JSON lines)"),
    delta: Optional[int] = typer.Option(None, "--delta"),
    ell: Optional[int] = typer.Option(None, "--ell"),
    m: Optional[int] = typer.Option(None, "--m", help="Edge count for the theoretical tail"),
    as_json: bool = typer.Option(False, "--json"),
):
    """Histograms and tail statistics of MSVA run records."""
    try:
        loaded = read_records(records)
    except (OSError, ValueError) as e:
        raise _fail(e)

    summary = summarize_records(loaded, delta, ell, m)
    if as_json:
        _emit_json(summary.model_dump(by_alias=True))
        return

    console.print(_kv_table("records", {
        "runs": summary.runs,
        "outcomes": summary.outcomes,
        "appends": summary.appends,
        "backtracks": summary.backtracks,
        "max_backtrack_depth": summary.max_backtrack_depth,
        "tail_slope": summary.tail_slope,
        "mean_log_weight": summary.mean_log_weight,
        "proof_threshold_met": summary.proof_threshold_met,
        "prefix_violations": len(summary.prefix_violations),
    }))
    tail = Table(title="P[T >= t]")
    tail.add_column("t")
    tail.add_column("empirical")
    tail.add_column("bound")
    for t_value, p in summary.tail.items():
        bound = summary.theoretical_tail.get(t_value)
        tail.add_row(str(t_value), f"{p:.4g}", "-" if bound is None else f"{bound:.3g}")
    console.print(tail)


if __name__ == "__main__":
    app()
