"""
Shared Constants for the Vizing edge-coloring toolkit
Centralized configuration and constants used across all modules
"""

from pathlib import Path
import math
import os
from dotenv import load_dotenv

# Load environment variables
load_dotenv()

ENV_PREFIX = "VIZING_"


def _env(name: str, default: str | None = None) -> str | None:
    return os.getenv(f"{ENV_PREFIX}{name}", default)


def _env_int(name: str, default: int | None) -> int | None:
    raw = _env(name)
    if raw is None or raw == "":
        return default
    return int(raw)


def _env_bool(name: str, default: bool = False) -> bool:
    raw = _env(name)
    if raw is None:
        return default
    return raw.strip().lower() in ("1", "true", "yes", "on")


# ==========================================
# DIRECTORY PATHS
# ==========================================

BASE_DIR = Path(__file__).parent.parent
LOGS_DIR = Path(_env("LOGS_DIR", str(BASE_DIR / "logs")))

# ==========================================
# ALGORITHMS AND OUTCOMES
# ==========================================

class Algorithm:
    """Colorer identifiers accepted by the CLI and the bench harness"""
    GREEDY = "greedy"
    VIZING = "vizing"
    MSVA = "msva"

    ALL = (GREEDY, VIZING, MSVA)


class Outcome:
    """Outcome of a single MSVA call"""
    SUCCESS = "success"
    ITERATION_CAP_HIT = "iteration_cap_hit"


class ExitCode:
    """Process exit codes"""
    OK = 0
    USAGE = 1
    PARSE_ERROR = 2
    VALIDATION_FAILED = 3
    STAGE_CAP = 4


class GraphFormat:
    EDGE_LIST = "el"
    JSON = "json"


# ==========================================
# SERIALIZATION
# ==========================================

SCHEMA_VERSION = 1
BLANK_TOKEN = "-"

# ==========================================
# RUN CONFIGURATION
# ==========================================

DEFAULT_SEED = _env_int("SEED", 0)
ELL_OVERRIDE = _env_int("ELL", None)
LOCAL_BUDGET_OVERRIDE = _env_int("T", None)
STAGE_CAP = _env_int("STAGE_CAP", 200)
VALIDATE_DEBUG = _env_bool("VALIDATE_DEBUG", False)
MAX_RESTARTS = _env_int("MAX_RESTARTS", 8)
BENCH_WORKERS = _env_int("BENCH_WORKERS", os.cpu_count() or 1)

# Smallest truncation parameter the chain builders accept
MIN_ELL = 4

# ==========================================
# LOGGING CONFIGURATION
# ==========================================

LOG_LEVEL = _env("LOG_LEVEL", "INFO")
LOG_TO_FILE = _env_bool("LOG_TO_FILE", False)


# ==========================================
# DERIVED DEFAULTS
# ==========================================

def default_ell(delta: int) -> int:
    """Truncation parameter used when none is given: max(16, 4·Δ²)."""
    if ELL_OVERRIDE is not None:
        return ELL_OVERRIDE
    return max(16, 4 * delta * delta)


def default_iteration_cap(n: int) -> int:
    """MSVA iteration cap: 64·(1 + ⌈log₂ n⌉)."""
    return 64 * (1 + math.ceil(math.log2(max(n, 2))))


def default_local_budget(n: int) -> int:
    """Per-stage MSVA iteration budget t for the LOCAL simulator."""
    if LOCAL_BUDGET_OVERRIDE is not None:
        return LOCAL_BUDGET_OVERRIDE
    return default_iteration_cap(n)
