"""
Structured Logging System for the Vizing edge-coloring toolkit
Provides JSON-formatted logging for easier parsing and analysis
"""

import logging
import json
import sys
import os
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, Optional
import traceback


class StructuredLogger:
    """
    Structured logger that outputs JSON-formatted logs.

    Console output goes to stderr so that commands printing JSON documents
    keep stdout machine-parseable.
    """

    def __init__(
        self,
        name: str,
        log_file: Optional[Path] = None,
        level: str = "INFO",
        include_console: bool = True
    ):
        """
        Initialize structured logger

        Args:
            name: Logger name (usually the module name)
            log_file: Path to log file (optional)
            level: Logging level (DEBUG, INFO, WARNING, ERROR, CRITICAL)
            include_console: Whether to also log to stderr
        """
        self.logger = logging.getLogger(name)
        self.logger.setLevel(getattr(logging, level.upper()))
        self.logger.handlers.clear()
        self.logger.propagate = False

        self.formatter = CustomJsonFormatter()

        if log_file:
            file_handler = logging.FileHandler(log_file)
            file_handler.setFormatter(self.formatter)
            self.logger.addHandler(file_handler)

        if include_console:
            console_handler = logging.StreamHandler(sys.stderr)
            console_handler.setFormatter(self.formatter)
            self.logger.addHandler(console_handler)

    def _add_context(self, extra: Optional[Dict] = None) -> Dict:
        """Add default context to log entries"""
        context = {
            "timestamp": datetime.now().isoformat(),
            "pid": os.getpid(),
        }
        if extra:
            context.update(extra)
        return context

    def is_debug(self) -> bool:
        return self.logger.isEnabledFor(logging.DEBUG)

    def debug(self, message: str, extra: Optional[Dict] = None):
        """Log debug message"""
        self.logger.debug(message, extra=self._add_context(extra))

    def info(self, message: str, extra: Optional[Dict] = None):
        """Log info message"""
        self.logger.info(message, extra=self._add_context(extra))

    def warning(self, message: str, extra: Optional[Dict] = None):
        """Log warning message"""
        self.logger.warning(message, extra=self._add_context(extra))

    def error(self, message: str, extra: Optional[Dict] = None, exc_info: bool = False):
        """Log error message"""
        context = self._add_context(extra)
        if exc_info:
            context["traceback"] = traceback.format_exc()
        self.logger.error(message, extra=context)

    def log_run_summary(self, algorithm: str, stats: Dict[str, Any]):
        """
        Log the summary of a full coloring run

        Args:
            algorithm: Colorer that produced the run (greedy, vizing, msva)
            stats: Run statistics as a plain dict
        """
        extra = {
            "component": "sequential",
            "action": "color",
            "status": "completed",
            "details": {"algorithm": algorithm, **stats},
        }
        self.info(f"Coloring completed: {algorithm}", extra=extra)

    def log_msva_outcome(self, edge: int, attempt: int, record: Dict[str, Any]):
        """Per-call MSVA outcome. DEBUG only; hot path."""
        if not self.is_debug():
            return
        extra = {
            "component": "msva",
            "action": "msva_call",
            "status": record.get("outcome"),
            "details": {"edge": edge, "attempt": attempt, **record},
        }
        self.debug("MSVA call finished", extra=extra)

    def log_restart(self, edge: int, attempt: int, iterations: int):
        extra = {
            "component": "msva",
            "action": "restart",
            "status": "retrying",
            "details": {"edge": edge, "attempt": attempt, "iterations": iterations},
        }
        self.warning(f"MSVA iteration cap hit on edge {edge}, restarting", extra=extra)

    def log_stage(self, row: Dict[str, Any]):
        """
        Log one LOCAL-simulator stage

        Args:
            row: Stage trace row (stage, U, S, W, gamma_edges, ...)
        """
        extra = {
            "component": "local_sim",
            "action": "stage",
            "status": "completed",
            "details": row,
        }
        self.info(f"Stage {row.get('stage')} completed", extra=extra)


class CustomJsonFormatter(logging.Formatter):
    """
    Custom JSON formatter that formats log records as JSON
    """

    _FIELDS = ("component", "action", "status", "details", "traceback", "pid")

    def format(self, record):
        log_data = {
            "timestamp": getattr(record, "timestamp", datetime.now().isoformat()),
            "level": record.levelname,
            "logger": record.name,
            "message": record.getMessage(),
        }

        for field in self._FIELDS:
            if hasattr(record, field):
                log_data[field] = getattr(record, field)

        return json.dumps(log_data, default=str)


# ==========================================
# LOGGER FACTORY
# ==========================================

_loggers: Dict[str, StructuredLogger] = {}


def get_logger(
    name: str,
    component: Optional[str] = None,
    log_to_file: Optional[bool] = None,
    log_level: Optional[str] = None
) -> StructuredLogger:
    """
    Get or create a structured logger

    Args:
        name: Logger name
        component: Component name (for file naming)
        log_to_file: Whether to log to file; defaults to VIZING_LOG_TO_FILE
        log_level: Logging level; defaults to VIZING_LOG_LEVEL

    Returns:
        StructuredLogger instance
    """
    if name in _loggers:
        return _loggers[name]

    from utils.constants import LOG_LEVEL, LOG_TO_FILE, LOGS_DIR

    if log_to_file is None:
        log_to_file = LOG_TO_FILE

    log_file = None
    if log_to_file:
        LOGS_DIR.mkdir(parents=True, exist_ok=True)
        date_str = datetime.now().strftime("%Y%m%d")
        log_file = LOGS_DIR / f"{component or name}_{date_str}.log"

    logger = StructuredLogger(
        name=name,
        log_file=log_file,
        level=log_level or LOG_LEVEL,
        include_console=True
    )

    _loggers[name] = logger
    return logger


def set_level(level: str):
    """Change the level of every logger created so far."""
    for logger in _loggers.values():
        logger.logger.setLevel(getattr(logging, level.upper()))

