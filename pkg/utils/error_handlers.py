"""
Error Handling Utilities for the Vizing edge-coloring toolkit
Exception hierarchy, restart policy for capped MSVA calls, and exit-code mapping
"""

from typing import Any, Callable, Dict, Optional

from tenacity import (
    RetryCallState,
    Retrying,
    retry_if_exception_type,
    stop_after_attempt,
)

from utils.constants import ExitCode


class EdgeColoringError(Exception):
    """Base exception for the toolkit"""
    pass


# ==========================================
# INPUT ERRORS
# ==========================================

class GraphInputError(EdgeColoringError):
    """Errors in graph input or generator parameters"""

    def __init__(self, message: str, line_no: Optional[int] = None):
        self.line_no = line_no
        if line_no is not None:
            message = f"line {line_no}: {message}"
        super().__init__(message)


class MalformedLine(GraphInputError):
    pass


class DuplicateEdge(GraphInputError):
    pass


class SelfLoop(GraphInputError):
    pass


class InfeasibleParameters(GraphInputError):
    pass


# ==========================================
# COLORING ERRORS
# ==========================================

class ColoringError(EdgeColoringError):
    """Errors raised by coloring operations on caller misuse"""
    pass


class NotShiftable(ColoringError):
    """A chain pair failed the shiftability precondition"""

    def __init__(self, message: str, step: int = 0):
        self.step = step
        super().__init__(f"step {step}: {message}")


class NotHappy(ColoringError):
    pass


class EmptyMissingSet(ColoringError):
    pass


class DegreeTwoStart(ColoringError):
    pass


class PreconditionViolated(ColoringError):
    pass


# ==========================================
# INVARIANT VIOLATIONS (implementation bugs)
# ==========================================

class InvariantViolation(EdgeColoringError):
    """An internal guarantee failed; always a bug"""

    def __init__(self, message: str, diagnostics: Optional[Dict[str, Any]] = None):
        self.diagnostics = diagnostics or {}
        super().__init__(message)


class InternalFailReached(InvariantViolation):
    pass


class SnapshotViolation(InvariantViolation):
    pass


# ==========================================
# RUN LIMITS
# ==========================================

class IterationCapHit(EdgeColoringError):
    """MSVA did not finish within its iteration cap; carries the run record"""

    def __init__(self, record: Any):
        self.record = record
        super().__init__(f"iteration cap hit after {record.iterations} iterations")


class StageCapExceeded(EdgeColoringError):
    """The LOCAL simulator ran out of stages with edges still uncolored"""

    def __init__(self, residual: list, trace: list, coloring: Any = None):
        self.residual = residual
        self.trace = trace
        self.coloring = coloring
        super().__init__(f"{len(residual)} edges uncolored after {len(trace)} stages")


# ==========================================
# RESTART POLICY
# ==========================================

def restart_on_cap_hit(
    max_attempts: int,
    on_restart: Optional[Callable[[RetryCallState], None]] = None
) -> Retrying:
    """
    Build the retry controller used when an MSVA call hits its iteration cap.

    Restarts are immediate (no wait); the caller derives fresh randomness from
    the attempt number. The last IterationCapHit is re-raised once attempts
    run out.

    Example:
        for attempt in restart_on_cap_hit(8):
            with attempt:
                run(attempt.retry_state.attempt_number)
    """
    return Retrying(
        stop=stop_after_attempt(max_attempts),
        retry=retry_if_exception_type(IterationCapHit),
        before_sleep=on_restart,
        reraise=True,
    )


def exit_code_for(error: BaseException) -> int:
    """Map an exception to the CLI exit code"""
    if isinstance(error, (GraphInputError, ValueError, OSError)):
        return ExitCode.PARSE_ERROR
    if isinstance(error, StageCapExceeded):
        return ExitCode.STAGE_CAP
    if isinstance(error, InvariantViolation):
        return ExitCode.VALIDATION_FAILED
    return ExitCode.USAGE
