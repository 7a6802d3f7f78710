"""
Tests for the utils package: structured logging, the error hierarchy and
exit codes, the restart policy, seeded substreams and derived defaults.
"""

import json

import pytest
from tenacity import RetryError

from utils import constants
from utils.constants import ExitCode, Outcome
from utils.error_handlers import (
    ColoringError,
    DuplicateEdge,
    EdgeColoringError,
    GraphInputError,
    InternalFailReached,
    InvariantViolation,
    IterationCapHit,
    MalformedLine,
    NotShiftable,
    SnapshotViolation,
    StageCapExceeded,
    exit_code_for,
    restart_on_cap_hit,
)
from utils.rng import coin, substream
from utils.structured_logger import StructuredLogger, get_logger, set_level
from vizing.records import RunRecord


def _entries(log_file):
    return [json.loads(line) for line in log_file.read_text().splitlines() if line.strip()]


def _capped_record(edge=0, iterations=3):
    return RunRecord(edge=edge, iterations=iterations, d=[1] * iterations, terminus=(0, 1),
                     outcome=Outcome.ITERATION_CAP_HIT)


# ==========================================
# STRUCTURED LOGGER
# ==========================================

class TestStructuredLogger:

    def test_writes_json_lines(self, tmp_path):
        log_file = tmp_path / "run.log"
        logger = StructuredLogger("test.json_lines", log_file=log_file, include_console=False)
        logger.info("hello", extra={"component": "msva", "action": "restart", "details": {"edge": 4}})
        logger.log_restart(7, 2, 100)
        logger.log_restart(7, 3, 100)
        logger.log_restart(9, 2, 100)

        entries = _entries(log_file)
        assert entries[0]["message"] == "hello"
        assert entries[0]["level"] == "INFO"
        assert entries[1]["details"] == {"edge": 7, "attempt": 2, "iterations": 100}
        restarts = [e for e in entries if e.get("action") == "restart"]
        assert [e["level"] for e in restarts[1:]] == ["WARNING"] * 3
        assert [e["details"]["edge"] for e in restarts] == [4, 7, 7, 9]

    def test_msva_outcome_only_at_debug(self, tmp_path):
        log_file = tmp_path / "debug.log"
        logger = StructuredLogger("test.debug_only", log_file=log_file, include_console=False)
        logger.log_msva_outcome(1, 1, {"outcome": "success"})
        assert _entries(log_file) == []

        logger.logger.setLevel("DEBUG")
        logger.log_msva_outcome(1, 1, {"outcome": "success"})
        (entry,) = _entries(log_file)
        assert entry["status"] == "success"

    def test_get_logger_caches(self):
        assert get_logger("test.cached") is get_logger("test.cached")

    def test_set_level_applies_to_existing(self):
        logger = get_logger("test.levels")
        set_level("ERROR")
        try:
            assert logger.logger.level == 40
        finally:
            set_level(constants.LOG_LEVEL)

    def test_stage_summary_serializes(self, tmp_path):
        log_file = tmp_path / "stage.log"
        logger = StructuredLogger("test.stage", log_file=log_file, include_console=False)
        logger.log_stage({"stage": 3, "U": 10, "W": 4})
        line = log_file.read_text().strip()
        assert json.loads(line)["message"] == "Stage 3 completed"


# ==========================================
# ERRORS AND EXIT CODES
# ==========================================

class TestErrors:

    def test_hierarchy(self):
        assert issubclass(MalformedLine, GraphInputError)
        assert issubclass(NotShiftable, ColoringError)
        assert issubclass(InternalFailReached, InvariantViolation)
        assert issubclass(SnapshotViolation, InvariantViolation)
        for cls in (GraphInputError, ColoringError, InvariantViolation, IterationCapHit, StageCapExceeded):
            assert issubclass(cls, EdgeColoringError)

    def test_line_number_in_message(self):
        err = DuplicateEdge("edge 1-0 repeated", line_no=12)
        assert err.line_no == 12
        assert "line 12" in str(err)

    def test_not_shiftable_step(self):
        assert NotShiftable("blocked", step=3).step == 3

    def test_invariant_diagnostics(self):
        err = InvariantViolation("broken", diagnostics={"edge": 5})
        assert err.diagnostics == {"edge": 5}

    def test_cap_hit_carries_record(self):
        record = _capped_record(iterations=7)
        err = IterationCapHit(record)
        assert err.record is record
        assert "7" in str(err)

    def test_stage_cap_message(self):
        err = StageCapExceeded([1, 2], [{}, {}, {}])
        assert "2 edges uncolored after 3 stages" in str(err)

    @pytest.mark.parametrize("error,code", [
        (MalformedLine("bad"), ExitCode.PARSE_ERROR),
        (ValueError("bad"), ExitCode.PARSE_ERROR),
        (FileNotFoundError("gone"), ExitCode.PARSE_ERROR),
        (InvariantViolation("broken"), ExitCode.VALIDATION_FAILED),
        (SnapshotViolation("overlap"), ExitCode.VALIDATION_FAILED),
        (StageCapExceeded([1], []), ExitCode.STAGE_CAP),
        (IterationCapHit(_capped_record()), ExitCode.USAGE),
    ])
    def test_exit_codes(self, error, code):
        assert exit_code_for(error) == code


# ==========================================
# RESTART POLICY
# ==========================================

class TestRestartPolicy:

    def test_restarts_until_success(self):
        seen = []
        restarted = []
        for attempt in restart_on_cap_hit(5, on_restart=lambda state: restarted.append(state.attempt_number)):
            with attempt:
                number = attempt.retry_state.attempt_number
                seen.append(number)
                if number < 3:
                    raise IterationCapHit(_capped_record())
        assert seen == [1, 2, 3]
        assert restarted == [1, 2]

    def test_reraises_last_cap_hit(self):
        with pytest.raises(IterationCapHit):
            for attempt in restart_on_cap_hit(2):
                with attempt:
                    raise IterationCapHit(_capped_record())

    def test_other_errors_are_not_retried(self):
        calls = []
        with pytest.raises(InvariantViolation):
            for attempt in restart_on_cap_hit(5):
                with attempt:
                    calls.append(1)
                    raise InvariantViolation("broken")
        assert len(calls) == 1

    def test_never_wraps_in_retry_error(self):
        try:
            for attempt in restart_on_cap_hit(1):
                with attempt:
                    raise IterationCapHit(_capped_record())
        except RetryError:
            pytest.fail("cap hit should be re-raised as itself")
        except IterationCapHit:
            pass


# ==========================================
# SEEDED SUBSTREAMS
# ==========================================

class TestSubstream:

    def test_same_key_same_draws(self):
        a = substream(42, "msva", 7, 1).random(5)
        b = substream(42, "msva", 7, 1).random(5)
        assert (a == b).all()

    def test_keys_are_independent(self):
        base = substream(42, "msva", 7, 1).random(5)
        assert (substream(42, "msva", 7, 2).random(5) != base).any()
        assert (substream(42, "sim", 7, 1).random(5) != base).any()
        assert (substream(43, "msva", 7, 1).random(5) != base).any()

    def test_unknown_stream_name(self):
        with pytest.raises(KeyError):
            substream(0, "nope")

    def test_coin_is_fair_enough(self):
        rng = substream(0, "driver")
        heads = sum(coin(rng) for _ in range(4000))
        assert 1800 < heads < 2200


# ==========================================
# DERIVED DEFAULTS
# ==========================================

class TestDefaults:

    def test_default_ell(self, monkeypatch):
        monkeypatch.setattr(constants, "ELL_OVERRIDE", None)
        assert constants.default_ell(1) == 16
        assert constants.default_ell(5) == 100

    def test_ell_override(self, monkeypatch):
        monkeypatch.setattr(constants, "ELL_OVERRIDE", 24)
        assert constants.default_ell(5) == 24

    def test_iteration_cap(self):
        assert constants.default_iteration_cap(1024) == 64 * 11
        assert constants.default_iteration_cap(1) == 64 * 2

    def test_local_budget_override(self, monkeypatch):
        monkeypatch.setattr(constants, "LOCAL_BUDGET_OVERRIDE", 9)
        assert constants.default_local_budget(10_000) == 9

    def test_env_parsing(self, monkeypatch):
        monkeypatch.setenv("VIZING_SOME_FLAG", "yes")
        monkeypatch.setenv("VIZING_SOME_INT", "12")
        assert constants._env_bool("SOME_FLAG") is True
        assert constants._env_int("SOME_INT", 0) == 12
        assert constants._env_int("UNSET_INT", 5) == 5
