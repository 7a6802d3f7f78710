"""
Tests for vizing/records.py
"""

import math

import pytest

from utils.constants import Outcome
from vizing.graph import gen_random_max_degree
from vizing.records import (
    RunRecord,
    fit_tail_slope,
    log_val,
    log_weight,
    proof_threshold_met,
    read_records,
    summarize_records,
    theoretical_tail,
    write_records,
)
from vizing.sequential import color_msva


# ==========================================
# FIXTURES
# ==========================================

@pytest.fixture
def records():
    return [
        RunRecord(edge=0, iterations=1, d=[], terminus=(0, 1)),
        RunRecord(edge=1, iterations=3, d=[1, 1], terminus=(5, 6)),
        RunRecord(edge=2, iterations=4, d=[1, 0, 1], terminus=(7, 8)),
        RunRecord(edge=3, iterations=3, d=[1, -1], terminus=(3, 2),
                  outcome=Outcome.ITERATION_CAP_HIT, attempt=2),
    ]


# ==========================================
# WEIGHTS
# ==========================================

class TestWeights:

    def test_log_val_by_entry(self):
        assert log_val(1, 3, 16) == pytest.approx(4 * math.log(3))
        assert log_val(0, 3, 16) == pytest.approx(math.log(20 * 3 ** 9))
        assert log_val(-2, 3, 16) == pytest.approx(math.log(75 * 16 * 3 ** 11))

    def test_log_val_rejects_large_entry(self):
        with pytest.raises(ValueError):
            log_val(2, 3, 16)

    def test_log_weight_sums(self):
        d = [1, 0, -1]
        expected = log_val(1, 4, 20) + log_val(0, 4, 20) + log_val(-1, 4, 20)
        assert log_weight(d, 4, 20) == pytest.approx(expected)
        assert log_weight([], 4, 20) == 0

    def test_theoretical_tail_capped_at_one(self):
        assert theoretical_tail(1, 1000, 3, 16) == 1.0

    def test_theoretical_tail_decays_with_huge_ell(self):
        ell = 10 ** 12
        first = theoretical_tail(2, 100, 2, ell)
        later = theoretical_tail(4, 100, 2, ell)
        assert 0 < later < first < 1

    def test_proof_threshold(self):
        assert not proof_threshold_met(3, 100)
        assert proof_threshold_met(2, 1200 * 2 ** 16)


# ==========================================
# RECORDS
# ==========================================

class TestRunRecord:

    def test_prefix_sums(self, records):
        assert all(r.prefix_sums_ok() for r in records)
        assert not RunRecord(edge=0, iterations=2, d=[-1], terminus=(0, 1)).prefix_sums_ok()

    def test_write_then_read(self, records, tmp_path):
        path = tmp_path / "records.jsonl"
        write_records(records, path)
        assert len(path.read_text().splitlines()) == len(records)
        back = read_records(path)
        assert back == records
        assert back[3].terminus == (3, 2)


class TestSummary:

    def test_counts(self, records):
        summary = summarize_records(records)
        assert summary.runs == 4
        assert summary.outcomes == {Outcome.SUCCESS: 3, Outcome.ITERATION_CAP_HIT: 1}
        assert summary.iteration_histogram == {1: 1, 3: 2, 4: 1}
        assert summary.d_histogram == {-1: 1, 0: 1, 1: 5}
        assert summary.appends == 5
        assert summary.backtracks == 2
        assert summary.max_backtrack_depth == 1
        assert summary.prefix_violations == []

    def test_empirical_tail(self, records):
        tail = summarize_records(records).tail
        assert tail[1] == 1.0
        assert tail[3] == 0.75
        assert tail[4] == 0.25
        assert tail[5] == 0.0

    def test_theory_needs_delta_and_ell(self, records):
        summary = summarize_records(records)
        assert summary.theoretical_tail == {}
        assert summary.proof_threshold_met is None
        assert summary.mean_log_weight is None

    def test_theory_with_parameters(self, records):
        summary = summarize_records(records, delta=3, ell=16, m=40)
        assert summary.proof_threshold_met is False
        assert summary.mean_log_weight > 0
        assert all(v < 1 for v in summary.theoretical_tail.values())

    def test_empty(self):
        summary = summarize_records([])
        assert summary.runs == 0
        assert summary.tail == {}
        assert summary.tail_slope is None

    def test_serializes_with_schema_alias(self, records):
        data = summarize_records(records).model_dump(by_alias=True)
        assert data["schema"] == 1


class TestTailSlope:

    def test_geometric_tail(self):
        tail = {t: 0.5 ** t for t in range(1, 8)}
        assert fit_tail_slope(tail) == pytest.approx(math.log(0.5))

    def test_too_few_points(self):
        assert fit_tail_slope({1: 1.0, 2: 0.0}) is None


class TestTailOnRealRuns:
    """
    Records from full MSVA colorings. ℓ is kept at its minimum so that
    multi-iteration calls are frequent enough to give a tail at desk scale.
    """

    def test_tail_decays(self):
        records = []
        edges = 0
        for seed in range(4):
            g = gen_random_max_degree(400, 5, seed, regular=True)
            _, _, run_records = color_msva(g, 4, seed)
            records.extend(run_records)
            edges += g.m

        summary = summarize_records(records, delta=5, ell=4, m=edges)
        assert summary.runs == len(records)
        assert summary.outcomes.get(Outcome.SUCCESS) == edges
        assert summary.prefix_violations == []

        tail = [summary.tail[t] for t in sorted(summary.tail)]
        assert tail[0] == 1.0
        assert all(b <= a for a, b in zip(tail, tail[1:]))
        assert summary.tail[2] > 0
        assert summary.tail_slope is not None
        assert summary.tail_slope < 0
