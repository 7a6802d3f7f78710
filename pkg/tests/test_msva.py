"""
Tests for vizing/msva.py
Visited index bookkeeping, the intersection order, a hand-built graph whose
first candidate is too long, and full runs over random partial colorings with
the debug audits switched on.
"""

import numpy as np
import pytest

from utils.constants import Outcome
from utils.error_handlers import IterationCapHit, InvariantViolation, PreconditionViolated
from vizing.chains import CandidateChain, first_chain
from vizing.coloring import BLANK, NO_EDGE, Fan, PartialColoring, PathChain, augment, shift_chain, validate
from vizing.graph import Graph, gen_random_max_degree
from vizing.msva import (
    MsvaRun,
    VisitedIndex,
    check_intersection,
    first_intersection,
    msva,
    visited_for,
)
from vizing.sequential import color_vizing


# ==========================================
# FIXTURES
# ==========================================

TAIL = 30


@pytest.fixture
def long_tail():
    """
    Δ = 3. Edge 0-1 is uncolored with M(0) = {1, 2} and M(1) = {3, 4}; the
    fan at 0 runs through leaves 2 and 3 and loops back. After shifting it,
    vertex 3 starts a 1/3 alternating path of more than 2ℓ edges, so the
    first candidate is cut and MSVA has to take a step.
    """
    edges = [
        (0, 1), (0, 2), (0, 3),
        (1, 4), (1, 5),
        (2, 6), (2, 7),
        (3, 8), (3, 9),
    ]
    colors = [BLANK, 3, 4, 1, 2, 1, 2, 2, 1]
    for i in range(TAIL):
        edges.append((9 + i, 10 + i))
        colors.append(3 if i % 2 == 0 else 1)
    g = Graph.from_edges(10 + TAIL, edges)
    return PartialColoring.from_colors(g, colors)


@pytest.fixture
def single_edge():
    return PartialColoring(Graph.from_edges(2, [(0, 1)]))


# ==========================================
# VISITED INDEX
# ==========================================

class TestVisitedIndex:

    def test_mark_and_clear(self):
        visited = VisitedIndex(8, 8)
        visited.reset()
        visited.mark_step(0, [1, 2], [5])
        visited.mark_step(1, [3], [6])
        assert visited.vertex(2) == 0
        assert visited.edge(6) == 1
        visited.clear_step(1, [3], [6])
        assert visited.vertex(3) is None
        assert visited.edge(6) is None
        assert visited.marked_vertices() == {1: 0, 2: 0}
        assert visited.marked_edges() == {5: 0}

    def test_clear_leaves_other_owners(self):
        visited = VisitedIndex(4, 4)
        visited.reset()
        visited.mark_step(0, [1], [])
        visited.clear_step(1, [1], [])
        assert visited.vertex(1) == 0

    def test_reset_drops_all_marks(self):
        visited = VisitedIndex(4, 4)
        visited.reset()
        visited.mark_step(0, [0, 1], [2])
        visited.reset()
        assert visited.marked_vertices() == {}
        assert visited.marked_edges() == {}

    def test_visited_for_reuses_large_enough_index(self):
        first = visited_for(50, 50)
        assert visited_for(10, 10) is first
        assert visited_for(100, 100).fits(100, 100)


# ==========================================
# INTERSECTION ORDER
# ==========================================

class TestFirstIntersection:

    @pytest.fixture
    def cand(self):
        # fan 0 -> leaves 1, 2 over edges 0, 1; path 1, 3, 4 through vertices 0, 2, 6, 7
        return CandidateChain(Fan(0, [1, 2], [0, 1]), PathChain([1, 3, 4], [0, 2, 6, 7]))

    @pytest.fixture
    def visited(self):
        index = VisitedIndex(10, 10)
        index.reset()
        return index

    def test_no_marks(self, cand, visited):
        assert first_intersection(cand, visited) is None

    def test_fan_leaf_before_path_edge(self, cand, visited):
        visited.mark_step(1, [], [4])
        visited.mark_step(0, [2], [])
        hit = first_intersection(cand, visited)
        assert (hit.step, hit.kind, hit.item) == (0, "vertex", 2)

    def test_pivot_checked_first(self, cand, visited):
        visited.mark_step(0, [1], [])
        visited.mark_step(1, [0], [])
        hit = first_intersection(cand, visited)
        assert (hit.step, hit.kind, hit.item) == (1, "vertex", 0)

    def test_path_edge(self, cand, visited):
        visited.mark_step(1, [], [4])
        hit = first_intersection(cand, visited)
        assert (hit.step, hit.kind, hit.item) == (1, "edge", 4)

    def test_fan_edge(self, cand, visited):
        visited.mark_step(0, [], [1])
        hit = first_intersection(cand, visited)
        assert (hit.kind, hit.item) == ("edge", 1)

    def test_check_intersection_rejects_stale_owner(self, cand, visited):
        visited.mark_step(3, [6], [])
        with pytest.raises(InvariantViolation):
            check_intersection([], cand, visited)


# ==========================================
# HAND-BUILT RUNS
# ==========================================

class TestMsvaOnLongTail:

    def test_first_candidate_is_cut(self, long_tail):
        cand = first_chain(long_tail, 0, 0, 4)
        assert cand.fan.leaves == [1, 2, 3]
        assert cand.alpha == 1 and cand.beta == 3
        assert len(cand.path) == 8
        assert cand.path.truncated

    @pytest.mark.parametrize("seed", range(6))
    def test_one_step_then_happy(self, long_tail, seed):
        before = long_tail.colors()
        chain, record = msva(long_tail, 0, 0, 4, 50, np.random.default_rng(seed), validate_debug=True)

        assert long_tail.colors() == before
        assert record.outcome == Outcome.SUCCESS
        assert record.d == [1]
        assert record.iterations == 2
        assert len(chain.steps) == 2
        assert 6 <= len(chain) <= 9
        assert record.terminus == (chain.end, chain.steps[-1][1].vend)

        augment(long_tail, chain.edges())
        report = validate(long_tail.graph, long_tail)
        assert report.valid
        assert report.uncolored == 0

    def test_cap_hit_carries_record(self, long_tail):
        before = long_tail.colors()
        with pytest.raises(IterationCapHit) as exc:
            msva(long_tail, 0, 0, 4, 1, np.random.default_rng(0))
        record = exc.value.record
        assert record.outcome == Outcome.ITERATION_CAP_HIT
        assert record.iterations == 1
        assert record.d == [1]
        assert long_tail.colors() == before

    def test_backtrack_restores_step(self, long_tail):
        before = long_tail.colors()
        run = MsvaRun(long_tail, 0, 0, 4, 10, np.random.default_rng(1))
        run.visited.reset()
        run.cand = first_chain(long_tail, 0, 0, 4)
        first = run.cand

        run.iterate()
        assert len(run.steps) == 1
        assert long_tail.colors() != before
        assert run.visited.vertex(3) == 0

        run.backtrack(0)
        assert run.steps == []
        assert run.cand is first
        assert long_tail.colors() == before
        assert run.visited.vertex(3) is None

    def test_backtrack_out_of_range(self, long_tail):
        run = MsvaRun(long_tail, 0, 0, 4, 10, np.random.default_rng(1))
        with pytest.raises(PreconditionViolated):
            run.backtrack(2)


class TestMsvaPreconditions:

    def test_happy_edge_succeeds_immediately(self, single_edge):
        chain, record = msva(single_edge, 0, 0, 4, 10, np.random.default_rng(0))
        assert chain.edges() == [0]
        assert record.iterations == 1
        assert record.d == []
        assert record.terminus == (0, 1)

    def test_colored_edge_rejected(self, long_tail):
        with pytest.raises(PreconditionViolated):
            msva(long_tail, 1, 0, 4, 10, np.random.default_rng(0))

    def test_vertex_must_be_endpoint(self, long_tail):
        with pytest.raises(PreconditionViolated):
            msva(long_tail, 0, 5, 4, 10, np.random.default_rng(0))

    def test_small_ell_rejected(self, long_tail):
        with pytest.raises(PreconditionViolated):
            msva(long_tail, 0, 0, 3, 10, np.random.default_rng(0))

    def test_zero_cap_rejected(self, long_tail):
        with pytest.raises(PreconditionViolated):
            msva(long_tail, 0, 0, 4, 0, np.random.default_rng(0))


# ==========================================
# RANDOM PARTIAL COLORINGS
# ==========================================

class TestMsvaOnRandomColorings:

    def test_colors_every_edge_with_audits(self, partial_colorings):
        rng = np.random.default_rng(7)
        for g, phi in partial_colorings:
            while phi.uncolored_count:
                e = phi.uncolored_edges()[0]
                x = g.ends[e][int(rng.integers(2))]
                before = phi.colors()
                chain, record = msva(phi, e, x, 4, 1000, rng, validate_debug=True)

                assert phi.colors() == before
                assert chain.edges()[0] == e
                assert record.prefix_sums_ok()
                assert record.iterations == len(record.d) + 1

                augment(phi, chain.edges())
                assert validate(g, phi).valid


# ==========================================
# DEBUG AUDIT AGAINST THE PRE-CALL COLORING
# ==========================================

class TestAuditAgainstOrigin:

    @pytest.fixture
    def stepped_run(self, long_tail):
        run = MsvaRun(long_tail, 0, 0, 4, 10, np.random.default_rng(3), validate_debug=True)
        run.visited.reset()
        run.cand = first_chain(long_tail, 0, 0, 4)
        run.iterate()
        assert len(run.steps) == 1
        return run

    def test_snapshot_is_taken_before_any_shift(self, stepped_run):
        assert stepped_run.origin.colors() != stepped_run.phi.colors()
        stepped_run.audit()
        stepped_run.rollback()
        assert stepped_run.origin.colors() == stepped_run.phi.colors()

    @pytest.mark.parametrize("edge,message", [
        (8, "alternating degree 1"),
        (10, "not colored by its pair"),
    ])
    def test_altered_origin_fails_audit(self, stepped_run, edge, message):
        # edge 8 is 3-9, the first path edge after Start(P); edge 10 lies deeper in the tail
        stepped_run.origin.clear(edge)
        with pytest.raises(InvariantViolation, match=message):
            stepped_run.audit()
        stepped_run.rollback()

    def test_no_snapshot_without_debug(self, long_tail):
        run = MsvaRun(long_tail, 0, 0, 4, 10, np.random.default_rng(0))
        assert run.origin is None


# ==========================================
# BACKTRACKING STATE
# ==========================================

def _expected_state(origin, steps):
    """Coloring and visited marks of a run holding exactly ``steps``, rebuilt from scratch."""
    phi = origin.copy()
    visited = VisitedIndex(phi.graph.n, phi.graph.m)
    visited.reset()
    for i, step in enumerate(steps):
        shift_chain(phi, step.shifted)
        visited.mark_step(i, step.fan.vertices(), step.path.internal_edges())
    return phi.colors(), visited.marked_vertices(), visited.marked_edges()


def _state(run):
    return run.phi.colors(), run.visited.marked_vertices(), run.visited.marked_edges()


def _kempe_swap(phi, v, a, b):
    """Swap a and b along the ab-path that starts at v, where a is missing."""
    edges, colors = [], []
    cur, want = v, b
    while True:
        f = phi.edge_at(cur, want)
        if f == NO_EDGE:
            break
        edges.append(f)
        colors.append(a if want == b else b)
        cur = phi.graph.other(f, cur)
        want = a if want == b else b
    for f in edges:
        phi.clear(f)
    for f, c in zip(edges, colors):
        phi.assign(f, c)


def _nearly_complete(seed):
    """
    Δ = 12 regular graph, fully colored, with a few edges cleared.

    Random Kempe swaps spread the missing colors over the palette so that
    fans and alternating paths run long.
    """
    g = gen_random_max_degree(120, 12, seed, regular=True)
    phi, _ = color_vizing(g, seed)
    rng = np.random.default_rng(seed)
    for _ in range(3000):
        v = int(rng.integers(g.n))
        a = phi.missing(v)[0]
        b = int(rng.integers(1, phi.num_colors + 1))
        if b != a:
            _kempe_swap(phi, v, a, b)
    cleared = sorted(int(e) for e in rng.choice(g.m, size=12, replace=False))
    for e in cleared:
        phi.clear(e)
    return phi, cleared


class TestBacktrackState:
    """
    Drives MsvaRun.iterate by hand on nearly complete colorings of dense
    graphs, where alternating paths are long enough for several steps.
    """

    L = 4

    def _drive(self, phi, e, x, seed):
        """
        Iterate until success or three active steps. Every backtrack is
        checked against a rebuild from the pre-call coloring, and on three
        steps the run is sent back to step 1 and replayed.

        Returns (replayed, backtracks to an earlier step).
        """
        run = MsvaRun(phi, e, x, self.L, 200, np.random.default_rng(seed), validate_debug=True)
        origin = run.origin
        run.visited.reset()
        run.cand = first_chain(phi, e, x, self.L)
        rng_before = {}
        earlier = 0
        try:
            for _ in range(200):
                if len(run.cand.path) < 2 * self.L:
                    return False, earlier
                k = len(run.steps)
                state = run.rng.bit_generator.state
                run.iterate()
                run.audit()
                if run.d[-1] == 1:
                    rng_before[k] = state
                else:
                    earlier += run.d[-1] < 0
                    assert _state(run) == _expected_state(origin, run.steps)
                if len(run.steps) == 3:
                    self._backtrack_and_replay(run, origin, rng_before)
                    return True, earlier
            return False, earlier
        finally:
            run.rollback()

    @staticmethod
    def _backtrack_and_replay(run, origin, rng_before):
        snapshot = _state(run)
        shifted = [list(s.shifted) for s in run.steps]
        cand_edges = run.cand.edges()
        step_one = run.steps[1].candidate

        run.backtrack(1)
        assert len(run.steps) == 1
        assert run.cand is step_one
        assert _state(run) == _expected_state(origin, run.steps)

        for k in (1, 2):
            run.rng.bit_generator.state = rng_before[k]
            run.iterate()
        assert [s.shifted for s in run.steps] == shifted
        assert run.cand.edges() == cand_edges
        assert _state(run) == snapshot

    def test_backtrack_then_replay_matches_original_run(self):
        replayed = 0
        earlier = 0
        for seed in range(8):
            phi, cleared = _nearly_complete(seed)
            before = phi.colors()
            for e in cleared:
                for x in phi.graph.ends[e]:
                    for run_seed in range(10):
                        found, backtracks = self._drive(phi, e, x, run_seed)
                        assert phi.colors() == before
                        replayed += found
                        earlier += backtracks
            if replayed and earlier:
                break
        assert replayed > 0
        assert earlier > 0
