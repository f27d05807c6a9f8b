import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sarbandits.algorithms import (
    ACCEPT,
    REJECT,
    SAR,
    BudgetTooSmall,
    Event,
    GapE,
    MultiSAR,
    SuccessiveRejects,
    Uniform,
    drive,
    empirical_gaps,
    random_priority,
    run_gap_e,
    run_sar_m_best,
    run_sar_multibandit,
    run_sr_m_best,
    run_uniform,
    sar_schedule,
    sr_normalizer,
    sr_schedule,
)
from sarbandits.complexity import complexity_m_best, overline_log
from sarbandits.model import (
    BanditInstance,
    MultiBanditInstance,
    PreconditionError,
    is_correct_multibandit,
    is_correct_selection,
)
from sarbandits.rng import RngStream


def rng(trial=0):
    return RngStream(2024, trial)


class TestSchedules:
    @pytest.mark.parametrize(
        "n, K, expected, used",
        [(100, 3, (25, 37), 99), (200, 4, (31, 42, 62), 197), (10, 2, (4,), 8)],
    )
    def test_sar_examples(self, n, K, expected, used):
        schedule = sar_schedule(n, K)
        assert schedule.n_k == expected
        assert schedule.phase_count == K - 1
        assert schedule.total_pulls(K) == used

    def test_sr_example(self):
        schedule = sr_schedule(100, 5, 2)
        assert sr_normalizer(5, 2) == pytest.approx(1.45)
        assert schedule.n_k == (14, 17, 22)
        assert schedule.total_pulls(5) == 97

    def test_sr_m1_is_sar(self):
        assert sr_schedule(100, 3, 1).n_k == sar_schedule(100, 3).n_k == (25, 37)

    @pytest.mark.parametrize("K", range(2, 40))
    def test_sr_normalizer_at_m1(self, K):
        assert sr_normalizer(K, 1) == overline_log(K)

    def test_budget_too_small(self):
        with pytest.raises(BudgetTooSmall):
            sar_schedule(3, 3)
        with pytest.raises(BudgetTooSmall):
            sr_schedule(5, 5, 1)

    @settings(max_examples=300, deadline=None)
    @given(st.integers(2, 60), st.integers(1, 50_000), st.data())
    def test_budget_law(self, K, extra, data):
        n = K + extra
        m = data.draw(st.integers(1, K - 1))
        for schedule, phases in ((sar_schedule(n, K), K - 1), (sr_schedule(n, K, m), K - m)):
            assert schedule.phase_count == phases
            assert all(a <= b for a, b in zip(schedule.n_k, schedule.n_k[1:]))
            assert schedule.n_k[0] >= 1
            assert schedule.total_pulls(K) <= n
        assert sum(Uniform.allocation(n, K)) == n


class TestEmpiricalGaps:
    def test_examples(self):
        assert empirical_gaps((0.9, 0.5, 0.1), 1) == pytest.approx([0.4, 0.4, 0.8])
        assert empirical_gaps((0.9, 0.5, 0.1), 2) == pytest.approx([0.8, 0.4, 0.4])
        assert empirical_gaps((0.3, 0.3, 0.3), 1) == [0.0, 0.0, 0.0]

    def test_range(self):
        with pytest.raises(PreconditionError):
            empirical_gaps((0.1, 0.2), 2)


class TestSAR:
    def test_hand_trace(self):
        inst = BanditInstance.point_mass([0.9, 0.5, 0.1])
        assert sar_schedule(20, 3).n_k == (5, 7)
        result = run_sar_m_best(inst, 1, 20, rng())
        assert result.events == (Event(1, 3, REJECT), Event(2, 1, ACCEPT))
        assert result.selected == (1,)
        assert result.pulls == (7, 7, 5)
        assert result.total_pulls == 19

    def test_two_best_of_four(self):
        inst = BanditInstance.point_mass([0.9, 0.6, 0.3, 0.1])
        assert set(run_sar_m_best(inst, 2, 40, rng()).selected) == {1, 2}

    @pytest.mark.parametrize("K", [2, 3, 5, 8])
    def test_m_is_k_minus_one(self, K):
        means = [1 - i / K for i in range(K)]
        result = run_sar_m_best(BanditInstance.point_mass(means), K - 1, 10 * K, rng())
        assert result.selected == tuple(range(1, K))

    def test_early_stop_when_all_accepted(self):
        # the top gap ties the others and wins by index, so arm 1 is accepted first
        inst = BanditInstance.point_mass([0.9, 0.1, 0.1, 0.1])
        result = run_sar_m_best(inst, 1, 100, rng())
        assert result.events[0] == Event(1, 1, ACCEPT)
        assert result.accepts == 1 and len(result.events) == 1
        assert result.total_pulls < 100

    def test_accept_rest_when_remaining_equal_needed(self):
        inst = BanditInstance.point_mass([0.1, 0.2, 0.9, 0.8])
        result = run_sar_m_best(inst, 2, 100, rng())
        assert result.rejects == 2 and result.accepts == 2
        assert result.selected == (3, 4)

    def test_equal_means_reject(self):
        # accept requires strictly exceeding the (m+1)-th mean
        inst = BanditInstance.point_mass([0.5, 0.5, 0.5])
        result = run_sar_m_best(inst, 1, 30, rng())
        assert result.events[0].action == REJECT

    def test_preconditions(self):
        inst = BanditInstance.point_mass([0.5, 0.4])
        with pytest.raises(PreconditionError):
            run_sar_m_best(inst, 2, 10, rng())
        with pytest.raises(BudgetTooSmall):
            run_sar_m_best(inst, 1, 2, rng())

    @settings(max_examples=100, deadline=None)
    @given(
        st.lists(st.sampled_from([i / 10 for i in range(11)]), min_size=2, max_size=8),
        st.integers(0, 400),
        st.integers(0, 10**6),
        st.data(),
    )
    def test_accounting(self, means, extra, trial, data):
        K = len(means)
        m = data.draw(st.integers(1, K - 1))
        n = K + 1 + extra
        result = run_sar_m_best(BanditInstance.bernoulli(means), m, n, rng(trial))
        accepted = [e.arm for e in result.events if e.action == ACCEPT]
        deactivated = [e.arm for e in result.events]
        assert result.accepts == m and sorted(accepted) == list(result.selected)
        assert len(set(deactivated)) == len(deactivated)
        assert [e.phase for e in result.events if e.phase < K] == sorted(
            e.phase for e in result.events if e.phase < K
        )
        assert result.total_pulls == sum(result.pulls) <= n


class TestMultiSAR:
    def test_hand_trace(self):
        multi = MultiBanditInstance.point_mass([[0.9, 0.1], [0.6, 0.4]])
        assert sar_schedule(40, 4).n_k == (6, 8, 12)
        result = run_sar_multibandit(multi, 40, rng())
        assert [(e.arm, e.action) for e in result.events] == [
            ((2, 1), REJECT), ((1, 1), ACCEPT), ((2, 2), REJECT), ((1, 2), ACCEPT),
        ]
        assert result.selected == (1, 1)
        assert result.total_pulls == 38

    def test_single_problem(self):
        multi = MultiBanditInstance.point_mass([[0.8, 0.2]])
        assert run_sar_multibandit(multi, 10, rng()).selected == (1,)

    def test_lexicographic_ties(self):
        multi = MultiBanditInstance.point_mass([[0.9, 0.1], [0.9, 0.1]])
        result = run_sar_multibandit(multi, 40, rng())
        assert result.events[0].arm == (2, 1)
        assert result.selected == (1, 1)

    def test_preconditions(self):
        multi = MultiBanditInstance.point_mass([[0.9, 0.1], [0.6, 0.4]])
        with pytest.raises(BudgetTooSmall):
            run_sar_multibandit(multi, 4, rng())

    @settings(max_examples=60, deadline=None)
    @given(st.integers(1, 3), st.integers(2, 4), st.integers(0, 300), st.integers(0, 10**6))
    def test_one_pair_per_phase(self, M, K, extra, trial):
        r = random.Random(trial)
        multi = MultiBanditInstance.bernoulli([[r.random() for _ in range(K)] for _ in range(M)])
        n = M * K + 1 + extra
        result = run_sar_multibandit(multi, n, rng(trial))
        assert [e.phase for e in result.events] == list(range(1, M * K + 1))
        assert sum(e.action == ACCEPT for e in result.events) == M
        assert result.total_pulls <= n


class TestSR:
    def test_rejects_worst(self):
        inst = BanditInstance.point_mass([0.9, 0.6, 0.3])
        result = run_sr_m_best(inst, 2, 30, rng())
        assert result.events == (Event(1, 3, REJECT),)
        assert result.selected == (1, 2)

    def test_survivors(self):
        inst = BanditInstance.bernoulli([0.5, 0.4, 0.3, 0.2, 0.1])
        result = run_sr_m_best(inst, 2, 100, rng())
        assert len(result.selected) == 2 and result.total_pulls <= 100

    def test_matches_sar_rejections(self):
        # strictly decreasing point masses: SAR with m=1 never accepts early
        inst = BanditInstance.point_mass([0.9, 0.7, 0.6, 0.55])
        sar = run_sar_m_best(inst, 1, 200, rng())
        sr = run_sr_m_best(inst, 1, 200, rng())
        rejected = [e.arm for e in sar.events if e.action == REJECT]
        assert rejected == [e.arm for e in sr.events][: len(rejected)] == [4, 3]
        assert sar.pulls == sr.pulls


class TestUniform:
    def test_allocation(self):
        assert Uniform.allocation(10, 4) == [3, 3, 2, 2]

    def test_selection(self):
        inst = BanditInstance.point_mass([0.9, 0.5, 0.1])
        result = run_uniform(inst, 2, 9, rng())
        assert result.selected == (1, 2) and result.total_pulls == 9

    def test_budget(self):
        with pytest.raises(BudgetTooSmall):
            run_uniform(BanditInstance.point_mass([0.9, 0.5, 0.1]), 1, 2, rng())

    def test_lower_index_wins_ties(self):
        inst = BanditInstance.point_mass([0.3, 0.5, 0.5])
        assert run_uniform(inst, 1, 6, rng()).selected == (2,)


class TestGapE:
    def test_first_index(self):
        strategy = GapE(3, 1, 30, 2.0, 14.0625)
        for value in (0.9, 0.5, 0.1):
            strategy.next_pull()
            strategy.observe(value)
        assert strategy.index() == pytest.approx([2.52119, 2.52119, 2.12119], abs=1e-5)
        assert strategy.next_pull() == 1

    def test_run(self):
        inst = BanditInstance.point_mass([0.9, 0.5, 0.1])
        result = run_gap_e(inst, 1, 30, 2.0, 14.0625, rng())
        assert result.selected == (1,) and result.total_pulls == 30
        assert all(p >= 1 for p in result.pulls)

    def test_exploitation_limit(self):
        # with c -> 0 the index is -gap; arms 1 and 2 share the minimal gap
        inst = BanditInstance.point_mass([0.9, 0.5, 0.1])
        result = run_gap_e(inst, 1, 30, 1e-12, 14.0625, rng())
        assert result.pulls[2] == 1
        assert result.pulls[0] + result.pulls[1] == 29

    def test_shift_invariance(self):
        a, b = GapE(4, 2, 40, 2.0, 10.0), GapE(4, 2, 40, 2.0, 10.0)
        for base in (0.1, 0.35, 0.2, 0.3, 0.15):
            for strategy, shift in ((a, 0.0), (b, 0.5)):
                strategy.next_pull()
                strategy.observe(base + shift)
        assert a.next_pull() == b.next_pull()

    def test_preconditions(self):
        with pytest.raises(PreconditionError):
            GapE(3, 1, 30, 0.0, 1.0)
        with pytest.raises(PreconditionError):
            GapE(3, 1, 30, 1.0, 0.0)
        with pytest.raises(BudgetTooSmall):
            GapE(3, 1, 2, 1.0, 1.0)


class TestPointMassSoundness:
    @settings(max_examples=100, deadline=None)
    @given(st.lists(st.integers(0, 20), min_size=2, max_size=8), st.data())
    def test_every_strategy_is_correct(self, ticks, data):
        means = [t / 20 for t in ticks]
        K = len(means)
        m = data.draw(st.integers(1, K - 1))
        ordered = sorted(means, reverse=True)
        inst = BanditInstance.point_mass(means)
        n = 20 * K
        runs = [
            run_sar_m_best(inst, m, n, rng()),
            run_sr_m_best(inst, m, n, rng()),
            run_uniform(inst, m, n, rng()),
        ]
        if ordered[m - 1] != ordered[m]:
            h1 = complexity_m_best(means, m).H1
            runs.append(run_gap_e(inst, m, n, 2.0, h1, rng()))
        for result in runs:
            assert is_correct_selection(inst, m, result.selected)


class TestPriority:
    def test_random_priority_is_permutation(self):
        for trial in range(50):
            rank = random_priority(7, rng(trial))
            assert sorted(rank) == list(range(7))

    def test_priority_decides_ties(self):
        inst = BanditInstance.point_mass([0.5, 0.5, 0.1])
        assert run_uniform(inst, 1, 9, rng(), priority=[1, 0, 2]).selected == (2,)
        # the tied leader is deactivated first and rejected (acceptance is strict)
        sar = run_sar_m_best(inst, 1, 30, rng(), priority=[1, 0, 2])
        assert sar.events[1] == Event(2, 2, REJECT) and sar.selected == (1,)
        # SR rejects the lowest mean, ties going to the lower rank
        assert run_sr_m_best(inst, 1, 30, rng()).selected == (2,)
        assert run_sr_m_best(inst, 1, 30, rng(), priority=[1, 0, 2]).selected == (1,)

    def test_priority_must_be_permutation(self):
        with pytest.raises(PreconditionError):
            SAR(3, 1, 30, priority=[0, 0, 1])

    def test_identity_is_default(self):
        inst = BanditInstance.bernoulli([0.5, 0.5, 0.4, 0.4])
        for trial in range(30):
            plain = run_sar_m_best(inst, 2, 40, rng(trial))
            ranked = run_sar_m_best(inst, 2, 40, rng(trial), priority=[0, 1, 2, 3])
            assert plain == ranked


class TestDeterminism:
    @pytest.mark.parametrize(
        "make",
        [
            lambda: SAR(5, 2, 200),
            lambda: SuccessiveRejects(5, 2, 200),
            lambda: Uniform(5, 2, 200),
            lambda: GapE(5, 2, 200, 2.0, 50.0),
        ],
    )
    def test_same_stream_same_result(self, make):
        arms = BanditInstance.bernoulli([0.5, 0.45, 0.4, 0.3, 0.2]).arms
        assert drive(make(), arms, rng(3)) == drive(make(), arms, rng(3))

    def test_clone_is_independent(self):
        arms = BanditInstance.bernoulli([0.5, 0.45, 0.4]).arms
        strategy = SAR(3, 1, 60)
        r = rng(1)
        for _ in range(10):
            strategy.observe(float(arms[strategy.next_pull() - 1].p > r.random()))
        twin = strategy.clone()
        left, right = drive(strategy, arms, rng(8)), drive(twin, arms, rng(8))
        assert left == right
        assert strategy is not twin

    def test_multibandit(self):
        multi = MultiBanditInstance.bernoulli([[0.5, 0.4, 0.3], [0.7, 0.1, 0.6]])
        assert run_sar_multibandit(multi, 90, rng(4)) == run_sar_multibandit(multi, 90, rng(4))
        assert is_correct_multibandit(multi, run_sar_multibandit(multi, 90, rng(4)).selected) in (
            True, False,
        )
