"""Formation-game tests: restricted utilities, admissibility, convergence."""

import json

import numpy as np
import pytest

from bscluster.coalition_formation import (
    PlayerState,
    acceptable_coalitions,
    is_admissible,
    is_individually_stable,
    restricted_utility,
    resolve_budgets,
    run_formation,
)
from bscluster.network import ScenarioConfig, derive_rng, generate_network
from bscluster.partitions import CoalitionStructure, bell_number, grand, singletons
from bscluster.rate_model import RateContext, ia_feasible, throughput

TINY = 1e-300


def make_ctx(gamma, *, power=1.0, noise=1.0, m=4, n=2, l_coh=2700.0):
    return RateContext(
        gamma=np.asarray(gamma, dtype=float),
        tx_power_w=power,
        noise_power_w=noise,
        bs_antennas=m,
        ms_antennas=n,
        streams=1,
        coherence_block_symbols=l_coh,
    )


def random_instance(seed, k=8, *, m=4, n=2):
    cfg = ScenarioConfig(num_users=k, bs_antennas=m, ms_antennas=n)
    net = generate_network(cfg, derive_rng(9000, seed))
    return RateContext.from_network(net, cfg)


def fresh_states(k, budget):
    return {u: PlayerState(budget=budget) for u in range(1, k + 1)}


ZERO_CROSS_2 = [[1.0, TINY], [TINY, 1.0]]


class TestRestrictedUtility:
    def test_fresh_state_equals_throughput(self):
        ctx = make_ctx(ZERO_CROSS_2)
        s = singletons(2)
        state = PlayerState(budget=2)
        assert restricted_utility(1, s, state, ctx) == throughput(ctx, s).per_user[0]

    def test_history_zeroes(self):
        ctx = make_ctx(ZERO_CROSS_2)
        s = singletons(2)
        state = PlayerState(budget=2, history={frozenset({1})})
        assert restricted_utility(1, s, state, ctx) == 0.0

    def test_exhausted_budget_zeroes(self):
        ctx = make_ctx(ZERO_CROSS_2)
        s = singletons(2)
        state = PlayerState(budget=2, comm_count=3)
        assert restricted_utility(1, s, state, ctx) == 0.0

    def test_budget_boundary_still_counts(self):
        ctx = make_ctx(ZERO_CROSS_2)
        s = singletons(2)
        state = PlayerState(budget=2, comm_count=2)
        assert restricted_utility(1, s, state, ctx) > 0.0


class TestAcceptableCoalitions:
    def test_zero_cross_grand_prefers_split(self):
        # with no cross interference, splitting only buys pre-log
        ctx = make_ctx(ZERO_CROSS_2)
        targets = acceptable_coalitions(1, grand(2), fresh_states(2, 2), ctx)
        assert targets == [frozenset()]

    def test_everything_in_history_gives_empty_set(self):
        ctx = make_ctx([[1.0, 0.3], [0.3, 1.0]])
        s = singletons(2)
        states = fresh_states(2, 3)
        states[1].history = {frozenset({1, 2}), frozenset({1})}
        assert acceptable_coalitions(1, s, states, ctx) == []

    def test_positive_target_beats_zero_current(self):
        # an infeasible grand coalition gives zero; any feasible split wins
        ctx = random_instance(0, k=8)
        targets = acceptable_coalitions(1, grand(8), fresh_states(8, 8), ctx)
        assert frozenset() in targets

    def test_sorted_by_utility(self):
        ctx = random_instance(1, k=6)
        s = singletons(6)
        states = fresh_states(6, 6)
        targets = acceptable_coalitions(1, s, states, ctx)
        utilities = []
        for t in targets:
            hypothetical = s.move_user(1, t)
            utilities.append(throughput(ctx, hypothetical).per_user[0])
        assert utilities == sorted(utilities, reverse=True)


class TestIsAdmissible:
    def test_empty_target_needs_only_deviator_gain(self):
        ctx = make_ctx(ZERO_CROSS_2)
        assert is_admissible(1, None, grand(2), fresh_states(2, 2), ctx) is True

    def test_member_losing_feasibility_vetoes(self):
        # 5 users in a (2x4,1) coalition are feasible, 6 are not: a join
        # that breaks feasibility zeroes the members, who then refuse
        ctx = random_instance(2, k=6)
        s = CoalitionStructure.from_blocks([(1,), (2, 3, 4, 5, 6)])
        big = frozenset({2, 3, 4, 5, 6})
        assert ia_feasible(5, 4, 2, 1) and not ia_feasible(6, 4, 2, 1)
        if throughput(ctx, s).per_user[1] > 0:
            assert is_admissible(1, big, s, fresh_states(6, 6), ctx) is False

    def test_overhead_cost_vetoes_despite_rate_gain(self):
        # joining removes the member's interference (rate up) but the
        # overhead growth outweighs it (throughput down): member refuses
        gamma = [
            [10.0, 5.0, 5.0],
            [0.01, 10.0, TINY],
            [0.01, TINY, 10.0],
        ]
        ctx = make_ctx(gamma, l_coh=300.0)
        s = CoalitionStructure.from_blocks([(1,), (2, 3)])
        target = frozenset({2, 3})
        joined = s.move_user(1, target)
        states = fresh_states(3, 3)

        # brute-force both sides of the definition
        deviator_gain = (
            throughput(ctx, joined).per_user[0] > throughput(ctx, s).per_user[0]
        )
        member_losses = [
            throughput(ctx, joined).per_user[l - 1] < throughput(ctx, s).per_user[l - 1]
            for l in (2, 3)
        ]
        assert deviator_gain and any(member_losses)
        assert is_admissible(1, target, s, states, ctx) is False

    def test_rejects_invalid_target(self):
        ctx = make_ctx(ZERO_CROSS_2)
        with pytest.raises(ValueError):
            is_admissible(1, {1, 2}, grand(2), fresh_states(2, 2), ctx)


class TestRunFormation:
    def test_single_user_returns_grand(self):
        ctx = make_ctx([[1.0]])
        final, trace = run_formation(ctx)
        assert final == grand(1)
        assert trace.num_deviations == 0

    def test_zero_cross_two_users_split(self):
        ctx = make_ctx(ZERO_CROSS_2)
        final, trace = run_formation(ctx)
        assert final == singletons(2)
        assert trace.num_deviations == 1

    def test_final_positive_coalitions_are_feasible(self):
        for seed in range(10):
            ctx = random_instance(seed, k=8)
            final, _ = run_formation(ctx)
            report = throughput(ctx, final)
            for block in final.blocks:
                if any(report.per_user[u - 1] > 0 for u in block):
                    assert ia_feasible(len(block), 4, 2, 1)

    def test_termination_bound_and_stability(self):
        for seed in range(25):
            ctx = random_instance(seed, k=8)
            final, trace = run_formation(ctx)
            bound = min(8 * 8, bell_number(8))
            assert trace.num_deviations <= bound
            assert is_individually_stable(final, trace.final_states, ctx)

    def test_accepted_deviations_strictly_improve(self):
        # strict improvement is lexicographic: throughput first, then the
        # overhead tie-break that resolves the zero-throughput plateau
        ctx = random_instance(3, k=8)
        _, trace = run_formation(ctx)
        assert trace.num_deviations > 0
        for record in trace.records:
            if record.accepted:
                assert (record.utility_after, -record.overhead_after) > (
                    record.utility_before,
                    -record.overhead_before,
                )

    def test_counters_match_trace(self):
        ctx = random_instance(4, k=8)
        _, trace = run_formation(ctx)
        attempts = trace.attempts_by_player()
        accepts: dict[int, int] = {}
        for r in trace.records:
            if r.accepted:
                accepts[r.player] = accepts.get(r.player, 0) + 1
        for player, state in trace.final_states.items():
            assert state.comm_count == attempts.get(player, 0)
            assert state.comm_count <= state.budget
            assert len(state.history) == accepts.get(player, 0)

    def test_scale_invariance(self):
        # scaling gains and noise by a power of two is exact in floats
        ctx = random_instance(5, k=8)
        scaled = RateContext(
            gamma=ctx.gamma * 1024.0,
            tx_power_w=ctx.tx_power_w,
            noise_power_w=ctx.noise_power_w * 1024.0,
            bs_antennas=ctx.bs_antennas,
            ms_antennas=ctx.ms_antennas,
            streams=ctx.streams,
            coherence_block_symbols=ctx.coherence_block_symbols,
        )
        final_a, trace_a = run_formation(ctx)
        final_b, trace_b = run_formation(scaled)
        assert final_a == final_b
        assert [(r.player, r.target, r.accepted) for r in trace_a.records] == [
            (r.player, r.target, r.accepted) for r in trace_b.records
        ]

    def test_budget_one_limits_deviations(self):
        ctx = random_instance(6, k=8)
        _, trace = run_formation(ctx, budgets=1)
        assert trace.num_deviations <= 8
        for state in trace.final_states.values():
            assert state.comm_count <= 1

    def test_custom_initial_structure(self):
        ctx = make_ctx(ZERO_CROSS_2)
        final, trace = run_formation(ctx, initial=singletons(2))
        assert final == singletons(2)
        assert trace.num_deviations == 0

    def test_shuffled_order_needs_rng(self):
        ctx = make_ctx(ZERO_CROSS_2)
        with pytest.raises(ValueError):
            run_formation(ctx, order="shuffled")
        final, _ = run_formation(ctx, order="shuffled", rng=np.random.default_rng(0))
        assert final == singletons(2)

    def test_trace_jsonl(self):
        ctx = random_instance(7, k=6)
        _, trace = run_formation(ctx)
        lines = trace.to_jsonl().strip().split("\n")
        assert len(lines) == trace.num_attempts + 1
        for line in lines[:-1]:
            record = json.loads(line)
            assert {"visit", "player", "source", "target", "accepted"} <= record.keys()
        footer = json.loads(lines[-1])
        assert footer["num_deviations"] == trace.num_deviations


def test_resolve_budgets_forms():
    assert resolve_budgets(None, 3) == {1: 3, 2: 3, 3: 3}
    assert resolve_budgets(5, 2) == {1: 5, 2: 5}
    assert resolve_budgets([1, 2, 3], 3) == {1: 1, 2: 2, 3: 3}
    assert resolve_budgets({1: 4, 2: 2}, 2) == {1: 4, 2: 2}
    with pytest.raises(ValueError):
        resolve_budgets([1, 2], 3)
