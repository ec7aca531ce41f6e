import numpy as np
import pytest

from dcim.cascade import (
    ActivationModel,
    CoinTable,
    InvalidModelError,
    format_observations,
    homogeneous_model,
    model_from_json,
    model_to_json,
    require_valid_model,
    sample_count_dc_model,
    simulate,
    simulate_with_coins,
    trace_violations,
    validate_model,
)
from dcim.graph import DirectedGraph, generate_erdos_renyi, reachable_set

from conftest import random_instance
from reference import naive_cascade


class TestValidateModel:
    def test_valid(self):
        g = DirectedGraph(3, [(0, 2), (1, 2)])
        m = ActivationModel.count_dc([[], [], [0.5, 0.25]])
        assert validate_model(g, m) is None

    def test_ordering_breach(self):
        g = DirectedGraph(3, [(0, 2), (1, 2)])
        m = ActivationModel.count_dc([[], [], [0.3, 0.4]])
        bad = validate_model(g, m)
        assert bad is not None and bad.node == 2 and bad.index == 2
        assert "0.4" in bad.message and "0.3" in bad.message

    def test_length_mismatch(self):
        g = DirectedGraph(3, [(0, 2), (1, 2)])
        m = ActivationModel.count_dc([[], [], [0.5]])
        bad = validate_model(g, m)
        assert bad is not None and bad.node == 2 and bad.index is None

    def test_out_of_range_probability(self):
        g = DirectedGraph(2, [(0, 1)])
        bad = validate_model(g, ActivationModel.count_dc([[], [1.5]]))
        assert bad is not None and bad.index == 1

    def test_edge_ic_complete(self):
        g = DirectedGraph(2, [(0, 1)])
        assert validate_model(g, ActivationModel.edge_ic({(0, 1): 0.3})) is None
        assert validate_model(g, ActivationModel.edge_ic({})) is not None
        assert validate_model(
            g, ActivationModel.edge_ic({(0, 1): 0.3, (1, 0): 0.1})) is not None

    def test_require_raises(self):
        g = DirectedGraph(2, [(0, 1)])
        with pytest.raises(InvalidModelError):
            require_valid_model(g, ActivationModel.count_dc([[], []]))


class TestModelConstruction:
    def test_sampled_degenerate_interval(self, rng):
        g = DirectedGraph(3, [(0, 2), (1, 2)])
        m = sample_count_dc_model(g, 0.4, 0.4, rng)
        assert m.node_probs[2] == (0.4, 0.4)

    def test_sampled_bounds_and_sorted(self, rng):
        g = generate_erdos_renyi(10, 0.4, rng)
        m = sample_count_dc_model(g, 0.1, 0.5, rng)
        assert validate_model(g, m) is None
        for seq in m.node_probs:
            assert all(0.1 <= p <= 0.5 for p in seq)
            assert list(seq) == sorted(seq, reverse=True)

    def test_sampled_isolated_node_empty(self, rng):
        g = DirectedGraph(2, [])
        assert sample_count_dc_model(g, 0.1, 0.5, rng).node_probs == ((), ())

    def test_homogeneous_scalar(self):
        g = DirectedGraph(3, [(0, 2), (1, 2)])
        m = homogeneous_model(g, 0.2)
        assert m.node_probs == ((), (), (0.2, 0.2))

    def test_homogeneous_zero(self):
        g = DirectedGraph(2, [(0, 1)])
        assert homogeneous_model(g, 0.0).node_probs == ((), (0.0,))

    def test_homogeneous_map_with_default(self):
        g = DirectedGraph(3, [(0, 1), (0, 2), (1, 2)])
        m = homogeneous_model(g, {2: 0.5}, default=0.2)
        assert m.node_probs[1] == (0.2,)
        assert m.node_probs[2] == (0.5, 0.5)

    def test_homogeneous_map_missing_no_default(self):
        g = DirectedGraph(2, [(0, 1)])
        with pytest.raises(ValueError, match="no probability"):
            homogeneous_model(g, {0: 0.5})

    def test_json_roundtrip_count_dc(self):
        m = ActivationModel.count_dc([[], [0.5], [0.5, 0.25]])
        again = model_from_json(model_to_json(m))
        assert again == m

    def test_json_roundtrip_edge_ic(self):
        m = ActivationModel.edge_ic({(0, 1): 0.3, (1, 2): 0.7})
        again = model_from_json(model_to_json(m))
        assert again.kind == "edge_ic"
        assert again.edge_probs == m.edge_probs


class TestSimulate:
    def test_certainty_cascade(self, rng):
        g = DirectedGraph(3, [(0, 1), (1, 2)])
        m = ActivationModel.count_dc([[], [1.0], [1.0]])
        trace = simulate(g, m, [0], rng)
        assert trace.final_active == {0, 1, 2}
        assert trace.observations == [(0, 1, 1, 1), (1, 2, 1, 1)]
        assert trace.steps == [[0], [1], [2]]
        assert trace.reward == 3

    def test_zero_model_logs_seed_adjacent_failures(self, rng):
        g = DirectedGraph(3, [(0, 2), (1, 2)])
        m = homogeneous_model(g, 0.0)
        trace = simulate(g, m, [0, 1], rng)
        assert trace.final_active == {0, 1}
        assert trace.observations == [(0, 2, 1, 0), (1, 2, 2, 0)]
        assert trace.steps == [[0, 1]]

    def test_diamond_second_attempt_only_after_failure(self):
        g = DirectedGraph(3, [(0, 2), (1, 2)])
        first_fails = CoinTable([[], [], [False, True]])
        final, obs = simulate_with_coins(g, [0, 1], first_fails)
        assert obs == [(0, 2, 1, 0), (1, 2, 2, 1)]
        assert final == {0, 1, 2}
        first_wins = CoinTable([[], [], [True, False]])
        final, obs = simulate_with_coins(g, [0, 1], first_wins)
        assert obs == [(0, 2, 1, 1)]  # node already active: no second attempt
        assert final == {0, 1, 2}

    def test_seeds_must_be_valid(self, rng):
        g = DirectedGraph(2, [(0, 1)])
        m = homogeneous_model(g, 0.5)
        with pytest.raises(ValueError):
            simulate(g, m, [], rng)
        with pytest.raises(ValueError):
            simulate(g, m, [9], rng)

    def test_trace_dump_format(self, rng):
        g = DirectedGraph(2, [(0, 1)])
        trace = simulate(g, homogeneous_model(g, 1.0), [0], rng)
        assert format_observations(trace) == "0 1 1 1\n"

    def test_fuzzed_traces_satisfy_invariants(self, rng):
        for _ in range(100):
            g, model, seeds = random_instance(rng, max_nodes=7, max_slots=20)
            trace = simulate(g, model, seeds, rng)
            assert trace_violations(g, trace) == []

    def test_attempt_counters_persist_across_steps(self):
        # 0 -> 2 at step 0 (fails), 1 arrives via 0 -> 1 and attacks 2 at
        # step 1 with attempt index 2
        g = DirectedGraph(3, [(0, 1), (0, 2), (1, 2)])
        coins = CoinTable([[], [True], [False, True]])
        final, obs = simulate_with_coins(g, [0], coins)
        assert (1, 2, 2, 1) in obs
        assert final == {0, 1, 2}


class TestSimulateWithCoins:
    def test_all_true_floods_reachable_set(self, rng):
        for _ in range(20):
            g, _, seeds = random_instance(rng)
            coins = CoinTable([[True] * g.in_degree(v) for v in range(g.num_nodes)])
            final, _ = simulate_with_coins(g, seeds, coins)
            assert final == reachable_set(g, seeds)

    def test_all_false_keeps_seeds(self, rng):
        for _ in range(20):
            g, _, seeds = random_instance(rng)
            coins = CoinTable([[False] * g.in_degree(v) for v in range(g.num_nodes)])
            final, _ = simulate_with_coins(g, seeds, coins)
            assert final == set(seeds)

    def test_single_branch(self):
        g = DirectedGraph(3, [(0, 1), (1, 2)])
        coins = CoinTable([[], [True], [False]])
        final, obs = simulate_with_coins(g, [0], coins)
        assert final == {0, 1}
        assert obs == [(0, 1, 1, 1), (1, 2, 1, 0)]

    def test_incomplete_coin_table(self):
        g = DirectedGraph(2, [(0, 1)])
        with pytest.raises(ValueError, match="incomplete"):
            simulate_with_coins(g, [0], CoinTable([[], []]))

    def test_matches_naive_reference(self, rng):
        for _ in range(50):
            g, model, seeds = random_instance(rng)
            coins = CoinTable.sample(g, model, rng)
            final, obs = simulate_with_coins(g, seeds, coins)
            ref_final, ref_obs = naive_cascade(g.num_nodes, g.edges, seeds, coins.flips)
            assert final == ref_final
            assert [tuple(o) for o in obs] == ref_obs

    def test_order_invariance(self, rng):
        for _ in range(50):
            g, model, seeds = random_instance(rng, max_nodes=7, max_slots=20)
            coins = CoinTable.sample(g, model, rng)
            fin_a, _ = simulate_with_coins(g, seeds, coins)
            fin_d, _ = simulate_with_coins(g, seeds, coins, descending=True)
            assert fin_a == fin_d

    def test_seed_monotonicity(self, rng):
        for _ in range(50):
            g, model, seeds = random_instance(rng)
            coins = CoinTable.sample(g, model, rng)
            extra = int(rng.integers(g.num_nodes))
            small, _ = simulate_with_coins(g, seeds, coins)
            big, _ = simulate_with_coins(g, sorted(set(seeds) | {extra}), coins)
            assert small <= big


class TestIcEquivalence:
    def test_homogeneous_count_dc_equals_edge_ic_pathwise(self, rng):
        # with identical uniforms the two parameterizations must produce the
        # exact same cascade, attempt for attempt
        for _ in range(20):
            g, _, seeds = random_instance(rng)
            p = float(rng.uniform(0.1, 0.9))
            count_model = homogeneous_model(g, p)
            edge_model = ActivationModel.edge_ic({e: p for e in g.edges})
            seed = int(rng.integers(2**31))
            t1 = simulate(g, count_model, seeds, np.random.default_rng(seed))
            t2 = simulate(g, edge_model, seeds, np.random.default_rng(seed))
            assert t1.final_active == t2.final_active
            assert t1.observations == t2.observations
