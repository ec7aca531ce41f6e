import math

import numpy as np
import pytest

from dcim.cascade import ActivationModel, CoinTable, homogeneous_model, simulate_with_coins
from dcim.graph import DirectedGraph
from dcim.oracle import (
    CombinationCapExceeded,
    OracleConfig,
    _LiveEdgeBattery,
    _ThresholdBattery,
    exact_best_seed_set,
    greedy_oracle,
)
from dcim.spread import exact_spread

from conftest import random_instance
from reference import naive_live_edge_reach


class TestGreedy:
    def test_certainty_path_prefers_source(self):
        g = DirectedGraph(3, [(0, 1), (1, 2)])
        m = ActivationModel.count_dc([[], [1.0], [1.0]])
        assert greedy_oracle(g, m, OracleConfig(k=1, evaluator="exact")) == (0,)

    def test_zero_model_tie_breaks_by_id(self):
        g = DirectedGraph(4, [(0, 1), (2, 3)])
        m = homogeneous_model(g, 0.0)
        assert greedy_oracle(g, m, OracleConfig(k=2, evaluator="exact")) == (0, 1)
        assert greedy_oracle(g, m, OracleConfig(k=2, seed=5)) == (0, 1)

    def test_k_equals_n(self, rng):
        g, model, _ = random_instance(rng)
        cfg = OracleConfig(k=g.num_nodes, evaluator="exact")
        assert greedy_oracle(g, model, cfg) == tuple(range(g.num_nodes))

    def test_output_size(self, rng):
        for _ in range(10):
            g, model, _ = random_instance(rng)
            k = int(rng.integers(1, g.num_nodes + 2))
            chosen = greedy_oracle(g, model, OracleConfig(k=k, seed=0))
            assert len(chosen) == min(k, g.num_nodes)
            assert len(set(chosen)) == len(chosen)

    def test_seeded_determinism(self, rng):
        g, model, _ = random_instance(rng)
        cfg = OracleConfig(k=2, seed=77)
        assert greedy_oracle(g, model, cfg) == greedy_oracle(g, model, cfg)

    def test_lazy_equals_plain_exact(self, rng):
        for _ in range(40):
            g, model, _ = random_instance(rng)
            k = int(rng.integers(1, 4))
            lazy = greedy_oracle(g, model, OracleConfig(k=k, evaluator="exact", lazy=True))
            plain = greedy_oracle(g, model, OracleConfig(k=k, evaluator="exact", lazy=False))
            assert lazy == plain

    def test_lazy_equals_plain_mc_same_draws(self, rng):
        for _ in range(10):
            g, model, _ = random_instance(rng, max_nodes=8, max_slots=25)
            seed = int(rng.integers(2**31))
            lazy = greedy_oracle(g, model, OracleConfig(k=2, lazy=True, seed=seed))
            plain = greedy_oracle(g, model, OracleConfig(k=2, lazy=False, seed=seed))
            assert lazy == plain

    def test_achievement_ratio_with_exact_evaluation(self, rng):
        bound = 1.0 - 1.0 / math.e
        for _ in range(25):
            g, model, _ = random_instance(rng, lo=0.1, hi=0.9)
            k = int(rng.integers(1, 3))
            chosen = greedy_oracle(g, model, OracleConfig(k=k, evaluator="exact"))
            _, opt = exact_best_seed_set(g, model, k)
            assert exact_spread(g, model, chosen) >= bound * opt - 1e-9

    def test_edge_ic_mc_mode(self, rng):
        g = DirectedGraph(3, [(0, 1), (1, 2)])
        m = ActivationModel.edge_ic({(0, 1): 0.9, (1, 2): 0.9})
        chosen = greedy_oracle(g, m, OracleConfig(k=1, mc_samples_per_eval=2000, seed=3))
        assert chosen == (0,)


class TestExactBestSeedSet:
    def test_path3(self, path3):
        g, model = path3
        assert exact_best_seed_set(g, model, 1) == ((0,), pytest.approx(1.75))

    def test_edgeless_lexicographic(self):
        g = DirectedGraph(4, [])
        best, value = exact_best_seed_set(g, homogeneous_model(g, 0.0), 1)
        assert best == (0,)
        assert value == 1.0

    def test_diamond(self, diamond):
        g, model = diamond
        best, value = exact_best_seed_set(g, model, 2)
        assert best == (0, 1)
        assert value == pytest.approx(2.625)

    def test_combination_cap(self):
        g = DirectedGraph(12, [])
        with pytest.raises(CombinationCapExceeded):
            exact_best_seed_set(g, homogeneous_model(g, 0.0), 6, combination_cap=100)

    def test_greedy_never_beats_opt(self, rng):
        for _ in range(15):
            g, model, _ = random_instance(rng)
            chosen = greedy_oracle(g, model, OracleConfig(k=2, evaluator="exact"))
            _, opt = exact_best_seed_set(g, model, 2)
            assert exact_spread(g, model, chosen) <= opt + 1e-9


class TestBatteries:
    def test_threshold_battery_matches_cascade(self, rng):
        for _ in range(60):
            g, model, seeds = random_instance(rng)
            coins = CoinTable.sample(g, model, rng)
            final, _ = simulate_with_coins(g, seeds, coins)
            thresholds = [[coins.first_success_index(v) for v in range(g.num_nodes)]]
            battery = _ThresholdBattery(g.adjacency_matrix(), np.array(thresholds))
            fixed = battery.base_activation(seeds)[0]
            assert {v for v in range(g.num_nodes) if fixed[v]} == final

    def test_live_edge_battery_matches_reference(self, rng):
        for _ in range(40):
            g, _, seeds = random_instance(rng)
            live = rng.random(g.num_edges) < 0.5
            battery = _LiveEdgeBattery.draw(
                g, ActivationModel.edge_ic({e: 1.0 if live[i] else 0.0
                                            for i, e in enumerate(g.edges)}),
                1, rng)
            fixed = battery.base_activation(seeds)[0]
            expected = naive_live_edge_reach(g.num_nodes, g.edges, live, seeds)
            assert {v for v in range(g.num_nodes) if fixed[v]} == expected

    def test_candidate_scores_certain_model(self, rng):
        g = DirectedGraph(3, [(0, 1), (1, 2)])
        battery = _ThresholdBattery.draw(g, homogeneous_model(g, 1.0), 10, rng)
        base = battery.base_activation([])
        sizes = battery.candidate_mean_sizes(base, [0, 1, 2])
        assert sizes.tolist() == [3.0, 2.0, 1.0]
