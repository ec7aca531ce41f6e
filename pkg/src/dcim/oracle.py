"""Offline seed-selection oracles: lazy (CELF) and plain greedy driven by
Monte-Carlo or exact spread evaluation, plus exhaustive search for small
instances.

Monte-Carlo greedy freezes one battery of coin outcomes per round and scores
every candidate against it (common random numbers), so candidate comparisons
within a round share their noise. The count-based battery is evaluated
through an equivalent threshold fixed point: a node activates once its number
of active in-neighbors reaches the index of its first successful coin.
"""

from __future__ import annotations

import heapq
import itertools
from dataclasses import dataclass
from math import comb
from typing import Iterable

import numpy as np

from .cascade import COUNT_DC, EDGE_IC, ActivationModel, require_valid_model
from .graph import DirectedGraph
from .spread import DEFAULT_ENUM_CAP, exact_spread

__all__ = [
    "OracleConfig",
    "CombinationCapExceeded",
    "greedy_oracle",
    "exact_best_seed_set",
]

DEFAULT_COMBINATION_CAP = 100_000


class CombinationCapExceeded(RuntimeError):
    """Too many candidate seed sets for exhaustive search."""


@dataclass
class OracleConfig:
    """Knobs for the greedy oracle: seed-set size, per-evaluation sample
    budget, lazy (CELF) vs full re-evaluation, and the evaluation backend
    ("mc" or "exact")."""

    k: int
    mc_samples_per_eval: int = 200
    lazy: bool = True
    seed: int | None = None
    evaluator: str = "mc"
    enum_cap: int = DEFAULT_ENUM_CAP

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.mc_samples_per_eval < 1:
            raise ValueError("mc_samples_per_eval must be >= 1")
        if self.evaluator not in ("mc", "exact"):
            raise ValueError(f"unknown evaluator {self.evaluator!r}")


class _ThresholdBattery:
    """Frozen coin outcomes for a count_dc model, stored as per-sample
    activation thresholds: sample s activates node v once v's count of
    active in-neighbors reaches thresholds[s, v].

    Activation indicators and thresholds live in float32 so the fixed-point
    matmul runs on BLAS; all counts are small integers, exact in float32.
    """

    def __init__(self, adj: np.ndarray, thresholds: np.ndarray):
        self.adj = np.asarray(adj, dtype=np.float32)  # adj[u, v] = 1 iff edge (u, v)
        self.thresholds = np.asarray(thresholds, dtype=np.float32)  # (samples, n)

    @classmethod
    def draw(cls, g: DirectedGraph, model: ActivationModel, samples: int,
             rng: np.random.Generator) -> "_ThresholdBattery":
        n = g.num_nodes
        flat = [p for seq in model.node_probs for p in seq]
        coins = rng.random((samples, len(flat))) < np.asarray(flat, dtype=np.float64)
        thresholds = np.empty((samples, n), dtype=np.float32)
        off = 0
        for v in range(n):
            d = g.in_degree(v)
            if d == 0:
                thresholds[:, v] = 1.0  # unreachable unless seeded
            else:
                seg = coins[:, off:off + d]
                any_hit = seg.any(axis=1)
                first = seg.argmax(axis=1) + 1
                thresholds[:, v] = np.where(any_hit, first, d + 1)
                off += d
        return cls(g.adjacency_matrix(), thresholds)

    def _fixed_point(self, active: np.ndarray) -> np.ndarray:
        # active: (..., samples, n) float32 0/1; thresholds broadcast over
        # leading dims; monotone growth, so equal popcounts mean convergence
        size = active.sum()
        while True:
            counts = active @ self.adj
            active = np.maximum(active, counts >= self.thresholds)
            new_size = active.sum()
            if new_size == size:
                return active
            size = new_size

    def base_activation(self, seeds: Iterable[int]) -> np.ndarray:
        samples, n = self.thresholds.shape
        active = np.zeros((samples, n), dtype=np.float32)
        seed_list = list(seeds)
        for s in seed_list:
            active[:, s] = 1.0
        return self._fixed_point(active) if seed_list else active

    def mean_size(self, base_active: np.ndarray) -> float:
        return float(base_active.sum(axis=1).mean())

    def candidate_mean_sizes(self, base_active: np.ndarray,
                             candidates: list[int]) -> np.ndarray:
        c = len(candidates)
        samples, n = base_active.shape
        active = np.broadcast_to(base_active, (c, samples, n)).copy()
        active[np.arange(c), :, candidates] = 1.0
        active = self._fixed_point(active)
        return active.sum(axis=2).mean(axis=1)


class _LiveEdgeBattery:
    """Frozen live/blocked outcome per edge per sample; a node activates when
    any live edge from an active node reaches it (independent-cascade
    determinization)."""

    def __init__(self, src: np.ndarray, dst_mat: np.ndarray, live: np.ndarray, n: int):
        self.src = src  # (m,) source node per edge
        self.dst_mat = dst_mat  # (m, n) float32 scatter matrix
        self.live = live  # (samples, m) float32 0/1
        self.n = n

    @classmethod
    def draw(cls, g: DirectedGraph, model: ActivationModel, samples: int,
             rng: np.random.Generator) -> "_LiveEdgeBattery":
        m = g.num_edges
        probs = np.array([model.edge_probs[e] for e in g.edges], dtype=np.float64)
        live = (rng.random((samples, m)) < probs).astype(np.float32)
        src = np.array([u for u, _ in g.edges], dtype=np.intp)
        dst_mat = np.zeros((m, g.num_nodes), dtype=np.float32)
        for e, (_, v) in enumerate(g.edges):
            dst_mat[e, v] = 1.0
        return cls(src, dst_mat, live, g.num_nodes)

    def _fixed_point(self, active: np.ndarray) -> np.ndarray:
        size = active.sum()
        while True:
            firing = active[..., self.src] * self.live
            counts = firing @ self.dst_mat
            active = np.maximum(active, counts > 0)
            new_size = active.sum()
            if new_size == size:
                return active
            size = new_size

    def base_activation(self, seeds: Iterable[int]) -> np.ndarray:
        samples = self.live.shape[0]
        active = np.zeros((samples, self.n), dtype=np.float32)
        seed_list = list(seeds)
        for s in seed_list:
            active[:, s] = 1.0
        return self._fixed_point(active) if seed_list else active

    def mean_size(self, base_active: np.ndarray) -> float:
        return float(base_active.sum(axis=1).mean())

    def candidate_mean_sizes(self, base_active: np.ndarray,
                             candidates: list[int]) -> np.ndarray:
        c = len(candidates)
        samples, n = base_active.shape
        active = np.broadcast_to(base_active, (c, samples, n)).copy()
        active[np.arange(c), :, candidates] = 1.0
        active = self._fixed_point(active)
        return active.sum(axis=2).mean(axis=1)


def _draw_battery(g, model, samples, rng):
    if model.kind == COUNT_DC:
        return _ThresholdBattery.draw(g, model, samples, rng)
    return _LiveEdgeBattery.draw(g, model, samples, rng)


def greedy_oracle(
    g: DirectedGraph,
    model: ActivationModel,
    cfg: OracleConfig,
    rng: np.random.Generator | None = None,
) -> tuple[int, ...]:
    """Greedy seed selection of min(k, n) nodes, largest estimated marginal
    gain first, ties to the smallest node id.

    With cfg.lazy, stale gains are kept in a priority queue and re-evaluated
    only when they reach the top (CELF); with identical per-round evaluation
    draws this matches full re-evaluation. evaluator="exact" scores candidate
    sets with the enumeration oracle instead of sampling (count_dc only).
    """
    require_valid_model(g, model)
    n = g.num_nodes
    k = min(cfg.k, n)
    if rng is None:
        rng = np.random.default_rng(cfg.seed)
    exact_mode = cfg.evaluator == "exact"

    selected: list[int] = []
    battery = None
    base_active = None
    base_value = 0.0

    def begin_round():
        nonlocal battery, base_active, base_value
        if exact_mode:
            base_value = (exact_spread(g, model, selected, cfg.enum_cap)
                          if selected else 0.0)
        else:
            battery = _draw_battery(g, model, cfg.mc_samples_per_eval, rng)
            base_active = battery.base_activation(selected)
            base_value = battery.mean_size(base_active)

    def value_with(c: int) -> float:
        if exact_mode:
            return exact_spread(g, model, selected + [c], cfg.enum_cap)
        return float(battery.candidate_mean_sizes(base_active, [c])[0])

    if cfg.lazy:
        begin_round()
        heap: list[tuple[float, int, int]] = []
        for c in range(n):
            heap.append((-(value_with(c) - base_value), c, 1))
        heapq.heapify(heap)
        for round_no in range(1, k + 1):
            if round_no > 1:
                begin_round()
            while True:
                neg_gain, c, evaluated_at = heapq.heappop(heap)
                if evaluated_at == round_no:
                    selected.append(c)
                    break
                gain = value_with(c) - base_value
                heapq.heappush(heap, (-gain, c, round_no))
    else:
        for _ in range(k):
            begin_round()
            candidates = [c for c in range(n) if c not in selected]
            if exact_mode:
                values = [value_with(c) for c in candidates]
            else:
                values = battery.candidate_mean_sizes(base_active, candidates)
            best_idx = int(np.argmax(values))  # first max = smallest id
            selected.append(candidates[best_idx])

    return tuple(sorted(selected))


def exact_best_seed_set(
    g: DirectedGraph,
    model: ActivationModel,
    k: int,
    enum_cap: int = DEFAULT_ENUM_CAP,
    combination_cap: int = DEFAULT_COMBINATION_CAP,
) -> tuple[tuple[int, ...], float]:
    """Exhaustive argmax of exact spread over non-empty seed sets of size <= k.

    Ties resolve to the lexicographically smallest sorted id tuple. Raises
    when the number of candidate sets exceeds combination_cap or the instance
    exceeds the enumeration cap.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    n = g.num_nodes
    k = min(k, n)
    total = sum(comb(n, size) for size in range(1, k + 1))
    if total > combination_cap:
        raise CombinationCapExceeded(
            f"{total} candidate sets exceed cap {combination_cap}")
    best_set: tuple[int, ...] | None = None
    best_value = -1.0
    for size in range(1, k + 1):
        for combo in itertools.combinations(range(n), size):
            value = exact_spread(g, model, combo, enum_cap)
            if value > best_value or (value == best_value and combo < best_set):
                best_value = value
                best_set = combo
    return best_set, best_value
