"""Bandit policies for online influence maximization: the capped-UCB
count-based policy (DC-UCB) and the baseline arms used for comparison.

Every policy follows one contract: select(t) returns a seed set of size <= K
for round t, update(trace, reward) ingests the round's feedback. Realized
rewards are normalized by the node count n wherever a policy stores
reward-valued means, so a single sqrt(3 ln t / (2 T)) exploration radius
schedule fits all of them.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from math import comb, log, sqrt
from typing import Iterable

import numpy as np

from .cascade import ActivationModel, DiffusionTrace
from .graph import DirectedGraph
from .oracle import OracleConfig, greedy_oracle

__all__ = [
    "ucb_radius",
    "cap_decreasing",
    "DcUcbState",
    "UcbVectors",
    "compute_ucb_vectors",
    "apply_trace_to_state",
    "Policy",
    "DcUcbPolicy",
    "FlatUcbPolicy",
    "CmabNodePolicy",
    "CucbIcPolicy",
    "POLICY_NAMES",
    "make_policy",
    "ArmEnumerationError",
]

DEFAULT_FLAT_ARM_LIMIT = 1_000_000


def ucb_radius(t: int, count: float) -> float:
    """Chernoff-Hoeffding exploration radius sqrt(3 ln t / (2 T))."""
    return sqrt(3.0 * log(t) / (2.0 * count))


def cap_decreasing(values: Iterable[float]) -> list[float]:
    """Running minimum: caps a raw UCB sequence so it is non-increasing.

    Preserves any elementwise dominance over a decreasing true sequence: if
    p(i) <= raw(i) for a non-increasing p, then p(i) <= capped(i) too.
    """
    capped: list[float] = []
    floor = 1.0
    for x in values:
        floor = min(floor, x)
        capped.append(floor)
    return capped


@dataclass
class DcUcbState:
    """Per-slot sufficient statistics: observation counts T_v(i) and
    empirical means p_hat_v(i), stored flat with per-node offsets."""

    offsets: list[int]  # slot offset per node; in-degree = offsets[v+1]-offsets[v]
    counts: np.ndarray  # (total_slots,) int64
    means: np.ndarray  # (total_slots,) float64

    @classmethod
    def init(cls, g: DirectedGraph) -> "DcUcbState":
        offsets = [0]
        for v in range(g.num_nodes):
            offsets.append(offsets[-1] + g.in_degree(v))
        total = offsets[-1]
        return cls(offsets=offsets,
                   counts=np.zeros(total, dtype=np.int64),
                   means=np.zeros(total, dtype=np.float64))

    def slot(self, v: int, i: int) -> int:
        d = self.offsets[v + 1] - self.offsets[v]
        if not 1 <= i <= d:
            raise IndexError(f"attempt index {i} out of range for node {v}")
        return self.offsets[v] + i - 1

    def count(self, v: int, i: int) -> int:
        return int(self.counts[self.slot(v, i)])

    def mean(self, v: int, i: int) -> float:
        return float(self.means[self.slot(v, i)])


@dataclass
class UcbVectors:
    """Raw UCBs and their decreasing-capped counterparts, per node."""

    raw: tuple[tuple[float, ...], ...]
    capped: tuple[tuple[float, ...], ...]


def compute_ucb_vectors(state: DcUcbState, t: int) -> UcbVectors:
    """Raw UCB: clamp_[0,1](p_hat + sqrt(3 ln t / (2 T))), forced to 1 for
    unobserved slots. The capped vector takes a running minimum down each
    node's sequence so the decreasing property holds."""
    if t < 1:
        raise ValueError("round index must be >= 1")
    counts = state.counts
    raw_flat = np.ones(len(counts), dtype=np.float64)
    seen = counts > 0
    if seen.any():
        radius = np.sqrt(3.0 * log(t) / (2.0 * counts[seen]))
        raw_flat[seen] = np.clip(state.means[seen] + radius, 0.0, 1.0)
    raw: list[tuple[float, ...]] = []
    capped: list[tuple[float, ...]] = []
    for v in range(len(state.offsets) - 1):
        seg = raw_flat[state.offsets[v]:state.offsets[v + 1]].tolist()
        raw.append(tuple(seg))
        capped.append(tuple(cap_decreasing(seg)))
    return UcbVectors(raw=tuple(raw), capped=tuple(capped))


def apply_trace_to_state(state: DcUcbState, trace: DiffusionTrace) -> None:
    """Running-mean update of every observed (v, i) slot; each slot may
    appear at most once per trace."""
    seen: set[tuple[int, int]] = set()
    for obs in trace.observations:
        key = (obs.v, obs.i)
        if key in seen:
            raise ValueError(f"duplicate observation for node {obs.v}, attempt {obs.i}")
        seen.add(key)
        s = state.slot(obs.v, obs.i)
        t_vi = state.counts[s]
        state.means[s] = (t_vi * state.means[s] + obs.y) / (t_vi + 1)
        state.counts[s] = t_vi + 1


class Policy:
    """select/update contract shared by all bandit policies."""

    name: str

    def select(self, t: int) -> tuple[int, ...]:
        raise NotImplementedError

    def update(self, trace: DiffusionTrace, reward: float) -> None:
        raise NotImplementedError


class DcUcbPolicy(Policy):
    """Capped-UCB policy for the count-based decreasing cascade: maintains a
    UCB per (node, attempt index), re-imposes the decreasing property with a
    running minimum, and feeds the capped vector to the greedy oracle."""

    name = "dc-ucb"

    def __init__(self, g: DirectedGraph, k: int, rng: np.random.Generator,
                 oracle_cfg: OracleConfig | None = None):
        self.g = g
        self.k = k
        self.rng = rng
        self.oracle_cfg = oracle_cfg or OracleConfig(k=k)
        self.state = DcUcbState.init(g)

    def select(self, t: int) -> tuple[int, ...]:
        vectors = compute_ucb_vectors(self.state, t)
        model = ActivationModel.count_dc(vectors.capped)
        return greedy_oracle(self.g, model, self.oracle_cfg, self.rng)

    def update(self, trace: DiffusionTrace, reward: float) -> None:
        apply_trace_to_state(self.state, trace)


class ArmEnumerationError(RuntimeError):
    """Seed-set arm count exceeds the configured limit."""


class FlatUcbPolicy(Policy):
    """Classical UCB over whole seed sets: every non-empty set of size <= K
    is one arm. Only feasible on small graphs; refuses otherwise."""

    name = "flat-ucb"

    def __init__(self, g: DirectedGraph, k: int, rng: np.random.Generator,
                 arm_limit: int = DEFAULT_FLAT_ARM_LIMIT):
        n = g.num_nodes
        total = sum(comb(n, size) for size in range(1, min(k, n) + 1))
        if total > arm_limit:
            raise ArmEnumerationError(
                f"{total} seed-set arms exceed limit {arm_limit}")
        self.g = g
        self.k = k
        self.arms: list[tuple[int, ...]] = []
        for size in range(1, min(k, n) + 1):
            self.arms.extend(itertools.combinations(range(n), size))
        self.arm_index = {arm: i for i, arm in enumerate(self.arms)}
        self.counts = np.zeros(total, dtype=np.int64)
        self.means = np.zeros(total, dtype=np.float64)
        self._next_unplayed = 0

    def select(self, t: int) -> tuple[int, ...]:
        while (self._next_unplayed < len(self.arms)
               and self.counts[self._next_unplayed] > 0):
            self._next_unplayed += 1
        if self._next_unplayed < len(self.arms):
            return self.arms[self._next_unplayed]
        index = self.means / self.g.num_nodes + np.sqrt(
            3.0 * log(t) / (2.0 * self.counts))
        best = index.max()
        tied = np.flatnonzero(index >= best)
        return min(self.arms[i] for i in tied)

    def update(self, trace: DiffusionTrace, reward: float) -> None:
        i = self.arm_index[tuple(sorted(trace.seed_set))]
        c = self.counts[i]
        self.means[i] = (c * self.means[i] + reward) / (c + 1)
        self.counts[i] = c + 1


class CmabNodePolicy(Policy):
    """Node-level bandit baseline: each node is a base arm, a seed set is the
    super arm, selection takes the top-K node indices. mode="average" credits
    every selected node with reward/K; mode="random" credits one uniformly
    chosen selected node with the full reward and the others with zero."""

    def __init__(self, g: DirectedGraph, k: int, rng: np.random.Generator,
                 mode: str = "average"):
        if mode not in ("average", "random"):
            raise ValueError(f"unknown mode {mode!r}")
        self.g = g
        self.k = min(k, g.num_nodes)
        self.rng = rng
        self.mode = mode
        self.name = "cmab-avg" if mode == "average" else "cmab-rand"
        self.counts = np.zeros(g.num_nodes, dtype=np.int64)
        self.means = np.zeros(g.num_nodes, dtype=np.float64)

    def select(self, t: int) -> tuple[int, ...]:
        unobserved = np.flatnonzero(self.counts == 0)
        chosen = list(unobserved[:self.k])
        if len(chosen) < self.k:
            observed = np.flatnonzero(self.counts > 0)
            index = self.means[observed] / self.g.num_nodes + np.sqrt(
                3.0 * log(t) / (2.0 * self.counts[observed]))
            order = sorted(zip(-index, observed))  # ties resolve to smaller id
            chosen.extend(int(v) for _, v in order[:self.k - len(chosen)])
        return tuple(sorted(int(v) for v in chosen))

    def update(self, trace: DiffusionTrace, reward: float) -> None:
        played = sorted(trace.seed_set)
        if self.mode == "average":
            shares = {v: reward / len(played) for v in played}
        else:
            lucky = played[int(self.rng.integers(len(played)))]
            shares = {v: (reward if v == lucky else 0.0) for v in played}
        for v in played:
            c = self.counts[v]
            self.means[v] = (c * self.means[v] + shares[v]) / (c + 1)
            self.counts[v] = c + 1


class CucbIcPolicy(Policy):
    """Independent-cascade CUCB baseline: one UCB per edge, greedy oracle on
    the resulting edge model. Deliberately mis-specified under a count-based
    cascade; each observation (u, v, i, y) trains edge (u, v) with outcome y."""

    name = "cucb-ic"

    def __init__(self, g: DirectedGraph, k: int, rng: np.random.Generator,
                 oracle_cfg: OracleConfig | None = None):
        self.g = g
        self.k = k
        self.rng = rng
        self.oracle_cfg = oracle_cfg or OracleConfig(k=k)
        self.edge_index = {e: i for i, e in enumerate(g.edges)}
        self.counts = np.zeros(g.num_edges, dtype=np.int64)
        self.means = np.zeros(g.num_edges, dtype=np.float64)

    def edge_ucbs(self, t: int) -> dict[tuple[int, int], float]:
        ucbs = np.ones(self.g.num_edges, dtype=np.float64)
        seen = self.counts > 0
        if seen.any():
            radius = np.sqrt(3.0 * log(t) / (2.0 * self.counts[seen]))
            ucbs[seen] = np.clip(self.means[seen] + radius, 0.0, 1.0)
        return {e: float(ucbs[i]) for e, i in self.edge_index.items()}

    def select(self, t: int) -> tuple[int, ...]:
        model = ActivationModel.edge_ic(self.edge_ucbs(t))
        return greedy_oracle(self.g, model, self.oracle_cfg, self.rng)

    def update(self, trace: DiffusionTrace, reward: float) -> None:
        for obs in trace.observations:
            i = self.edge_index[(obs.u, obs.v)]
            c = self.counts[i]
            self.means[i] = (c * self.means[i] + obs.y) / (c + 1)
            self.counts[i] = c + 1


POLICY_NAMES = ("dc-ucb", "flat-ucb", "cmab-avg", "cmab-rand", "cucb-ic")


def make_policy(
    name: str,
    g: DirectedGraph,
    k: int,
    rng: np.random.Generator,
    oracle_cfg: OracleConfig | None = None,
    arm_limit: int = DEFAULT_FLAT_ARM_LIMIT,
) -> Policy:
    if name == "dc-ucb":
        return DcUcbPolicy(g, k, rng, oracle_cfg)
    if name == "flat-ucb":
        return FlatUcbPolicy(g, k, rng, arm_limit=arm_limit)
    if name == "cmab-avg":
        return CmabNodePolicy(g, k, rng, mode="average")
    if name == "cmab-rand":
        return CmabNodePolicy(g, k, rng, mode="random")
    if name == "cucb-ic":
        return CucbIcPolicy(g, k, rng, oracle_cfg)
    raise ValueError(f"unknown policy {name!r}; expected one of {POLICY_NAMES}")
