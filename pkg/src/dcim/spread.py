"""Influence-spread estimation: Monte-Carlo sampling, an exact enumeration
oracle for small instances, exact observation probabilities, and the
triggering-probability-modulated (TPM) smoothness inequality as an
executable check."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, NamedTuple

import numpy as np

from .cascade import (
    COUNT_DC,
    ActivationModel,
    require_valid_model,
    simulate,
)
from .graph import DirectedGraph, reachable_set

__all__ = [
    "DEFAULT_ENUM_CAP",
    "EnumerationCapExceeded",
    "SpreadEstimate",
    "ObservationProbTable",
    "estimate_spread_mc",
    "exact_spread",
    "exact_observation_probs",
    "TpmResult",
    "tpm_check",
]

# default ceiling on total probability slots (sum of in-degrees) for exact
# enumeration; 2^20 coin assignments is the intended workload bound
DEFAULT_ENUM_CAP = 20

TPM_TOLERANCE = 1e-9


class EnumerationCapExceeded(RuntimeError):
    """Instance too large for exact enumeration; fall back to Monte Carlo."""


@dataclass(frozen=True)
class SpreadEstimate:
    mean: float
    stderr: float
    num_samples: int


@dataclass(frozen=True)
class ObservationProbTable:
    """P[v][i-1] = probability that node v's i-th activation attempt is
    executed (and hence observed) when seeding from S."""

    probs: tuple[tuple[float, ...], ...]

    def prob(self, v: int, i: int) -> float:
        return self.probs[v][i - 1]


def estimate_spread_mc(
    g: DirectedGraph,
    model: ActivationModel,
    seeds: Iterable[int],
    num_samples: int,
    rng: np.random.Generator,
) -> SpreadEstimate:
    """Sample mean of |final active set| over independent cascade runs."""
    if num_samples < 1:
        raise ValueError("num_samples must be >= 1")
    seed_list = sorted(set(seeds))
    rewards = np.empty(num_samples, dtype=np.float64)
    for k in range(num_samples):
        rewards[k] = simulate(g, model, seed_list, rng).reward
    mean = float(rewards.mean())
    stderr = float(rewards.std(ddof=1) / np.sqrt(num_samples)) if num_samples > 1 else 0.0
    return SpreadEstimate(mean=mean, stderr=stderr, num_samples=num_samples)


def _check_enum_instance(g: DirectedGraph, model: ActivationModel, cap: int) -> None:
    if model.kind != COUNT_DC:
        raise ValueError("exact enumeration is defined for count_dc models only")
    slots = g.total_in_degree()
    if slots > cap:
        raise EnumerationCapExceeded(f"{slots} probability slots exceed cap {cap}")
    require_valid_model(g, model)


def _enumerate_outcomes(g: DirectedGraph, model: ActivationModel,
                        seeds: Iterable[int], cap: int) -> tuple[float, list[list[float]]]:
    """Probability-weighted traversal of every distinguishable coin outcome.

    Branches only on coins the cascade actually consumes, so it equals the
    full sum over all 2^slots coin tables while visiting far fewer paths.
    Returns (expected final size, per-slot observation probabilities).
    """
    _check_enum_instance(g, model, cap)
    seed_list = sorted(set(seeds))
    if not seed_list or seed_list[0] < 0 or seed_list[-1] >= g.num_nodes:
        raise ValueError("invalid seed set")
    n = g.num_nodes
    probs = model.node_probs
    out = g.out_neighbors
    obs = [[0.0] * g.in_degree(v) for v in range(n)]
    expected = 0.0

    def build_agenda(newly: list[int], active: bytearray) -> list[tuple[int, int]]:
        targets: dict[int, int] = {}
        for u in newly:
            for v in out[u]:
                if not active[v]:
                    targets[v] = targets.get(v, 0) + 1
        return sorted(targets.items())

    def walk(active: bytearray, fails: list[int], agenda: list[tuple[int, int]],
             item: int, within: int, pending: list[int], weight: float) -> None:
        nonlocal expected
        while item < len(agenda):
            v, k = agenda[item]
            if active[v] or within >= k:
                item += 1
                within = 0
                continue
            i = fails[v] + 1
            obs[v][i - 1] += weight
            p = probs[v][i - 1]
            if p <= 0.0:
                fails[v] = i
                within += 1
                continue
            if p >= 1.0:
                active[v] = 1
                pending.append(v)
                item += 1
                within = 0
                continue
            success_active = bytearray(active)
            success_active[v] = 1
            walk(success_active, list(fails), agenda, item + 1, 0,
                 pending + [v], weight * p)
            weight *= 1.0 - p
            fails[v] = i
            within += 1
        if not pending:
            expected += weight * active.count(1)
            return
        pending.sort()
        walk(active, fails, build_agenda(pending, active), 0, 0, [], weight)

    active0 = bytearray(n)
    for s in seed_list:
        active0[s] = 1
    walk(active0, [0] * n, build_agenda(seed_list, active0), 0, 0, [], 1.0)
    return expected, obs


def exact_spread(g: DirectedGraph, model: ActivationModel, seeds: Iterable[int],
                 cap: int = DEFAULT_ENUM_CAP) -> float:
    """Exact influence spread: the coin-table-weighted sum of final set sizes
    over all Bernoulli assignments. Raises EnumerationCapExceeded when the
    instance has more probability slots than cap."""
    expected, _ = _enumerate_outcomes(g, model, seeds, cap)
    return expected


def exact_observation_probs(g: DirectedGraph, model: ActivationModel,
                            seeds: Iterable[int],
                            cap: int = DEFAULT_ENUM_CAP) -> ObservationProbTable:
    """Exact probability that each (v, i) attempt is executed when seeding
    from S; zero rows for seeds and never-attacked nodes."""
    _, obs = _enumerate_outcomes(g, model, seeds, cap)
    return ObservationProbTable(tuple(tuple(row) for row in obs))


class TpmResult(NamedTuple):
    lhs: float
    rhs: float
    holds: bool


def tpm_check(
    g: DirectedGraph,
    model_lo: ActivationModel,
    model_hi: ActivationModel,
    seeds: Iterable[int],
    cap: int = DEFAULT_ENUM_CAP,
) -> TpmResult:
    """Evaluate the TPM smoothness bound for two count_dc vectors p <= p_bar.

    lhs is the exact spread gap r(S, p_bar) - r(S, p); rhs sums, over targets
    v outside S and nodes u on any S->v path, the observation-probability-
    weighted per-slot gaps P^S_{u,i} * (p_bar_u(i) - p_u(i)). Observation
    probabilities are computed under p.
    """
    require_valid_model(g, model_lo)
    require_valid_model(g, model_hi)
    for v in range(g.num_nodes):
        lo_seq, hi_seq = model_lo.node_probs[v], model_hi.node_probs[v]
        for i, (a, b) in enumerate(zip(lo_seq, hi_seq), start=1):
            if a > b:
                raise ValueError(f"dominance violated at (node {v}, i={i}): {a} > {b}")
    seed_list = sorted(set(seeds))
    seed_set = set(seed_list)
    lhs = exact_spread(g, model_hi, seed_list, cap) - exact_spread(g, model_lo, seed_list, cap)
    obs = exact_observation_probs(g, model_lo, seed_list, cap)
    forward = reachable_set(g, seed_list)
    non_seed = set(range(g.num_nodes)) - seed_set
    rhs = 0.0
    for u in range(g.num_nodes):
        if u not in forward or g.in_degree(u) == 0:
            continue
        # u contributes once per target v in V\S with u on an S->v path,
        # i.e. once per non-seed node reachable from u
        multiplicity = len(reachable_set(g, [u]) & non_seed)
        if multiplicity == 0:
            continue
        slot_sum = 0.0
        lo_seq, hi_seq = model_lo.node_probs[u], model_hi.node_probs[u]
        for i in range(1, g.in_degree(u) + 1):
            slot_sum += obs.prob(u, i) * (hi_seq[i - 1] - lo_seq[i - 1])
        rhs += multiplicity * slot_sum
    return TpmResult(lhs=lhs, rhs=rhs, holds=lhs <= rhs + TPM_TOLERANCE)
