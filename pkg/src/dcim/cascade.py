"""Activation-probability models and the decreasing-cascade diffusion
simulator with partial edge-level feedback.

Under the count-based model each node v carries a non-increasing probability
sequence p_v(1) >= p_v(2) >= ...; the i-th activation attempt on v succeeds
with probability p_v(i) where i-1 is the number of prior failed attempts on v.
The edge model is the independent-cascade special case with a fixed
probability per edge.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Mapping, NamedTuple, Sequence

import numpy as np

from .graph import DirectedGraph

__all__ = [
    "COUNT_DC",
    "EDGE_IC",
    "ActivationModel",
    "ModelViolation",
    "InvalidModelError",
    "validate_model",
    "require_valid_model",
    "sample_count_dc_model",
    "homogeneous_model",
    "model_to_json",
    "model_from_json",
    "Observation",
    "DiffusionTrace",
    "trace_violations",
    "format_observations",
    "CoinTable",
    "simulate",
    "simulate_with_coins",
]

COUNT_DC = "count_dc"
EDGE_IC = "edge_ic"


@dataclass(frozen=True)
class ActivationModel:
    """Either a count-based decreasing-cascade model (per-node probability
    sequences indexed by attempt number) or a per-edge IC model."""

    kind: str
    node_probs: tuple[tuple[float, ...], ...] = ()
    edge_probs: Mapping[tuple[int, int], float] = field(default_factory=dict)

    @classmethod
    def count_dc(cls, node_probs: Iterable[Sequence[float]]) -> "ActivationModel":
        return cls(kind=COUNT_DC,
                   node_probs=tuple(tuple(float(p) for p in seq) for seq in node_probs))

    @classmethod
    def edge_ic(cls, edge_probs: Mapping[tuple[int, int], float]) -> "ActivationModel":
        return cls(kind=EDGE_IC,
                   edge_probs={(int(u), int(v)): float(p) for (u, v), p in edge_probs.items()})


@dataclass(frozen=True)
class ModelViolation:
    node: int
    index: int | None  # 1-based attempt index, None for structural problems
    message: str

    def __str__(self) -> str:
        where = f"node {self.node}" if self.index is None else f"(node {self.node}, i={self.index})"
        return f"{where}: {self.message}"


class InvalidModelError(ValueError):
    pass


def validate_model(g: DirectedGraph, model: ActivationModel) -> ModelViolation | None:
    """First violation of the model contract against g, or None when valid.

    count_dc: one sequence per node, length = in-degree, values in [0, 1],
    non-increasing. edge_ic: exactly one probability per graph edge, in [0, 1].
    """
    if model.kind == COUNT_DC:
        if len(model.node_probs) != g.num_nodes:
            return ModelViolation(-1, None,
                                  f"{len(model.node_probs)} sequences for {g.num_nodes} nodes")
        for v in range(g.num_nodes):
            seq = model.node_probs[v]
            d = g.in_degree(v)
            if len(seq) != d:
                return ModelViolation(v, None, f"sequence length {len(seq)} != in-degree {d}")
            for i, p in enumerate(seq, start=1):
                if not 0.0 <= p <= 1.0:
                    return ModelViolation(v, i, f"probability {p} outside [0, 1]")
                if i > 1 and p > seq[i - 2]:
                    return ModelViolation(v, i, f"{p} > {seq[i - 2]} breaks the decreasing property")
        return None
    if model.kind == EDGE_IC:
        expected = set(g.edges)
        got = set(model.edge_probs)
        missing = sorted(expected - got)
        if missing:
            return ModelViolation(missing[0][1], None, f"edge {missing[0]} has no probability")
        extra = sorted(got - expected)
        if extra:
            return ModelViolation(extra[0][1], None, f"probability for non-edge {extra[0]}")
        for (u, v) in sorted(got):
            p = model.edge_probs[(u, v)]
            if not 0.0 <= p <= 1.0:
                return ModelViolation(v, None, f"edge ({u},{v}) probability {p} outside [0, 1]")
        return None
    return ModelViolation(-1, None, f"unknown model kind {model.kind!r}")


def require_valid_model(g: DirectedGraph, model: ActivationModel) -> None:
    bad = validate_model(g, model)
    if bad is not None:
        raise InvalidModelError(str(bad))


def sample_count_dc_model(g: DirectedGraph, lo: float, hi: float,
                          rng: np.random.Generator) -> ActivationModel:
    """Per node, |N(v)| i.i.d. Uniform[lo, hi] draws sorted in decreasing order."""
    if not 0.0 <= lo <= hi <= 1.0:
        raise ValueError("need 0 <= lo <= hi <= 1")
    seqs = []
    for v in range(g.num_nodes):
        d = g.in_degree(v)
        vals = np.sort(rng.uniform(lo, hi, size=d))[::-1] if d else np.empty(0)
        seqs.append(vals.tolist())
    return ActivationModel.count_dc(seqs)


def homogeneous_model(g: DirectedGraph, per_node, default: float | None = None) -> ActivationModel:
    """Constant-per-node count_dc model: p_v(i) = c_v for every attempt index.

    per_node is a scalar (broadcast to all nodes) or a node->probability
    mapping; unmapped nodes fall back to default.
    """
    seqs = []
    for v in range(g.num_nodes):
        if isinstance(per_node, Mapping):
            c = per_node.get(v, default)
            if c is None:
                raise ValueError(f"no probability for node {v} and no default")
        else:
            c = float(per_node)
        if not 0.0 <= c <= 1.0:
            raise ValueError(f"probability {c} for node {v} outside [0, 1]")
        seqs.append([c] * g.in_degree(v))
    return ActivationModel.count_dc(seqs)


def model_to_json(model: ActivationModel) -> str:
    if model.kind == COUNT_DC:
        return json.dumps({str(v): list(seq) for v, seq in enumerate(model.node_probs)},
                          indent=0)
    return json.dumps([{"u": u, "v": v, "p": p}
                       for (u, v), p in sorted(model.edge_probs.items())], indent=0)


def model_from_json(text: str) -> ActivationModel:
    """JSON object => count_dc (node id string -> decreasing array);
    JSON array => edge_ic ({"u","v","p"} records)."""
    data = json.loads(text)
    if isinstance(data, dict):
        seqs_by_id = {int(k): [float(p) for p in seq] for k, seq in data.items()}
        n = max(seqs_by_id) + 1 if seqs_by_id else 0
        return ActivationModel.count_dc([seqs_by_id.get(v, []) for v in range(n)])
    if isinstance(data, list):
        return ActivationModel.edge_ic({(rec["u"], rec["v"]): rec["p"] for rec in data})
    raise ValueError("model JSON must be an object (count_dc) or array (edge_ic)")


class Observation(NamedTuple):
    """One executed activation attempt: node u made the i-th attempt on the
    still-inactive node v with binary outcome y."""

    u: int
    v: int
    i: int
    y: int


@dataclass
class DiffusionTrace:
    """One cascade realization with its partial edge-level feedback."""

    seed_set: tuple[int, ...]
    steps: list[list[int]]  # newly activated nodes per step; steps[0] = seeds
    observations: list[Observation]
    final_active: set[int]
    reward: int  # |final_active|


def format_observations(trace: DiffusionTrace) -> str:
    """Debug dump: one "u v i Y" line per observation."""
    return "\n".join(f"{o.u} {o.v} {o.i} {o.y}" for o in trace.observations) + "\n"


@dataclass
class CoinTable:
    """Pre-drawn Bernoulli outcomes X_v(i): flips[v][i-1] decides the i-th
    attempt on v. Determinizes one count-based cascade realization."""

    flips: list[list[bool]]

    @classmethod
    def sample(cls, g: DirectedGraph, model: ActivationModel,
               rng: np.random.Generator) -> "CoinTable":
        if model.kind != COUNT_DC:
            raise ValueError("coin tables are defined for count_dc models only")
        flips = []
        for v in range(g.num_nodes):
            seq = model.node_probs[v]
            flips.append([bool(rng.random() < p) for p in seq])
        return cls(flips)

    def check_complete(self, g: DirectedGraph) -> None:
        if len(self.flips) != g.num_nodes:
            raise ValueError("coin table covers wrong node count")
        for v in range(g.num_nodes):
            if len(self.flips[v]) != g.in_degree(v):
                raise ValueError(f"coin table incomplete at node {v}")

    def first_success_index(self, v: int) -> int:
        """1-based index of the first successful flip for v; in_degree+1 when
        every flip fails (a threshold no attempt count can reach)."""
        row = self.flips[v]
        for i, x in enumerate(row, start=1):
            if x:
                return i
        return len(row) + 1


def _check_seeds(g: DirectedGraph, seeds: Iterable[int]) -> list[int]:
    seed_list = sorted(set(seeds))
    if not seed_list:
        raise ValueError("seed set must be non-empty")
    if seed_list[0] < 0 or seed_list[-1] >= g.num_nodes:
        raise ValueError("seed id out of range")
    return seed_list


def simulate(g: DirectedGraph, model: ActivationModel, seeds: Iterable[int],
             rng: np.random.Generator) -> DiffusionTrace:
    """Run one cascade from the seed set and collect its feedback.

    Per step, every node newly activated at the previous step attacks each of
    its inactive out-neighbors; attempts on a target run in ascending attacker
    id. The i-th attempt on v succeeds with probability p_v(i) (count model;
    i-1 = prior failures on v across all steps) or p_{u,v} (edge model). A
    success activates v for the next step and ends attempts on v for good.
    Every executed attempt is recorded.
    """
    seed_list = _check_seeds(g, seeds)
    n = g.num_nodes
    active = bytearray(n)
    fails = [0] * n
    for s in seed_list:
        active[s] = 1
    # at most one attempt per edge, so m uniforms always suffice
    urow = rng.random(len(g.edges)).tolist() if g.edges else []
    pos = 0
    count_mode = model.kind == COUNT_DC
    node_probs = model.node_probs
    edge_probs = model.edge_probs
    out = g.out_neighbors
    observations: list[Observation] = []
    steps: list[list[int]] = [list(seed_list)]
    newly = seed_list
    while newly:
        targets: dict[int, list[int]] = {}
        for u in newly:  # ascending: newly is kept sorted
            for v in out[u]:
                if not active[v]:
                    targets.setdefault(v, []).append(u)
        next_newly: list[int] = []
        for v in sorted(targets):
            row = node_probs[v] if count_mode else None
            for u in targets[v]:
                if active[v]:
                    break
                i = fails[v] + 1
                p = row[i - 1] if count_mode else edge_probs[(u, v)]
                y = 1 if urow[pos] < p else 0
                pos += 1
                observations.append(Observation(u, v, i, y))
                if y:
                    active[v] = 1
                    next_newly.append(v)
                else:
                    fails[v] = i
        if next_newly:
            steps.append(next_newly)
        newly = next_newly
    final = {v for v in range(n) if active[v]}
    return DiffusionTrace(seed_set=tuple(seed_list), steps=steps,
                          observations=observations, final_active=final,
                          reward=len(final))


def simulate_with_coins(
    g: DirectedGraph,
    seeds: Iterable[int],
    coins: CoinTable,
    descending: bool = False,
) -> tuple[set[int], list[Observation]]:
    """Deterministic count-based cascade: the i-th attempt on v succeeds iff
    coins.flips[v][i-1]. With descending=True the intra-step attempt order is
    reversed (outcomes must not change; probabilities depend only on counts).
    """
    coins.check_complete(g)
    seed_list = _check_seeds(g, seeds)
    n = g.num_nodes
    active = bytearray(n)
    fails = [0] * n
    for s in seed_list:
        active[s] = 1
    flips = coins.flips
    out = g.out_neighbors
    observations: list[Observation] = []
    newly = seed_list
    while newly:
        targets: dict[int, list[int]] = {}
        for u in newly:
            for v in out[u]:
                if not active[v]:
                    targets.setdefault(v, []).append(u)
        next_newly: list[int] = []
        order = sorted(targets, reverse=descending)
        for v in order:
            attackers = targets[v][::-1] if descending else targets[v]
            row = flips[v]
            for u in attackers:
                if active[v]:
                    break
                i = fails[v] + 1
                y = 1 if row[i - 1] else 0
                observations.append(Observation(u, v, i, y))
                if y:
                    active[v] = 1
                    next_newly.append(v)
                else:
                    fails[v] = i
        next_newly.sort()
        newly = next_newly
    return {v for v in range(n) if active[v]}, observations


def trace_violations(g: DirectedGraph, trace: DiffusionTrace) -> list[str]:
    """All DiffusionTrace invariant breaches (empty list = valid trace).

    Checks step structure, per-node contiguous attempt prefixes, outcome
    rules, and that every attempt has an already-active attacker and a
    still-inactive target at attempt time.
    """
    bad: list[str] = []
    if not trace.steps or trace.steps[0] != sorted(trace.seed_set):
        bad.append("steps[0] != seed set")
    seen: set[int] = set()
    step_of: dict[int, int] = {}
    for k, step in enumerate(trace.steps):
        for v in step:
            if v in seen:
                bad.append(f"node {v} appears in two steps")
            seen.add(v)
            step_of[v] = k
    if seen != trace.final_active:
        bad.append("union of steps != final_active")
    if trace.reward != len(trace.final_active):
        bad.append("reward != |final_active|")
    per_node: dict[int, list[Observation]] = {}
    for o in trace.observations:
        per_node.setdefault(o.v, []).append(o)
    for v, obs in per_node.items():
        if v in trace.seed_set:
            bad.append(f"seed {v} received an attempt")
        indices = [o.i for o in obs]
        if indices != list(range(1, len(indices) + 1)):
            bad.append(f"node {v}: attempt indices {indices} not a contiguous prefix")
        for o in obs[:-1]:
            if o.y != 0:
                bad.append(f"node {v}: non-final attempt {o.i} succeeded")
        if obs and obs[-1].y == 1 and v not in trace.final_active:
            bad.append(f"node {v}: successful attempt but not in final_active")
        for o in obs:
            tu = step_of.get(o.u)
            tv = step_of.get(o.v)
            if tu is None:
                bad.append(f"attempt by inactive node {o.u}")
                continue
            if tv is not None and tv <= tu:
                bad.append(f"attempt on node {o.v} at/after its activation")
            if o.y == 1 and tv != tu + 1:
                bad.append(f"node {o.v} activated at step {tv}, expected {tu + 1}")
    return bad
