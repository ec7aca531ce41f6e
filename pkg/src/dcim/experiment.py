"""Configuration-driven experiment runner: builds a graph and a ground-truth
activation model, computes the offline optimum reference, plays a bandit
policy for T rounds per run, and writes per-run and aggregate CSV series.

Everything is derived from (config, master_seed): graph generation, model
sampling, policy streams, and the per-(run, round) simulation streams, so
reruns are byte-identical.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .cascade import (
    ActivationModel,
    homogeneous_model,
    model_from_json,
    require_valid_model,
    sample_count_dc_model,
    simulate,
)
from .graph import DirectedGraph, extract_dense_subgraph, generate_erdos_renyi, load_edge_list
from .oracle import CombinationCapExceeded, OracleConfig, exact_best_seed_set, greedy_oracle
from .policies import make_policy
from .spread import EnumerationCapExceeded, estimate_spread_mc

__all__ = [
    "DEFAULT_ALPHA",
    "ExperimentConfig",
    "RoundRecord",
    "RunResult",
    "ExperimentResult",
    "run_experiment",
    "aggregate_runs",
    "compute_regret_series",
    "CSV_COLUMNS",
    "OUTPUT_DIR_ENV",
]

DEFAULT_ALPHA = 1.0 - 1.0 / math.e
OUTPUT_DIR_ENV = "DCIM_OUTPUT_DIR"
CSV_COLUMNS = ["run", "t", "reward", "cum_reward", "avg_reward", "regret_inc", "cum_regret"]

# stream tags for seed derivation
_TAG_MODEL, _TAG_OPT, _TAG_EXTRACT, _TAG_POLICY, _TAG_SIM = 1, 2, 3, 4, 5


def derive_rng(master_seed: int, *key: int) -> np.random.Generator:
    """Independent generator for a (master seed, tag...) key."""
    return np.random.default_rng(np.random.SeedSequence([int(master_seed), *map(int, key)]))


@dataclass
class ExperimentConfig:
    """Full description of one experiment; see README for the file format."""

    graph: dict
    model: dict
    policy: str
    k: int
    horizon: int
    runs: int
    master_seed: int
    oracle_samples: int = 200
    lazy_oracle: bool = False
    opt_mode: str = "mc"  # "exact" | "mc"
    opt_samples: int = 10_000
    alpha: float = DEFAULT_ALPHA
    beta: float = 1.0
    output_dir: str | None = None
    policy_params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.horizon < 1:
            raise ValueError("horizon must be >= 1")
        if self.runs < 1:
            raise ValueError("runs must be >= 1")
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.opt_mode not in ("exact", "mc"):
            raise ValueError(f"opt_mode must be 'exact' or 'mc', got {self.opt_mode!r}")

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)

    @classmethod
    def from_file(cls, path: str | Path) -> "ExperimentConfig":
        path = Path(path)
        text = path.read_text()
        if path.suffix.lower() == ".toml":
            try:
                import tomllib  # py311+
            except ImportError:
                import tomli as tomllib
            data = tomllib.loads(text)
        else:
            data = json.loads(text)
        return cls.from_dict(data)


@dataclass
class RoundRecord:
    run: int
    t: int
    reward: int
    cum_reward: int
    avg_reward: float
    regret_inc: float
    cum_regret: float


@dataclass
class RunResult:
    run: int
    records: list[RoundRecord]

    @property
    def final_avg_reward(self) -> float:
        return self.records[-1].avg_reward


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    graph: DirectedGraph
    true_model: ActivationModel
    opt_value: float
    opt_mode: str
    opt_seed_set: tuple[int, ...]
    runs: list[RunResult]
    output_dir: Path | None

    @property
    def final_avg_rewards(self) -> list[float]:
        return [r.final_avg_reward for r in self.runs]


def build_graph(cfg: ExperimentConfig) -> DirectedGraph:
    spec = cfg.graph
    kind = spec.get("kind")
    if kind == "erdos_renyi":
        rng = np.random.default_rng(int(spec["seed"]))
        return generate_erdos_renyi(int(spec["n"]), float(spec["p"]), rng)
    if kind == "file":
        return load_edge_list(Path(spec["path"]).read_text())
    if kind == "extract":
        base = load_edge_list(Path(spec["path"]).read_text())
        rng = derive_rng(cfg.master_seed, _TAG_EXTRACT)
        sub, _, _ = extract_dense_subgraph(base, int(spec["degree_lo"]),
                                           int(spec["degree_hi"]),
                                           int(spec["pivots"]), rng)
        return sub
    raise ValueError(f"unknown graph kind {kind!r}")


def build_model(cfg: ExperimentConfig, g: DirectedGraph) -> ActivationModel:
    spec = cfg.model
    kind = spec.get("kind")
    if kind == "sampled":
        rng = derive_rng(cfg.master_seed, _TAG_MODEL)
        model = sample_count_dc_model(g, float(spec["lo"]), float(spec["hi"]), rng)
    elif kind == "homogeneous":
        model = homogeneous_model(g, float(spec["p"]))
    elif kind == "file":
        model = model_from_json(Path(spec["path"]).read_text())
    else:
        raise ValueError(f"unknown model kind {kind!r}")
    require_valid_model(g, model)
    return model


def _compute_opt(cfg: ExperimentConfig, g: DirectedGraph,
                 model: ActivationModel) -> tuple[float, str, tuple[int, ...]]:
    if cfg.opt_mode == "exact":
        best_set, value = exact_best_seed_set(g, model, cfg.k)
        return value, "exact", best_set
    rng = derive_rng(cfg.master_seed, _TAG_OPT)
    oracle_cfg = OracleConfig(k=cfg.k, mc_samples_per_eval=cfg.opt_samples, lazy=False)
    best_set = greedy_oracle(g, model, oracle_cfg, rng)
    estimate = estimate_spread_mc(g, model, best_set, cfg.opt_samples, rng)
    return estimate.mean, f"mc:{cfg.opt_samples}", best_set


def compute_regret_series(rewards: Sequence[float], opt_value: float,
                          alpha: float = DEFAULT_ALPHA, beta: float = 1.0) -> np.ndarray:
    """Cumulative sum of the clamped per-round gaps max(0, alpha*beta*opt - r_t)."""
    if opt_value < 0:
        raise ValueError("opt_value must be >= 0")
    gaps = np.maximum(0.0, alpha * beta * opt_value - np.asarray(rewards, dtype=np.float64))
    return np.cumsum(gaps)


def aggregate_runs(series: Sequence[Sequence[RoundRecord]]) -> list[tuple[int, float, float]]:
    """Per-round mean and standard error of the averaged reward across runs."""
    if not series:
        raise ValueError("no runs to aggregate")
    lengths = {len(s) for s in series}
    if len(lengths) != 1:
        raise ValueError(f"run series lengths differ: {sorted(lengths)}")
    values = np.array([[rec.avg_reward for rec in s] for s in series], dtype=np.float64)
    means = values.mean(axis=0)
    if values.shape[0] > 1:
        stderrs = values.std(axis=0, ddof=1) / math.sqrt(values.shape[0])
    else:
        stderrs = np.zeros_like(means)
    return [(t + 1, float(means[t]), float(stderrs[t])) for t in range(values.shape[1])]


def _records_to_csv(records: list[RoundRecord]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for r in records:
        writer.writerow([r.run, r.t, r.reward, r.cum_reward,
                         repr(r.avg_reward), repr(r.regret_inc), repr(r.cum_regret)])
    return buf.getvalue()


def run_experiment(cfg: ExperimentConfig,
                   output_dir: str | Path | None = None) -> ExperimentResult:
    """Execute the configured experiment and (optionally) write its outputs.

    Output directory resolution: explicit argument, then the DCIM_OUTPUT_DIR
    environment variable, then cfg.output_dir; None anywhere means no files.
    Emits run_<r>.csv per run, aggregate.csv, and summary.json.
    """
    g = build_graph(cfg)
    model = build_model(cfg, g)
    try:
        opt_value, opt_mode, opt_set = _compute_opt(cfg, g, model)
    except (EnumerationCapExceeded, CombinationCapExceeded) as err:
        raise RuntimeError(
            f"opt_mode='exact' infeasible for this instance ({err}); use 'mc'") from err
    ab = cfg.alpha * cfg.beta

    out = output_dir if output_dir is not None else os.environ.get(OUTPUT_DIR_ENV, cfg.output_dir)
    out_path = Path(out) if out is not None else None
    if out_path is not None:
        out_path.mkdir(parents=True, exist_ok=True)

    oracle_cfg = OracleConfig(k=cfg.k, mc_samples_per_eval=cfg.oracle_samples,
                              lazy=cfg.lazy_oracle)
    run_results: list[RunResult] = []
    for r in range(cfg.runs):
        policy = make_policy(cfg.policy, g, cfg.k, derive_rng(cfg.master_seed, _TAG_POLICY, r),
                             oracle_cfg, **cfg.policy_params)
        records: list[RoundRecord] = []
        cum_reward = 0
        cum_regret = 0.0
        for t in range(1, cfg.horizon + 1):
            seeds = policy.select(t)
            trace = simulate(g, model, seeds, derive_rng(cfg.master_seed, _TAG_SIM, r, t))
            cum_reward += trace.reward
            regret_inc = max(0.0, ab * opt_value - trace.reward)
            cum_regret += regret_inc
            records.append(RoundRecord(run=r, t=t, reward=trace.reward,
                                       cum_reward=cum_reward,
                                       avg_reward=cum_reward / t,
                                       regret_inc=regret_inc,
                                       cum_regret=cum_regret))
            policy.update(trace, trace.reward)
        run_results.append(RunResult(run=r, records=records))
        if out_path is not None:
            (out_path / f"run_{r}.csv").write_text(_records_to_csv(records))

    if out_path is not None:
        agg = aggregate_runs([rr.records for rr in run_results])
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["t", "mean_avg_reward", "stderr"])
        for t, mean, stderr in agg:
            writer.writerow([t, repr(mean), repr(stderr)])
        (out_path / "aggregate.csv").write_text(buf.getvalue())
        summary = {
            "policy": cfg.policy,
            "k": cfg.k,
            "horizon": cfg.horizon,
            "runs": cfg.runs,
            "master_seed": cfg.master_seed,
            "graph": cfg.graph,
            "model": cfg.model,
            "n": g.num_nodes,
            "m": g.num_edges,
            "alpha": cfg.alpha,
            "beta": cfg.beta,
            "opt_value": opt_value,
            "opt_mode": opt_mode,
            "opt_seed_set": list(opt_set),
            "final_avg_rewards": [rr.final_avg_reward for rr in run_results],
        }
        (out_path / "summary.json").write_text(json.dumps(summary, indent=2) + "\n")

    return ExperimentResult(config=cfg, graph=g, true_model=model,
                            opt_value=opt_value, opt_mode=opt_mode,
                            opt_seed_set=opt_set, runs=run_results,
                            output_dir=out_path)
