"""Command-line entry points: graph/probability generation, spread and
seed-set queries, TPM checking, experiment runs, and the invariant suite."""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

import numpy as np

from .cascade import model_from_json, model_to_json, homogeneous_model, sample_count_dc_model
from .experiment import ExperimentConfig, run_experiment
from .graph import (
    dump_edge_list,
    extract_dense_subgraph,
    generate_erdos_renyi,
    load_edge_list,
    write_relabel_map,
)
from .oracle import OracleConfig, greedy_oracle, exact_best_seed_set
from .spread import estimate_spread_mc, exact_spread, tpm_check
from .verify import run_checks


def _parse_seeds(text: str) -> list[int]:
    try:
        return sorted({int(tok) for tok in text.replace(",", " ").split()})
    except ValueError:
        raise SystemExit(f"error: bad seed list {text!r}; expected comma-separated ids")


def _load_graph(path: str):
    return load_edge_list(Path(path).read_text())


def _load_model(path: str):
    return model_from_json(Path(path).read_text())


def cmd_gen_graph(args) -> int:
    rng = np.random.default_rng(args.seed)
    g = generate_erdos_renyi(args.nodes, args.edge_prob, rng)
    Path(args.out).write_text(dump_edge_list(g))
    print(f"wrote {args.out}: n={g.num_nodes} m={g.num_edges}")
    return 0


def cmd_extract_subgraph(args) -> int:
    base = _load_graph(args.input)
    rng = np.random.default_rng(args.seed)
    sub, relabel, pivots = extract_dense_subgraph(
        base, args.degree_lo, args.degree_hi, args.pivots, rng)
    Path(args.out).write_text(dump_edge_list(sub))
    if args.map_out:
        Path(args.map_out).write_text(write_relabel_map(relabel))
    print(f"wrote {args.out}: n={sub.num_nodes} m={sub.num_edges} "
          f"(pivots: {' '.join(map(str, sorted(pivots)))})")
    return 0


def cmd_gen_probs(args) -> int:
    g = _load_graph(args.graph)
    if args.mode == "sampled":
        rng = np.random.default_rng(args.seed)
        model = sample_count_dc_model(g, args.lo, args.hi, rng)
    else:
        model = homogeneous_model(g, args.p)
    Path(args.out).write_text(model_to_json(model) + "\n")
    print(f"wrote {args.out}")
    return 0


def cmd_spread(args) -> int:
    g = _load_graph(args.graph)
    model = _load_model(args.model)
    seeds = _parse_seeds(args.seeds)
    if args.exact:
        value = exact_spread(g, model, seeds, cap=args.cap)
        print(f"exact {value!r}")
    else:
        rng = np.random.default_rng(args.seed)
        est = estimate_spread_mc(g, model, seeds, args.samples, rng)
        print(f"{est.mean!r} {est.stderr!r} {est.num_samples}")
    return 0


def cmd_tpm_check(args) -> int:
    g = _load_graph(args.graph)
    lo = _load_model(args.model_lo)
    hi = _load_model(args.model_hi)
    seeds = _parse_seeds(args.seeds)
    result = tpm_check(g, lo, hi, seeds, cap=args.cap)
    print(f"{result.lhs!r} {result.rhs!r} {str(result.holds).lower()}")
    return 0 if result.holds else 1


def cmd_oracle(args) -> int:
    g = _load_graph(args.graph)
    model = _load_model(args.model)
    if args.exact_search:
        seeds, value = exact_best_seed_set(g, model, args.k)
    else:
        cfg = OracleConfig(k=args.k, mc_samples_per_eval=args.samples,
                           lazy=not args.no_lazy, seed=args.seed,
                           evaluator="exact" if args.exact_eval else "mc")
        seeds = greedy_oracle(g, model, cfg)
        rng = np.random.default_rng(args.seed)
        value = (exact_spread(g, model, seeds) if args.exact_eval
                 else estimate_spread_mc(g, model, seeds, args.samples, rng).mean)
    print(f"{','.join(map(str, seeds))} {value!r}")
    return 0


def cmd_run(args) -> int:
    cfg = ExperimentConfig.from_file(args.config)
    result = run_experiment(cfg, output_dir=args.output_dir)
    finals = " ".join(f"{v:.4f}" for v in result.final_avg_rewards)
    print(f"policy={cfg.policy} opt={result.opt_value:.4f} ({result.opt_mode}) "
          f"final_avg_rewards=[{finals}]")
    if result.output_dir is not None:
        print(f"outputs in {result.output_dir}")
    return 0


def cmd_verify(args) -> int:
    results = run_checks(names=args.checks or None, full=args.full)
    failed = 0
    for res in results:
        status = "PASS" if res.passed else "FAIL"
        line = f"{status} {res.name}"
        if res.detail:
            line += f": {res.detail}"
        print(line)
        failed += 0 if res.passed else 1
    print(f"{len(results) - failed}/{len(results)} checks passed")
    return 0 if failed == 0 else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dcim",
        description="Decreasing-cascade influence maximization: simulator, "
                    "bandit policies, and experiment harness.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-graph", help="generate a seeded Erdos-Renyi graph")
    p.add_argument("--nodes", type=int, required=True)
    p.add_argument("--edge-prob", type=float, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_gen_graph)

    p = sub.add_parser("extract-subgraph", help="pivot-based dense subgraph extraction")
    p.add_argument("--input", required=True)
    p.add_argument("--degree-lo", type=int, default=20)
    p.add_argument("--degree-hi", type=int, default=120)
    p.add_argument("--pivots", type=int, default=10)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--map-out", help="write the old->new id map here")
    p.set_defaults(fn=cmd_extract_subgraph)

    p = sub.add_parser("gen-probs", help="generate an activation-probability file")
    p.add_argument("--graph", required=True)
    p.add_argument("--mode", choices=["sampled", "homogeneous"], default="sampled")
    p.add_argument("--lo", type=float, default=0.1)
    p.add_argument("--hi", type=float, default=0.5)
    p.add_argument("--p", type=float, default=0.2, help="homogeneous probability")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_gen_probs)

    p = sub.add_parser("spread", help="estimate or exactly compute influence spread")
    p.add_argument("--graph", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--seeds", required=True, help="comma-separated node ids")
    p.add_argument("--exact", action="store_true")
    p.add_argument("--cap", type=int, default=20, help="slot cap for exact enumeration")
    p.add_argument("--samples", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(fn=cmd_spread)

    p = sub.add_parser("tpm-check", help="evaluate the TPM smoothness bound")
    p.add_argument("--graph", required=True)
    p.add_argument("--model-lo", required=True)
    p.add_argument("--model-hi", required=True)
    p.add_argument("--seeds", required=True)
    p.add_argument("--cap", type=int, default=20)
    p.set_defaults(fn=cmd_tpm_check)

    p = sub.add_parser("oracle", help="greedy (or exhaustive) seed selection")
    p.add_argument("--graph", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--samples", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--no-lazy", action="store_true", help="full re-evaluation greedy")
    p.add_argument("--exact-eval", action="store_true",
                   help="score candidates with exact enumeration")
    p.add_argument("--exact-search", action="store_true",
                   help="exhaustive search instead of greedy")
    p.set_defaults(fn=cmd_oracle)

    p = sub.add_parser("run", help="run a configured experiment")
    p.add_argument("--config", required=True, help="TOML or JSON experiment config")
    p.add_argument("--output-dir", help="override the config/env output directory")
    p.set_defaults(fn=cmd_run)

    p = sub.add_parser("verify", help="run the invariant suite")
    p.add_argument("--full", action="store_true",
                   help="include the desk-scale learning experiment (minutes)")
    p.add_argument("--checks", nargs="*", help="run only these named checks")
    p.set_defaults(fn=cmd_verify)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    t0 = time.perf_counter()
    try:
        code = args.fn(args)
    except (ValueError, RuntimeError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    if args.command in ("run", "verify"):
        print(f"({time.perf_counter() - t0:.1f}s)")
    return code


if __name__ == "__main__":
    sys.exit(main())
