"""Command-line experiment runner.

Subcommands: run, sweep-epsilon, random-alpha, alpha-star, gen-losses,
gen-graph. Exit code 0 on success; on failure a machine-readable JSON
object {"error": ..., "message": ...} goes to stderr and the exit code
is nonzero.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .environment import gen_random_walk_losses
from .graphs import (
    DEFAULT_NODE_BUDGET,
    ObservationGraph,
    effective_independence_number,
    gen_grid_geometric,
    gen_random_uniform,
    identity_graph,
)
from .harness import (
    _DOMAIN_GRAPH,
    _DOMAIN_LOSSES,
    RunConfig,
    random_alpha_experiment,
    run_batch,
    seed_stream,
    sweep_epsilon,
    theoretical_bound,
    write_aggregate_csv,
    write_alpha_scatter_csv,
    write_meta,
    write_summary_csv,
    write_trace_csv,
)


def _parse_float_list(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x.strip() != ""]


def _parse_int_list(text: str) -> list[int]:
    return [int(x) for x in text.split(",") if x.strip() != ""]


def cmd_run(args) -> int:
    cfg = RunConfig.from_json(Path(args.config).read_text())
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    agg, traces = run_batch(cfg)
    write_trace_csv(traces[0], out / "trace.csv")
    rows = [{"config_key": cfg.policy["name"], "policy": cfg.policy["name"], "eps": cfg.policy.get("eps"), "aggregate": agg}]
    write_aggregate_csv(rows, out / "aggregate.csv")
    noise_bound = float(cfg.noise.get("bound", 1.0))
    bounds = [theoretical_bound(t, cfg.n_arms, noise_bound) for t in traces]
    write_meta(
        cfg,
        out / "meta.json",
        mean_regret=agg.mean_regret,
        std_regret=agg.std_regret,
        theoretical_bounds=bounds,
    )
    print(f"mean final regret over {agg.n_reps} reps: {agg.mean_regret:.3f} (std {agg.std_regret:.3f})")
    return 0


def cmd_sweep_epsilon(args) -> int:
    cfg = RunConfig.from_json(Path(args.config).read_text())
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rows = sweep_epsilon(cfg, _parse_float_list(args.epsilons))
    write_aggregate_csv(rows, out / "aggregate.csv")
    write_summary_csv(rows, out / "summary.csv")
    write_meta(cfg, out / "meta.json", epsilons=_parse_float_list(args.epsilons))
    for row in rows:
        agg = row["aggregate"]
        print(f"{row['config_key']}: mean {agg.mean_regret:.3f} std {agg.std_regret:.3f}")
    return 0


def cmd_random_alpha(args) -> int:
    rows = random_alpha_experiment(
        _parse_int_list(args.sizes),
        args.lo,
        args.hi,
        args.graphs_per_size,
        args.seed,
        node_budget=args.budget,
        label=args.label,
    )
    write_alpha_scatter_csv(rows, args.out)
    n_bad = sum(1 for r in rows if r["status"] != "ok")
    print(f"wrote {len(rows)} rows to {args.out} ({n_bad} budget-exceeded)")
    return 0


def cmd_alpha_star(args) -> int:
    g = ObservationGraph.from_json(Path(args.graph).read_text())
    res = effective_independence_number(g, node_budget=args.budget)
    print(
        json.dumps(
            {
                "alpha_star": res.alpha_star,
                "epsilon_star": res.epsilon_star,
                "curve": [[eps, alpha] for eps, alpha in res.curve],
            }
        )
    )
    return 0


def cmd_gen_losses(args) -> int:
    seq = gen_random_walk_losses(
        args.arms, args.walks, args.horizon, args.sigma,
        seed_stream(args.seed, _DOMAIN_LOSSES), interleaving=args.interleaving,
    )
    Path(args.out).write_text(seq.to_csv())
    print(f"wrote {seq.horizon}x{seq.n_arms} losses to {args.out}")
    return 0


def cmd_gen_graph(args) -> int:
    if args.kind == "grid":
        g = gen_grid_geometric(args.side, args.weight_rule)
    elif args.kind == "uniform":
        g = gen_random_uniform(args.n, args.lo, args.hi, seed_stream(args.seed, _DOMAIN_GRAPH))
    elif args.kind == "identity":
        g = identity_graph(args.n)
    else:
        raise ValueError(f"unknown graph kind {args.kind!r}")
    Path(args.out).write_text(g.to_json())
    print(f"wrote {g.n}-node graph to {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="noisybandits",
        description="Bandit experiments with noisy weighted side observations",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run one configuration")
    p.add_argument("--config", required=True)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep-epsilon", help="threshold sweep for IXt/IXb with WIX/Exp3 references")
    p.add_argument("--config", required=True)
    p.add_argument("--epsilons", required=True, help="comma-separated thresholds in [0,1]")
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_sweep_epsilon)

    p = sub.add_parser("random-alpha", help="alpha* scatter over random graphs")
    p.add_argument("--sizes", required=True, help="comma-separated node counts")
    p.add_argument("--lo", type=float, required=True)
    p.add_argument("--hi", type=float, required=True)
    p.add_argument("--graphs-per-size", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--budget", type=int, default=DEFAULT_NODE_BUDGET)
    p.add_argument("--label", default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_random_alpha)

    p = sub.add_parser("alpha-star", help="effective independence number of a graph file")
    p.add_argument("--graph", required=True)
    p.add_argument("--budget", type=int, default=DEFAULT_NODE_BUDGET)
    p.set_defaults(func=cmd_alpha_star)

    p = sub.add_parser("gen-losses", help="write an interleaved random-walk loss CSV")
    p.add_argument("--arms", type=int, required=True)
    p.add_argument("--walks", type=int, required=True)
    p.add_argument("--horizon", type=int, required=True)
    p.add_argument("--sigma", type=float, default=0.05)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--interleaving", choices=("per_arm", "rotation"), default="per_arm")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen_losses)

    p = sub.add_parser("gen-graph", help="write an observation-graph JSON")
    p.add_argument("--kind", choices=("grid", "uniform", "identity"), required=True)
    p.add_argument("--side", type=int, default=5)
    p.add_argument("--weight-rule", choices=("inv_one_plus_d2", "min_3_over_d2"), default="min_3_over_d2")
    p.add_argument("--n", type=int, default=25)
    p.add_argument("--lo", type=float, default=0.0)
    p.add_argument("--hi", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen_graph)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(
            json.dumps({"error": type(exc).__name__, "message": str(exc)}),
            file=sys.stderr,
        )
        return 1


if __name__ == "__main__":
    sys.exit(main())
