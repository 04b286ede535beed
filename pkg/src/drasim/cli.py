"""Command line front end: generate-graph, run, sweep, replay."""

from __future__ import annotations

import argparse
import sys

from . import metrics
from .experiments import ExperimentConfig, run_heatmap, run_scenario
from .graph import generate_er, generate_pa, generate_sw
from .simulator import Trajectory


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="drasim",
        description="Simulate competing two-state diffusion on networks under "
                    "dynamic resource allocation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate-graph", help="write a random graph as a canonical edge list")
    g.add_argument("--kind", choices=["er", "pa", "sw"], required=True)
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--avg-degree", type=float, help="ER mean degree")
    g.add_argument("--m", type=int, help="PA edges per new node")
    g.add_argument("--k", type=int, help="SW ring neighbors (even)")
    g.add_argument("--p-rewire", type=float, default=0.1, help="SW rewiring probability")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True, help="output edge-list path")

    r = sub.add_parser("run", help="run a scenario config (curves for each strategy)")
    r.add_argument("--config", required=True)
    r.add_argument("--out", help="override output directory")
    r.add_argument("--workers", type=int, help="override worker count")
    r.add_argument("--seed", type=int, help="override master seed")
    r.add_argument("--strategy", help="restrict to a single strategy")

    s = sub.add_parser("sweep", help="run a (s_inf, a_inf) heatmap sweep vs one competitor")
    s.add_argument("--config", required=True)
    s.add_argument("--strategy", required=True, help="competitor strategy for the AUC ratio")
    s.add_argument("--out", help="override output directory")
    s.add_argument("--workers", type=int, help="override worker count")
    s.add_argument("--seed", type=int, help="override master seed")

    p = sub.add_parser("replay", help="recompute metrics from a stored trajectory log")
    p.add_argument("trajectory", help="path to a saved event log")
    return parser


def _load_config(args) -> ExperimentConfig:
    cfg = ExperimentConfig.from_file(args.config)
    if args.out:
        cfg.output_dir = args.out
    if args.workers is not None:
        cfg.workers = args.workers
    if args.seed is not None:
        cfg.seed = args.seed
    return cfg


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)

    if args.command == "generate-graph":
        if args.kind == "er":
            if args.avg_degree is None:
                raise SystemExit("--avg-degree is required for --kind er")
            g = generate_er(args.n, args.avg_degree, args.seed)
        elif args.kind == "pa":
            if args.m is None:
                raise SystemExit("--m is required for --kind pa")
            g = generate_pa(args.n, args.m, args.seed)
        else:
            if args.k is None:
                raise SystemExit("--k is required for --kind sw")
            g = generate_sw(args.n, args.k, args.p_rewire, args.seed)
        g.save_edge_list(args.out)
        print(f"wrote {g.n} nodes / {g.edge_count} edges to {args.out}")
        return 0

    if args.command == "run":
        cfg = _load_config(args)
        if args.strategy:
            cfg.strategies = [args.strategy]
        summaries = run_scenario(cfg)
        for name, s in summaries.items():
            eet = "censored" if s.mean_eet_uncensored is None else f"{s.mean_eet_uncensored:.3f}"
            print(f"{name:>6}: mean AUC {s.mean_auc:.3f}  mean FIS {s.mean_fis:.2f}  "
                  f"mean EET {eet}  ({s.censored_count}/{s.run_count} censored)")
        print(f"outputs in {cfg.output_dir}")
        return 0

    if args.command == "sweep":
        cfg = _load_config(args)
        rows = run_heatmap(cfg, args.strategy)
        worst = max(rows, key=lambda c: c["ratio"])
        best = min(rows, key=lambda c: c["ratio"])
        print(f"{len(rows)} cells; ratio range [{best['ratio']:.3f}, {worst['ratio']:.3f}]")
        print(f"outputs in {cfg.output_dir}")
        return 0

    if args.command == "replay":
        traj = Trajectory.load(args.trajectory)
        m = metrics.run_metrics(traj)
        eet = "censored" if m.eet is None else repr(m.eet)
        print(f"events    {traj.times.size}")
        print(f"auc       {m.auc!r}")
        print(f"fis       {m.fis}")
        print(f"eet       {eet}")
        return 0

    return 2


if __name__ == "__main__":
    sys.exit(main())
