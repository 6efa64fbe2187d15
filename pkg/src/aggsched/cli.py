"""Command-line entry point: ``aggsched <subcommand> ...``.

Precedence for ``train`` and ``sweep``: built-in defaults, then ``--config``
(JSON), then explicit flags.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import harness
from .baseline import SearchRefused, baseline_schedule, brute_force_optimal
from .kernel import COMPILED
from .qlearn import TrainConfig, save_qtable, solve
from .schedule import load_schedule, save_schedule, validate_schedule
from .topology import (
    TopologyError, build_adjacency, generate_topology, load_topology, save_topology,
)

EXIT_INVALID = 2


def _add_topology_flags(p):
    p.add_argument("--nodes", type=int, help="number of sensors (sink excluded)")
    p.add_argument("--range", dest="range_R", type=float, help="communication range R")
    p.add_argument("--sink", choices=["center", "corner"])
    p.add_argument("--area", type=float, nargs=2, metavar=("W", "H"))


def _add_train_flags(p):
    p.add_argument("--alpha", type=float)
    p.add_argument("--gamma", type=float)
    p.add_argument("--epsilon", dest="epsilon_init", type=float)
    p.add_argument("--epsilon-decay", type=float)
    p.add_argument("--episodes", type=int)
    p.add_argument("--key-mode", choices=["canonical", "digest"])


def _train_overrides(args) -> dict:
    names = ["alpha", "gamma", "epsilon_init", "epsilon_decay", "episodes", "key_mode"]
    return {n: getattr(args, n) for n in names if getattr(args, n, None) is not None}


def _topology_from_args(args):
    if getattr(args, "topology", None):
        return load_topology(args.topology)
    return generate_topology(
        args.nodes if args.nodes is not None else 50,
        tuple(args.area) if args.area else (100.0, 100.0),
        args.range_R if args.range_R is not None else 20.0,
        args.sink or "center",
        args.seed if args.seed is not None else 0,
    )


def _report_validity(schedule, adj) -> bool:
    report = validate_schedule(schedule, adj)
    if not report.valid:
        print(report, file=sys.stderr)
    return report.valid


def cmd_gen(args):
    topo = _topology_from_args(args)
    save_topology(topo, args.out)
    print(f"wrote {args.out}: {topo.n_sensors} sensors, R={topo.range_R}")
    return 0


def cmd_train(args):
    cfg = {}
    if args.config:
        cfg = json.loads(Path(args.config).read_text())
    cfg.update(_train_overrides(args))
    if args.seed is not None:
        cfg["seed"] = args.seed
    config = TrainConfig(**cfg)
    topo = _topology_from_args(args)
    adj = build_adjacency(topo)
    result = solve(topo, adj, config)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    save_schedule(result.schedule, out / "schedule.json")
    save_qtable(result.outcome.best_qtable, out / "qtable.json")
    harness.write_trace_csv(result.outcome.delays, result.outcome.epsilons, out / "trace.csv")
    print(f"delay={result.delay} best_episode={result.outcome.best_delay} "
          f"greedy_rollout={result.greedy_delay}")
    return 0 if _report_validity(result.schedule, adj) else EXIT_INVALID


def cmd_baseline(args):
    topo = _topology_from_args(args)
    adj = build_adjacency(topo)
    schedule = baseline_schedule(adj)
    save_schedule(schedule, args.out)
    print(f"delay={len(schedule.slots)}")
    return 0 if _report_validity(schedule, adj) else EXIT_INVALID


def cmd_exact(args):
    topo = _topology_from_args(args)
    adj = build_adjacency(topo)
    try:
        res = brute_force_optimal(adj, node_limit=args.limit, budget=args.budget)
    except SearchRefused as exc:
        print(exc, file=sys.stderr)
        return 1
    if res.schedule is None:
        print(f"search budget exhausted after {res.expanded} expansions", file=sys.stderr)
        return 1
    if args.out:
        save_schedule(res.schedule, args.out)
    status = " (budget exhausted: upper bound only)" if res.exhausted else ""
    print(f"optimal_delay={res.delay}{status}")
    return 0 if _report_validity(res.schedule, adj) else EXIT_INVALID


def cmd_sweep(args):
    doc = {}
    if args.config:
        doc = json.loads(Path(args.config).read_text())
    train = dict(doc.get("train", {}))
    train.update(_train_overrides(args))
    doc["train"] = train
    if args.nodes_list:
        doc["node_counts"] = args.nodes_list
    if args.sink_list:
        doc["sink_positions"] = args.sink_list
    for flag, name in [("replicates", "replicates"), ("seed", "base_seed"),
                       ("range_R", "range_R"), ("out", "out_dir")]:
        if getattr(args, flag) is not None:
            doc[name] = getattr(args, flag)
    if args.area:
        doc["area"] = args.area
    config = harness.ExperimentConfig.from_dict(doc)
    try:
        table = harness.run_experiment(config, workers=args.workers)
    except harness.InvalidScheduleError as exc:
        print(exc, file=sys.stderr)
        return EXIT_INVALID
    harness.write_results(table, config.out_dir)
    print(harness.format_summary(table.summary))
    return 0


def cmd_compare(args):
    rows = harness.read_results_csv(args.results)
    summary = harness.compare_results(rows)
    print(harness.format_summary(summary))
    if args.out:
        Path(args.out).write_text(harness.summary_csv(summary))
    return 0


def cmd_export_dot(args):
    topo = load_topology(args.topology)
    schedule = load_schedule(args.schedule)
    try:
        text = harness.export_schedule_dot(topo, schedule)
    except ValueError as exc:
        print(exc, file=sys.stderr)
        return EXIT_INVALID
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="aggsched", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a random connected topology")
    _add_topology_flags(p)
    p.add_argument("--seed", type=int)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen)

    for name, func, help_ in [
        ("train", cmd_train, "train Q-learning and write schedule, Q-table and trace"),
        ("baseline", cmd_baseline, "BFS-tree greedy baseline schedule"),
        ("exact", cmd_exact, "exact minimum delay on a tiny topology"),
    ]:
        p = sub.add_parser(name, help=help_)
        p.add_argument("--topology", help="topology file (otherwise generate from flags)")
        _add_topology_flags(p)
        p.add_argument("--seed", type=int)
        p.set_defaults(func=func)
        if name == "train":
            _add_train_flags(p)
            p.add_argument("--config", help="JSON file of training parameters")
            p.add_argument("--out", required=True, help="output directory")
        elif name == "baseline":
            p.add_argument("--out", required=True, help="schedule file")
        else:
            p.add_argument("--limit", type=int, default=8, help="max sensors")
            p.add_argument("--budget", type=int, default=1_000_000, help="max search expansions")
            p.add_argument("--out", help="schedule file")

    p = sub.add_parser("sweep", help="run an experiment sweep")
    p.add_argument("--config", help="JSON experiment config")
    p.add_argument("--nodes", dest="nodes_list", type=int, nargs="+")
    p.add_argument("--sink", dest="sink_list", nargs="+", choices=["center", "corner"])
    p.add_argument("--replicates", type=int)
    p.add_argument("--seed", type=int, help="base seed")
    p.add_argument("--range", dest="range_R", type=float)
    p.add_argument("--area", type=float, nargs=2, metavar=("W", "H"))
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", help="output directory")
    _add_train_flags(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("compare", help="summarize a results.csv")
    p.add_argument("results")
    p.add_argument("--out", help="write summary CSV here")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("export-dot", help="Graphviz export of a schedule")
    p.add_argument("--topology", required=True)
    p.add_argument("--schedule", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_export_dot)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    logging.getLogger(__name__).debug("compiled kernel: %s", COMPILED)
    try:
        return args.func(args)
    except TopologyError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
