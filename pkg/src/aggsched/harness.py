"""Experiment sweeps, result tables, and schedule export.

Seed policy: replicate ``i`` of every (node count, sink position) cell uses
topology seed ``base_seed + i`` and training seed ``base_seed + i +
TRAIN_SEED_OFFSET``. Center and corner cells with the same replicate index
therefore share sensor positions and differ only in where the sink sits.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

from .baseline import baseline_schedule
from .qlearn import TrainConfig, solve
from .schedule import Schedule, ScheduleError, validate_schedule
from .topology import Topology, build_adjacency, generate_topology, sink_eccentricity

log = logging.getLogger(__name__)

TRAIN_SEED_OFFSET = 1_000_000

RESULT_FIELDS = [
    "nodes", "sink", "replicate", "topology_seed", "train_seed", "range_R", "episodes",
    "eccentricity", "baseline_delay", "qlearn_delay", "improvement_pct",
]
SUMMARY_FIELDS = [
    "nodes", "sink", "topologies", "baseline_mean", "qlearn_mean",
    "improvement_pct", "mean_row_improvement_pct",
]


class InvalidScheduleError(RuntimeError):
    """A produced schedule failed validation; the sweep is aborted."""


@dataclass(frozen=True)
class ExperimentConfig:
    node_counts: tuple[int, ...] = (50, 100, 150, 200, 250, 300)
    sink_positions: tuple[str, ...] = ("center", "corner")
    replicates: int = 30
    base_seed: int = 0
    range_R: float = 20.0
    area: tuple[float, float] = (100.0, 100.0)
    train: TrainConfig = TrainConfig()
    out_dir: str = "results"

    def __post_init__(self):
        if not self.node_counts or min(self.node_counts) < 1:
            raise ValueError("node_counts must be nonempty and >= 1")
        if self.replicates < 1:
            raise ValueError("replicates must be >= 1")
        for pos in self.sink_positions:
            if pos not in ("center", "corner"):
                raise ValueError(f"unknown sink position {pos!r}")

    @classmethod
    def from_dict(cls, doc: dict) -> "ExperimentConfig":
        doc = dict(doc)
        if "train" in doc:
            doc["train"] = TrainConfig(**doc["train"])
        for name in ("node_counts", "sink_positions", "area"):
            if name in doc:
                doc[name] = tuple(doc[name])
        unknown = set(doc) - set(cls.__dataclass_fields__)
        if unknown:
            raise ValueError(f"unknown experiment config field(s): {sorted(unknown)}")
        return cls(**doc)

    def to_dict(self) -> dict:
        doc = asdict(self)
        doc["node_counts"] = list(self.node_counts)
        doc["sink_positions"] = list(self.sink_positions)
        doc["area"] = list(self.area)
        return doc


def load_experiment_config(path) -> ExperimentConfig:
    return ExperimentConfig.from_dict(json.loads(Path(path).read_text()))


@dataclass(frozen=True)
class ResultRow:
    nodes: int
    sink: str
    replicate: int
    topology_seed: int
    train_seed: int
    range_R: float
    episodes: int
    eccentricity: int
    baseline_delay: int
    qlearn_delay: int
    seconds: float = field(default=0.0, compare=False)

    @property
    def improvement_pct(self) -> float:
        return improvement(self.baseline_delay, self.qlearn_delay)


@dataclass(frozen=True)
class SummaryRow:
    nodes: int
    sink: str
    topologies: int
    baseline_mean: float
    qlearn_mean: float
    improvement_pct: float
    mean_row_improvement_pct: float


@dataclass
class ResultTable:
    rows: list[ResultRow]
    summary: list[SummaryRow]


def improvement(baseline: float, qlearn: float) -> float:
    return 100.0 * (baseline - qlearn) / baseline


def _check(schedule: Schedule, adjacency, what: str, nodes: int, sink: str, seed: int):
    report = validate_schedule(schedule, adjacency)
    if not report.valid:
        raise InvalidScheduleError(
            f"{what} schedule invalid for nodes={nodes} sink={sink} topology_seed={seed}\n{report}"
        )


def run_replicate(config: ExperimentConfig, nodes: int, sink: str, replicate: int) -> ResultRow:
    start = time.perf_counter()
    topo_seed = config.base_seed + replicate
    train_seed = topo_seed + TRAIN_SEED_OFFSET
    topo = generate_topology(nodes, config.area, config.range_R, sink, topo_seed)
    adj = build_adjacency(topo)
    base = baseline_schedule(adj)
    _check(base, adj, "baseline", nodes, sink, topo_seed)
    result = solve(topo, adj, replace(config.train, seed=train_seed))
    _check(result.schedule, adj, "q-learning", nodes, sink, topo_seed)
    return ResultRow(
        nodes=nodes, sink=sink, replicate=replicate, topology_seed=topo_seed,
        train_seed=train_seed, range_R=config.range_R, episodes=config.train.episodes,
        eccentricity=sink_eccentricity(adj), baseline_delay=len(base.slots),
        qlearn_delay=result.delay, seconds=time.perf_counter() - start,
    )


def _run_cell(args):
    return run_replicate(*args)


def run_experiment(config: ExperimentConfig, workers: int = 1) -> ResultTable:
    jobs = [
        (config, n, sink, i)
        for n in config.node_counts
        for sink in config.sink_positions
        for i in range(config.replicates)
    ]
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            rows = list(pool.map(_run_cell, jobs))
    else:
        rows = []
        for job in jobs:
            rows.append(_run_cell(job))
            r = rows[-1]
            log.info("N=%d %s rep=%d baseline=%d qlearn=%d (%.1fs)",
                     r.nodes, r.sink, r.replicate, r.baseline_delay, r.qlearn_delay, r.seconds)
    rows.sort(key=lambda r: (r.nodes, r.sink, r.replicate))
    return ResultTable(rows, compare_results(rows))


def compare_results(rows: list[ResultRow]) -> list[SummaryRow]:
    """Per-(node count, sink position) means and the improvement of the means."""
    if not rows:
        raise ValueError("compare_results needs at least one row")
    groups: dict[tuple[int, str], list[ResultRow]] = {}
    for r in rows:
        groups.setdefault((r.nodes, r.sink), []).append(r)
    out = []
    for (nodes, sink), group in sorted(groups.items()):
        settings = {(r.range_R, r.episodes) for r in group}
        if len(settings) > 1:
            raise ValueError(
                f"group nodes={nodes} sink={sink} mixes range/episode settings {sorted(settings)}"
            )
        b = sum(r.baseline_delay for r in group) / len(group)
        q = sum(r.qlearn_delay for r in group) / len(group)
        row_mean = sum(r.improvement_pct for r in group) / len(group)
        out.append(SummaryRow(nodes, sink, len(group), b, q, improvement(b, q), row_mean))
    return out


def _fmt(value) -> str:
    return f"{value:.6f}" if isinstance(value, float) else str(value)


def results_csv(rows: list[ResultRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(RESULT_FIELDS)
    for r in rows:
        writer.writerow([_fmt(getattr(r, name)) for name in RESULT_FIELDS])
    return buf.getvalue()


def summary_csv(summary: list[SummaryRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SUMMARY_FIELDS)
    for s in summary:
        writer.writerow([_fmt(getattr(s, name)) for name in SUMMARY_FIELDS])
    return buf.getvalue()


def timings_csv(rows: list[ResultRow]) -> str:
    lines = ["nodes,sink,replicate,seconds"]
    lines += [f"{r.nodes},{r.sink},{r.replicate},{r.seconds:.3f}" for r in rows]
    return "\n".join(lines) + "\n"


def read_results_csv(path) -> list[ResultRow]:
    rows = []
    with open(path, newline="") as fh:
        for rec in csv.DictReader(fh):
            rows.append(ResultRow(
                nodes=int(rec["nodes"]), sink=rec["sink"], replicate=int(rec["replicate"]),
                topology_seed=int(rec["topology_seed"]), train_seed=int(rec["train_seed"]),
                range_R=float(rec["range_R"]), episodes=int(rec["episodes"]),
                eccentricity=int(rec["eccentricity"]),
                baseline_delay=int(rec["baseline_delay"]), qlearn_delay=int(rec["qlearn_delay"]),
            ))
    return rows


def write_results(table: ResultTable, out_dir) -> None:
    """results.csv and summary.csv are deterministic; wall-clock times go to timings.csv."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "results.csv").write_text(results_csv(table.rows))
    (out / "summary.csv").write_text(summary_csv(table.summary))
    (out / "timings.csv").write_text(timings_csv(table.rows))


def format_summary(summary: list[SummaryRow]) -> str:
    """Average-delay tables per sink position, followed by the improvement percentages."""
    lines = []
    for sink in sorted({s.sink for s in summary}):
        lines.append(f"Average aggregation delay (sink {sink})")
        lines.append(f"{'Nodes':>6} | {'Baseline':>9} | {'Q-learning':>10} | {'Improvement':>11}")
        for s in summary:
            if s.sink == sink:
                lines.append(
                    f"{s.nodes:>6} | {s.baseline_mean:>9.2f} | {s.qlearn_mean:>10.2f} | "
                    f"{s.improvement_pct:>10.2f}%"
                )
        lines.append("")
    return "\n".join(lines)


def write_trace_csv(delays: list[int], epsilons: list[float], destination) -> None:
    """Per-episode delay, running best, and the exploration rate used in that episode."""
    lines = ["episode,delay,best_delay,epsilon"]
    best = None
    for k, (d, eps) in enumerate(zip(delays, epsilons), start=1):
        best = d if best is None else min(best, d)
        lines.append(f"{k},{d},{best},{eps!r}")
    Path(destination).write_text("\n".join(lines) + "\n")


def export_schedule_dot(topology: Topology, schedule: Schedule, adjacency=None) -> str:
    """Graphviz document: tree edges directed and labeled by slot, other links dashed."""
    adjacency = adjacency if adjacency is not None else build_adjacency(topology)
    report = validate_schedule(schedule, adjacency)
    if not report.valid:
        raise ScheduleError(f"refusing to export an invalid schedule\n{report}")
    send_slot = schedule.sender_slots()
    tree = {frozenset(p) for p in schedule.pairs()}
    lines = ["digraph aggregation {", "  node [shape=circle];"]
    for u, (x, y) in enumerate(topology.coords):
        if u == topology.sink_id:
            lines.append(f'  {u} [slot=0, color=red, style=filled, pos="{x!r},{y!r}!"];')
        else:
            lines.append(f'  {u} [slot={send_slot[u]}, pos="{x!r},{y!r}!"];')
    for t, slot in enumerate(schedule.slots, start=1):
        for s, r in sorted(slot):
            lines.append(f'  {s} -> {r} [label="{t}"];')
    for u in range(len(adjacency)):
        for v in sorted(adjacency[u]):
            if u < v and frozenset((u, v)) not in tree:
                lines.append(f"  {u} -> {v} [style=dashed, dir=none];")
    lines.append("}")
    return "\n".join(lines) + "\n"
