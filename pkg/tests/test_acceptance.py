"""Acceptance criteria for the scheduler, one test per criterion.

Each test records a PASS/FAIL line; the lines are printed in the pytest
terminal summary. Run alone with ``pytest tests/test_acceptance.py -v``.
"""

import math
import subprocess
import sys
import time
from fractions import Fraction

import pytest

from aggsched.baseline import baseline_schedule, brute_force_optimal
from aggsched.batch_builder import BatchResult, Partition, greedy_spread
from aggsched.harness import ExperimentConfig, compare_results, format_summary, run_experiment
from aggsched.qlearn import TrainConfig, bellman_update, reward_of, solve, train
from aggsched.schedule import delay_of, schedule_to_tree, validate_schedule
from aggsched.topology import build_adjacency, generate_topology, sink_eccentricity
from conftest import B, C, D, E, F, adjacency_from_edges, topology_for, FIG3_EDGES

pytestmark = pytest.mark.slow

RESULTS: list[str] = []


def record(number: int, ok: bool, detail: str):
    line = f"criterion {number}: {'PASS' if ok else 'FAIL'} - {detail}"
    RESULTS.append(line)
    print(line)
    return ok


# -- criterion 1 data is reused by criterion 8 ------------------------------------------

VALIDITY_NODES = (50, 100, 150, 200, 250, 300)
VALIDITY_SEEDS = range(5)
VALIDITY_EPISODES = 2000


@pytest.fixture(scope="module")
def validity_runs():
    runs = []
    for n in VALIDITY_NODES:
        for sink in ("center", "corner"):
            for seed in VALIDITY_SEEDS:
                topo = generate_topology(n, (100, 100), 20, sink, seed)
                adj = build_adjacency(topo)
                base = baseline_schedule(adj)
                res = solve(topo, adj, TrainConfig(episodes=VALIDITY_EPISODES, seed=seed))
                runs.append(dict(n=n, sink=sink, seed=seed, topo=topo, adj=adj, base=base, res=res))
    return runs


def test_criterion_1_validity(validity_runs):
    bad = []
    for run in validity_runs:
        for name, sched in (("baseline", run["base"]), ("qlearn", run["res"].schedule),
                            ("qlearn-best-episode", run["res"].outcome.best_schedule)):
            report = validate_schedule(sched, run["adj"])
            if not report.valid:
                bad.append((run["n"], run["sink"], run["seed"], name, len(report.violations)))
    ok = len(validity_runs) == 60 and not bad
    record(1, ok, f"{len(validity_runs)} topologies, invalid schedules: {bad or 'none'}")
    assert ok


def test_criterion_2_exact_oracle_agreement():
    start = time.perf_counter()
    matches, below, rows = 0, 0, []
    for i in range(30):
        n = 4 + i % 4
        sink = "center" if i % 2 == 0 else "corner"
        topo = generate_topology(n, (100, 100), 40.0, sink, seed=1000 + i)
        adj = build_adjacency(topo)
        exact = brute_force_optimal(adj)
        assert not exact.exhausted
        out = train(topo, adj, TrainConfig(seed=i))
        matches += out.best_delay == exact.delay
        below += out.best_delay < exact.delay
        rows.append((n, exact.delay, out.best_delay))
    elapsed = time.perf_counter() - start
    ok = matches / 30 >= 0.9 and below == 0 and elapsed < 300
    record(2, ok, f"optimum reached on {matches}/30, below optimum {below}, {elapsed:.1f}s")
    assert ok, rows


def _within_ulps(value: float, exact: Fraction, ulps: int = 2) -> bool:
    return abs(Fraction(value) - exact) <= ulps * Fraction(math.ulp(float(exact)))


def test_criterion_3_unit_exactness():
    cases = [(0.0, 4.0, 0.0, 0.1, 0.9), (1.0, 1.0, 1.0, 0.1, 0.9), (2.5, 9.0, 7.25, 0.1, 0.9),
             (0.3, 1.0, 0.0, 1.0, 0.9), (5.0, 0.0, 3.0, 0.0, 0.9)]
    bellman_ok = True
    for q, r, m, a, g in cases:
        Fq, Fr, Fm, Fa, Fg = map(Fraction, (q, r, m, a, g))
        exact = Fq + Fa * (Fr + Fg * Fm - Fq)
        bellman_ok &= _within_ulps(bellman_update(q, r, m, a, g), exact)
    bellman_ok &= bellman_update(0.0, 4.0, 0.0, 0.1, 0.9) == 0.4
    bellman_ok &= bellman_update(7.0, 3.0, 2.0, 0.0, 0.9) == 7.0

    reward_ok = all(
        reward_of(BatchResult(tuple((i, 100 + i) for i in range(k)))) == k * k for k in range(1, 12)
    )

    adj = adjacency_from_edges(8, FIG3_EDGES)
    cfg = TrainConfig()  # Table I: 20,000 episodes, decay 1/episodes
    out = train(topology_for(adj), adj, cfg)
    expected = [max(1 - k / cfg.episodes, 0) for k in range(cfg.episodes)]
    eps_ok = out.epsilons == expected and cfg.epsilon_after(cfg.episodes) == 0

    ok = bellman_ok and reward_ok and eps_ok
    record(3, ok, f"bellman={bellman_ok} reward={reward_ok} epsilon-trace={eps_ok}")
    assert ok


def test_criterion_4_fig3_batches():
    adj = adjacency_from_edges(8, FIG3_EDGES)
    part = Partition(frozenset({0, B, C}), frozenset(range(8)) - {0, B, C})
    from_d = greedy_spread(part, D, adj)
    from_e = greedy_spread(part, E, adj)
    ok = len(from_d) == 1 and len(from_e) == 2 and from_e.pairs == ((E, B), (F, C))
    ok &= greedy_spread(part, E, adj) == from_e
    record(4, ok, f"initial D -> {from_d.pairs}, initial E -> {from_e.pairs}")
    assert ok


@pytest.fixture(scope="module")
def magnitude_table():
    config = ExperimentConfig(
        node_counts=(50, 100), sink_positions=("center", "corner"), replicates=10,
        base_seed=0, range_R=20.0, train=TrainConfig(episodes=20000),
    )
    start = time.perf_counter()
    table = run_experiment(config)
    return table, time.perf_counter() - start


def test_criterion_5_magnitude_band(magnitude_table):
    table, elapsed = magnitude_table
    means = {(s.nodes, s.sink): s.qlearn_mean for s in table.summary}
    center, corner = means[(50, "center")], means[(50, "corner")]
    ok = 8 <= center <= 16 and 11 <= corner <= 20 and elapsed <= 15 * 60
    record(5, ok, f"N=50 mean delay center {center:.2f} (band 8-16), corner {corner:.2f} "
                  f"(band 11-20), sweep {elapsed:.0f}s")
    assert ok


def test_criterion_6_non_inferiority(magnitude_table):
    table, _ = magnitude_table
    summary = compare_results(table.rows)
    print(format_summary(summary))
    worse = [(s.nodes, s.sink) for s in summary if s.qlearn_mean > s.baseline_mean]
    pct = ", ".join(f"N={s.nodes} {s.sink} {s.improvement_pct:.2f}%" for s in summary)
    ok = not worse
    record(6, ok, f"improvement over baseline: {pct}")
    assert ok


PINNED = """{
  "node_counts": [30, 60], "sink_positions": ["center", "corner"], "replicates": 2,
  "base_seed": 17, "range_R": 20.0, "area": [100.0, 100.0],
  "train": {"episodes": 400, "alpha": 0.1, "gamma": 0.9}
}
"""


def test_criterion_7_determinism(tmp_path):
    cfg = tmp_path / "pinned.json"
    cfg.write_text(PINNED)
    outputs = []
    for run in ("a", "b"):
        out = tmp_path / run
        proc = subprocess.run(
            [sys.executable, "-m", "aggsched", "sweep", "--config", str(cfg), "--out", str(out)],
            capture_output=True, text=True,
        )
        assert proc.returncode == 0, proc.stderr
        outputs.append(((out / "results.csv").read_bytes(), (out / "summary.csv").read_bytes()))
    from aggsched.cli import main

    assert main(["sweep", "--config", str(cfg), "--out", str(tmp_path / "c")]) == 0
    outputs.append(((tmp_path / "c" / "results.csv").read_bytes(),
                    (tmp_path / "c" / "summary.csv").read_bytes()))
    ok = outputs[0] == outputs[1] == outputs[2] and len(outputs[0][0].splitlines()) == 9
    record(7, ok, "results.csv and summary.csv byte-identical across two fresh processes "
                  "and one in-process run")
    assert ok


def _is_spanning_tree(parent, n_nodes):
    if sorted(parent) != list(range(1, n_nodes)):
        return False
    for u in parent:
        seen = 0
        while u != 0:
            u = parent[u]
            seen += 1
            if seen > n_nodes:
                return False
    return True


def test_criterion_8_structure(validity_runs):
    bad_tree, bad_bound = [], []
    for run in validity_runs:
        adj, n_nodes = run["adj"], run["topo"].n_nodes
        ecc = sink_eccentricity(adj)
        for name, sched in (("baseline", run["base"]), ("qlearn", run["res"].schedule)):
            parent = schedule_to_tree(sched, adj)
            if len(parent) != run["n"] or not _is_spanning_tree(parent, n_nodes):
                bad_tree.append((run["n"], run["sink"], run["seed"], name))
            if delay_of(sched) < ecc:
                bad_bound.append((run["n"], run["sink"], run["seed"], name))
        if run["res"].outcome.best_delay < ecc:
            bad_bound.append((run["n"], run["sink"], run["seed"], "best_delay"))
    ok = not bad_tree and not bad_bound
    record(8, ok, f"{len(validity_runs)} instances, tree failures {bad_tree or 'none'}, "
                  f"eccentricity-bound failures {bad_bound or 'none'}")
    assert ok


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v"]))
