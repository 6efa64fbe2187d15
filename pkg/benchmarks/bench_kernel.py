"""Compare training throughput of the compiled and pure-Python episode kernels.

    python benchmarks/bench_kernel.py --episodes 500 --nodes 50 100 300
"""

import argparse
import time

from aggsched.kernel import CompiledEpisodeKernel, PythonEpisodeKernel
from aggsched.qlearn import TrainConfig, train
from aggsched.topology import build_adjacency, generate_topology


def bench(kernel_cls, topo, adj, episodes, seed):
    kernel = kernel_cls(adj)
    start = time.perf_counter()
    out = train(topo, adj, TrainConfig(episodes=episodes, seed=seed), kernel)
    return time.perf_counter() - start, out


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--nodes", type=int, nargs="+", default=[50, 100, 200, 300])
    parser.add_argument("--episodes", type=int, default=500)
    parser.add_argument("--sink", choices=["center", "corner"], default="center")
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    kernels = [("python", PythonEpisodeKernel)]
    if CompiledEpisodeKernel is not None:
        kernels.append(("compiled", CompiledEpisodeKernel))
    else:
        print("compiled kernel not built; timing the pure-Python kernel only")

    print(f"{'nodes':>5} {'kernel':>9} {'seconds':>8} {'episodes/s':>11} {'speedup':>8} {'best':>5}")
    for n in args.nodes:
        topo = generate_topology(n, (100, 100), 20, args.sink, args.seed)
        adj = build_adjacency(topo)
        base_time, base_out = None, None
        for name, cls in kernels:
            secs, out = bench(cls, topo, adj, args.episodes, args.seed)
            if base_time is None:
                base_time, base_out = secs, out
            elif out.delays != base_out.delays:
                raise SystemExit(f"kernels disagree on N={n}")
            print(f"{n:>5} {name:>9} {secs:>8.3f} {args.episodes / secs:>11.0f} "
                  f"{base_time / secs:>7.1f}x {out.best_delay:>5}")


if __name__ == "__main__":
    main()
