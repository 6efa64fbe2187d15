"""Comparator schedulers.

``baseline_schedule`` is a plain two-phase heuristic (BFS tree, then greedy
slot filling). It is a stand-in comparator, not a reimplementation of any
published tree-refinement heuristic.

``brute_force_optimal`` is an exact search used as an oracle on tiny graphs.
It shares no code with the greedy batch builder.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations

from .schedule import CONSTRUCTION, Schedule, reverse_schedule
from .topology import SINK, Adjacency, DisconnectedTopologyError, hop_distances


@dataclass(frozen=True)
class BfsTree:
    parent: dict[int, int]
    depth: list[int]

    def children(self) -> dict[int, list[int]]:
        out: dict[int, list[int]] = {u: [] for u in range(len(self.depth))}
        for u, p in self.parent.items():
            out[p].append(u)
        return out


def bfs_tree(adjacency: Adjacency, sink: int = SINK) -> BfsTree:
    """Shortest-hop spanning tree; each node's parent is its lowest-id neighbor one hop closer."""
    depth = hop_distances(adjacency, (sink,))
    if min(depth, default=0) < 0:
        raise DisconnectedTopologyError("bfs_tree needs a connected topology")
    parent = {
        u: min(v for v in adjacency[u] if depth[v] == depth[u] - 1)
        for u in range(len(adjacency))
        if u != sink
    }
    return BfsTree(parent, depth)


def baseline_schedule(adjacency: Adjacency, sink: int = SINK) -> Schedule:
    """Greedy slot filling over the BFS tree, deepest nodes first."""
    tree = bfs_tree(adjacency, sink)
    pending_children = {u: len(c) for u, c in tree.children().items()}
    unsent = set(tree.parent)
    slots = []
    while unsent:
        ready = sorted(
            (u for u in unsent if pending_children[u] == 0),
            key=lambda u: (-tree.depth[u], u),
        )
        senders: list[int] = []
        receivers: list[int] = []
        for u in ready:
            p = tree.parent[u]
            if p in receivers:
                continue
            if any(p in adjacency[s] for s in senders):
                continue
            if any(r in adjacency[u] for r in receivers):
                continue
            senders.append(u)
            receivers.append(p)
        slots.append(tuple(zip(senders, receivers)))
        for u, p in zip(senders, receivers):
            unsent.discard(u)
            pending_children[p] -= 1
    return Schedule(tuple(slots))


class SearchRefused(ValueError):
    pass


@dataclass(frozen=True)
class ExactResult:
    delay: int | None
    schedule: Schedule | None
    exhausted: bool  # search budget ran out; delay is then only an upper bound (or None)
    expanded: int


def _assignments(senders, aggregated, adjacency, chosen=(), used=frozenset()):
    """Yield one interference-free aggregator assignment for ``senders`` if any exists."""
    if not senders:
        yield chosen
        return
    s, rest = senders[0], senders[1:]
    for r in sorted(adjacency[s] & aggregated):
        if r in used:
            continue
        # r must not hear any other sender of the slot; s must not reach any other receiver
        if any(r in adjacency[x] for x in senders if x != s) or any(r in adjacency[x] for x, _ in chosen):
            continue
        if any(y in adjacency[s] for _, y in chosen):
            continue
        yield from _assignments(rest, aggregated, adjacency, chosen + ((s, r),), used | {r})


def feasible_batches(aggregated: frozenset, pending: frozenset, adjacency: Adjacency):
    """All inclusion-maximal sender sets that can transmit together into ``aggregated``.

    Returns a list of ``(senders, pairs)`` with one witness assignment each.
    """
    frontier = sorted(u for u in pending if adjacency[u] & aggregated)
    feasible = {}
    for k in range(len(frontier), 0, -1):
        for combo in combinations(frontier, k):
            key = frozenset(combo)
            if any(key < bigger for bigger in feasible):
                continue
            witness = next(_assignments(combo, aggregated, adjacency), None)
            if witness is not None:
                feasible[key] = witness
    return list(feasible.items())


def brute_force_optimal(adjacency: Adjacency, sink: int = SINK, node_limit: int = 8,
                        budget: int = 1_000_000) -> ExactResult:
    """Minimum aggregation delay by exhaustive search over construction-order batches.

    ``node_limit`` caps the number of sensors (non-sink nodes). Only
    inclusion-maximal batches are branched on; a schedule using a smaller batch
    can always be rewritten to use a larger one without growing. Subproblems are
    memoized by aggregated set and pruned by the hop-distance lower bound.
    """
    n = len(adjacency)
    if n - 1 > node_limit:
        raise SearchRefused(f"{n - 1} sensors exceeds the exact-search limit of {node_limit}")
    if min(hop_distances(adjacency, (sink,)), default=0) < 0:
        raise DisconnectedTopologyError("brute_force_optimal needs a connected topology")
    everyone = frozenset(range(n))
    expanded = 0
    exhausted = False

    def lower_bound(aggregated):
        return max(hop_distances(adjacency, tuple(aggregated)))

    @lru_cache(maxsize=None)
    def best_from(aggregated: frozenset):
        """(remaining slots, construction-order batches) or None when out of budget."""
        nonlocal expanded, exhausted
        pending = everyone - aggregated
        if not pending:
            return 0, ()
        expanded += 1
        if expanded > budget:
            exhausted = True
            return None
        floor = lower_bound(aggregated)
        best = None
        options = feasible_batches(aggregated, pending, adjacency)
        options.sort(key=lambda item: (-len(item[0]), sorted(item[0])))
        for senders, pairs in options:
            if best is not None and 1 + lower_bound(aggregated | senders) >= best[0]:
                continue
            sub = best_from(aggregated | senders)
            if sub is None:
                continue
            if best is None or 1 + sub[0] < best[0]:
                best = (1 + sub[0], (pairs,) + sub[1])
                if best[0] == floor:
                    break
        return best

    result = best_from(frozenset({sink}))
    if result is None:
        return ExactResult(None, None, True, expanded)
    delay, batches = result
    schedule = reverse_schedule(Schedule(batches, CONSTRUCTION))
    return ExactResult(delay, schedule, exhausted, expanded)
