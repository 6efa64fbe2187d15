"""Greedy construction of one interference-free batch of transmissions.

This is the environment step of the scheduling MDP, written over plain sets
for clarity. The training loop runs an array-based copy of the same logic
(``aggsched._episode``); the two are cross-checked in the test suite.

Schedules are built in construction order: the batch chosen from a partition
transmits *before* every node already in the aggregated set.
"""

from __future__ import annotations

from dataclasses import dataclass

from .topology import SINK, Adjacency


class BatchError(ValueError):
    pass


@dataclass(frozen=True)
class Partition:
    aggregated: frozenset[int]  # V_s, always holds the sink
    pending: frozenset[int]  # V_ns

    @classmethod
    def initial(cls, n_nodes: int, sink: int = SINK) -> "Partition":
        return cls(frozenset({sink}), frozenset(range(n_nodes)) - {sink})

    @property
    def done(self) -> bool:
        return not self.pending


@dataclass(frozen=True)
class BatchResult:
    pairs: tuple[tuple[int, int], ...]  # (sender, aggregator) in pick order

    @property
    def senders(self) -> frozenset[int]:
        return frozenset(s for s, _ in self.pairs)

    @property
    def aggregators(self) -> frozenset[int]:
        return frozenset(r for _, r in self.pairs)

    def __len__(self):
        return len(self.pairs)


def eligible_initial_senders(partition: Partition, adjacency: Adjacency) -> frozenset[int]:
    """Pending nodes with at least one aggregated neighbor."""
    vs = partition.aggregated
    return frozenset(u for u in partition.pending if adjacency[u] & vs)


def collision_remover(sender, aggregator, t_cand, c_cand, adjacency: Adjacency):
    t_cand = set(t_cand)
    c_cand = set(c_cand)
    t_cand.discard(sender)
    t_cand -= adjacency[aggregator]
    c_cand.discard(aggregator)
    c_cand -= adjacency[sender]
    return t_cand, c_cand


def select_aggregator(sender, c_cand, pending, adjacency: Adjacency):
    """Neighbor of ``sender`` in ``c_cand`` with fewest pending neighbors (lowest id on ties)."""
    options = adjacency[sender] & c_cand
    if not options:
        return None
    return min(options, key=lambda u: (len(adjacency[u] & pending), u))


def greedy_spread(partition: Partition, initial_sender: int, adjacency: Adjacency) -> BatchResult:
    vs, vns = partition.aggregated, partition.pending
    if initial_sender not in vns or not adjacency[initial_sender] & vs:
        raise BatchError(f"node {initial_sender} is not an eligible initial sender")

    t_cand = {u for u in vns if u != initial_sender and adjacency[u] & vs}
    c_cand = {u for u in vs if adjacency[u] & vns}
    first = select_aggregator(initial_sender, c_cand, vns, adjacency)
    pairs = [(initial_sender, first)]
    t_cand, c_cand = collision_remover(initial_sender, first, t_cand, c_cand, adjacency)

    while t_cand:
        u = min(t_cand, key=lambda v: (len(adjacency[v] & vs), v))
        r = select_aggregator(u, c_cand, vns, adjacency)
        if r is None:
            # every aggregated neighbor of u is already blocked this slot
            t_cand.discard(u)
            continue
        pairs.append((u, r))
        t_cand, c_cand = collision_remover(u, r, t_cand, c_cand, adjacency)
    return BatchResult(tuple(pairs))


def apply_batch(partition: Partition, batch: BatchResult) -> Partition:
    senders = batch.senders
    return Partition(partition.aggregated | senders, partition.pending - senders)
