"""Independent exhaustive oracle for the minimum aggregation delay.

Branches on every nonempty sender subset and every aggregator assignment
(no maximality shortcut, no bounds), memoized over the aggregated set.
Only usable for a handful of nodes.
"""

from functools import lru_cache
from itertools import combinations, product


def slot_ok(pairs, adjacency):
    receivers = [r for _, r in pairs]
    if len(set(receivers)) != len(receivers):
        return False
    for s, r in pairs:
        if r not in adjacency[s]:
            return False
        for s2, r2 in pairs:
            if s2 != s and r in adjacency[s2]:
                return False
    return True


def exhaustive_min_delay(adjacency, sink=0):
    n = len(adjacency)
    everyone = frozenset(range(n))

    @lru_cache(maxsize=None)
    def f(aggregated):
        pending = sorted(everyone - aggregated)
        if not pending:
            return 0
        best = None
        for k in range(1, len(pending) + 1):
            for senders in combinations(pending, k):
                choices = [sorted(adjacency[s] & aggregated) for s in senders]
                if any(not c for c in choices):
                    continue
                for receivers in product(*choices):
                    if slot_ok(list(zip(senders, receivers)), adjacency):
                        sub = f(aggregated | frozenset(senders))
                        if sub is not None and (best is None or 1 + sub < best):
                            best = 1 + sub
                        break  # next state depends only on the sender set
        return best

    return f(frozenset({sink}))
