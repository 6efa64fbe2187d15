"""Pure-Python episode kernel, used when the compiled extension is unavailable.

Must stay step-for-step identical to ``_episode.pyx``: same rng calls in the
same order, same tie-breaking, same floating-point expression for the update.
"""

from __future__ import annotations


def exploit(entries, eligible, eligible_set):
    """Argmax of Q over eligible actions; missing values count as 0, ties go to the lowest id."""
    if not entries:
        return eligible[0]
    best_a = -1
    best_v = 0.0
    seen = 0
    for a, v in entries.items():
        if a not in eligible_set:
            continue
        seen += 1
        if best_a < 0 or v > best_v or (v == best_v and a < best_a):
            best_a, best_v = a, v
    if seen == len(eligible):
        return best_a
    first_unseen = next(u for u in eligible if u not in entries)
    if best_a < 0 or best_v < 0.0:
        return first_unseen
    if best_v > 0.0:
        return best_a
    return min(best_a, first_unseen)


def max_value(entries, n_eligible):
    if not entries:
        return 0.0
    best = max(entries.values())
    if len(entries) < n_eligible and best < 0.0:
        return 0.0
    return best


class EpisodeKernel:
    """Runs whole episodes of the scheduling MDP on one fixed topology."""

    compiled = False

    def __init__(self, adjacency, sink=0):
        self.n = len(adjacency)
        self.sink = sink
        self.nbr_sets = [frozenset(a) for a in adjacency]
        self.nbrs = [sorted(a) for a in adjacency]

    def _spread(self, a, eligible, in_vs, deg_s, deg_ns):
        nbr_sets = self.nbr_sets
        t_cand = set(eligible)
        t_cand.discard(a)
        c_cand = {u for u in range(self.n) if in_vs[u] and deg_ns[u] > 0}

        def pick_aggregator(s):
            best = -1
            for v in self.nbrs[s]:
                if v in c_cand and (best < 0 or deg_ns[v] < deg_ns[best]):
                    best = v
            return best

        r = pick_aggregator(a)
        pairs = [(a, r)]
        t_cand -= nbr_sets[r]
        c_cand.discard(r)
        c_cand -= nbr_sets[a]
        while t_cand:
            u = min(t_cand, key=lambda v: (deg_s[v], v))
            t_cand.discard(u)
            r = pick_aggregator(u)
            if r < 0:
                continue
            pairs.append((u, r))
            t_cand -= nbr_sets[r]
            c_cand.discard(r)
            c_cand -= nbr_sets[u]
        return pairs

    def run_episode(self, q, epsilon, alpha, gamma, rng=None, learn=True, key_fn=None):
        """Play one episode from V_s = {sink}.

        Returns ``(actions, batches)`` in construction order. With ``learn``
        the Q-table ``q`` (state key -> {action: value}) is updated in place.
        ``rng`` is a ``random.Random``; pass None for pure exploitation.
        """
        n, sink, nbrs = self.n, self.sink, self.nbrs
        in_vs = [False] * n
        in_vs[sink] = True
        deg_s = [0] * n
        for w in nbrs[sink]:
            deg_s[w] += 1
        deg_ns = [len(nbrs[u]) - deg_s[u] for u in range(n)]
        remaining = n - 1
        mask = 1 << sink
        key = mask if key_fn is None else key_fn(mask)
        eligible = [u for u in range(n) if not in_vs[u] and deg_s[u] > 0]
        actions, batches = [], []

        while remaining:
            entries = q.get(key)
            if rng is not None and rng.random() < epsilon:
                a = eligible[rng.randrange(len(eligible))]
            else:
                a = exploit(entries, eligible, set(eligible) if entries else None)
            pairs = self._spread(a, eligible, in_vs, deg_s, deg_ns)
            for s, _ in pairs:
                in_vs[s] = True
                mask |= 1 << s
                remaining -= 1
                for w in nbrs[s]:
                    deg_s[w] += 1
                    deg_ns[w] -= 1
            eligible = [u for u in range(n) if not in_vs[u] and deg_s[u] > 0]
            next_key = mask if key_fn is None else key_fn(mask)
            if learn:
                k = len(pairs)
                reward = float(k * k)
                max_next = 0.0 if remaining == 0 else max_value(q.get(next_key), len(eligible))
                if entries is None:
                    entries = q[key] = {}
                old = entries.get(a, 0.0)
                entries[a] = old + alpha * (reward + gamma * max_next - old)
            actions.append(a)
            batches.append(tuple(pairs))
            key = next_key
        return actions, batches
