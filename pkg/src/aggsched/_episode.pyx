# cython: boundscheck=False, wraparound=False, initializedcheck=False
"""Compiled episode kernel. Mirrors ``_episode_py`` step for step."""

import numpy as np

_ONE = 1  # Python int: state masks grow past 64 bits


cdef class EpisodeKernel:
    cdef readonly int n
    cdef readonly int sink
    cdef int[::1] indptr
    cdef int[::1] indices
    cdef int[::1] deg_s
    cdef int[::1] deg_ns
    cdef int[::1] eligible
    cdef int[::1] tlist
    cdef char[::1] in_vs
    cdef char[::1] t_cand
    cdef char[::1] c_cand
    cdef char[::1] is_elig
    cdef int n_elig

    compiled = True

    def __init__(self, adjacency, sink=0):
        cdef int u
        self.n = len(adjacency)
        self.sink = sink
        lists = [sorted(a) for a in adjacency]
        self.indptr = np.cumsum([0] + [len(x) for x in lists], dtype=np.int32)
        flat = [v for x in lists for v in x]
        self.indices = np.asarray(flat if flat else [0], dtype=np.int32)
        self.deg_s = np.zeros(self.n, dtype=np.int32)
        self.deg_ns = np.zeros(self.n, dtype=np.int32)
        self.eligible = np.zeros(self.n, dtype=np.int32)
        self.tlist = np.zeros(self.n, dtype=np.int32)
        self.in_vs = np.zeros(self.n, dtype=np.int8)
        self.t_cand = np.zeros(self.n, dtype=np.int8)
        self.c_cand = np.zeros(self.n, dtype=np.int8)
        self.is_elig = np.zeros(self.n, dtype=np.int8)

    cdef void _refresh_eligible(self):
        cdef int u, k = 0
        for u in range(self.n):
            if not self.in_vs[u] and self.deg_s[u] > 0:
                self.eligible[k] = u
                self.is_elig[u] = 1
                k += 1
            else:
                self.is_elig[u] = 0
        self.n_elig = k

    cdef int _pick_aggregator(self, int s):
        cdef int j, v, best = -1
        for j in range(self.indptr[s], self.indptr[s + 1]):
            v = self.indices[j]
            if self.c_cand[v] and (best < 0 or self.deg_ns[v] < self.deg_ns[best]):
                best = v
        return best

    cdef void _remove(self, int s, int r):
        cdef int j
        self.t_cand[s] = 0
        for j in range(self.indptr[r], self.indptr[r + 1]):
            self.t_cand[self.indices[j]] = 0
        self.c_cand[r] = 0
        for j in range(self.indptr[s], self.indptr[s + 1]):
            self.c_cand[self.indices[j]] = 0

    cdef list _spread(self, int a):
        cdef int u, i, r, best, nt = 0
        for u in range(self.n):
            self.c_cand[u] = 1 if (self.in_vs[u] and self.deg_ns[u] > 0) else 0
            self.t_cand[u] = 0
        for i in range(self.n_elig):
            u = self.eligible[i]
            if u != a:
                self.t_cand[u] = 1
                self.tlist[nt] = u
                nt += 1
        r = self._pick_aggregator(a)
        pairs = [(a, r)]
        self._remove(a, r)
        while True:
            best = -1
            for i in range(nt):
                u = self.tlist[i]
                if self.t_cand[u] and (best < 0 or self.deg_s[u] < self.deg_s[best]):
                    best = u
            if best < 0:
                break
            self.t_cand[best] = 0
            r = self._pick_aggregator(best)
            if r < 0:
                continue
            pairs.append((best, r))
            self._remove(best, r)
        return pairs

    cdef int _exploit(self, dict entries):
        cdef int best_a = -1, seen = 0, a, i, first_unseen = -1
        cdef double best_v = 0.0, v
        if not entries:
            return self.eligible[0]
        for key, value in entries.items():
            a = key
            if a < 0 or a >= self.n or not self.is_elig[a]:
                continue
            v = value
            seen += 1
            if best_a < 0 or v > best_v or (v == best_v and a < best_a):
                best_a = a
                best_v = v
        if seen == self.n_elig:
            return best_a
        for i in range(self.n_elig):
            if self.eligible[i] not in entries:
                first_unseen = self.eligible[i]
                break
        if best_a < 0 or best_v < 0.0:
            return first_unseen
        if best_v > 0.0:
            return best_a
        return best_a if best_a < first_unseen else first_unseen

    def run_episode(self, dict q, double epsilon, double alpha, double gamma,
                    rng=None, bint learn=True, key_fn=None):
        cdef int u, j, w, s, a, k, remaining
        cdef double reward, max_next, old, best
        cdef dict entries, nxt
        for u in range(self.n):
            self.in_vs[u] = 0
            self.deg_s[u] = 0
        self.in_vs[self.sink] = 1
        for j in range(self.indptr[self.sink], self.indptr[self.sink + 1]):
            self.deg_s[self.indices[j]] += 1
        for u in range(self.n):
            self.deg_ns[u] = (self.indptr[u + 1] - self.indptr[u]) - self.deg_s[u]
        remaining = self.n - 1
        mask = _ONE << self.sink
        key = mask if key_fn is None else key_fn(mask)
        self._refresh_eligible()
        actions = []
        batches = []

        while remaining:
            entries = q.get(key)
            if rng is not None and rng.random() < epsilon:
                a = self.eligible[rng.randrange(self.n_elig)]
            else:
                a = self._exploit(entries)
            pairs = self._spread(a)
            for pair in pairs:
                s = pair[0]
                self.in_vs[s] = 1
                mask |= _ONE << s
                remaining -= 1
                for j in range(self.indptr[s], self.indptr[s + 1]):
                    w = self.indices[j]
                    self.deg_s[w] += 1
                    self.deg_ns[w] -= 1
            self._refresh_eligible()
            next_key = mask if key_fn is None else key_fn(mask)
            if learn:
                k = len(pairs)
                reward = <double>(k * k)
                if remaining == 0:
                    max_next = 0.0
                else:
                    nxt = q.get(next_key)
                    if not nxt:
                        max_next = 0.0
                    else:
                        best = max(nxt.values())
                        if len(nxt) < self.n_elig and best < 0.0:
                            best = 0.0
                        max_next = best
                if entries is None:
                    entries = {}
                    q[key] = entries
                old = entries.get(a, 0.0)
                entries[a] = old + alpha * (reward + gamma * max_next - old)
            actions.append(a)
            batches.append(tuple(pairs))
            key = next_key
        return actions, batches
