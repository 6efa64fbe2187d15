"""Tabular Q-learning over aggregated-set states.

A state is the set of nodes already placed in the (construction-order)
schedule; an action is the initial sender of the next batch. The batch itself
is grown greedily, so the agent only learns which node to seed each slot with.

State keys are integers: bit ``i`` is set iff node ``i`` is aggregated. This is
collision-free and order-insensitive. ``key_mode="digest"`` instead keys states
by a 64-bit BLAKE2b digest of that integer, which saves memory on very large
tables at the cost of a (tiny) collision risk.
"""

from __future__ import annotations

import hashlib
import json
import logging
import random
from dataclasses import dataclass, field
from pathlib import Path

from .batch_builder import BatchResult
from .kernel import EpisodeKernel
from .schedule import CONSTRUCTION, Schedule, reverse_schedule
from .topology import Adjacency, DisconnectedTopologyError, Topology, is_connected

log = logging.getLogger(__name__)

QTABLE_FILE_VERSION = 1
KEY_MODES = ("canonical", "digest")


class QTableError(ValueError):
    pass


def canonical_state_key(nodes) -> int:
    mask = 0
    for u in nodes:
        mask |= 1 << int(u)
    return mask


def state_nodes(key: int) -> list[int]:
    """Inverse of canonical_state_key: ascending node ids."""
    out, i = [], 0
    while key:
        if key & 1:
            out.append(i)
        key >>= 1
        i += 1
    return out


def digest_state_key(mask: int) -> int:
    raw = mask.to_bytes((mask.bit_length() + 7) // 8 or 1, "little")
    return int.from_bytes(hashlib.blake2b(raw, digest_size=8).digest(), "little")


@dataclass
class QTable:
    data: dict = field(default_factory=dict)  # state key -> {action: value}
    key_mode: str = "canonical"

    def __post_init__(self):
        if self.key_mode not in KEY_MODES:
            raise QTableError(f"key_mode must be one of {KEY_MODES}, got {self.key_mode!r}")

    @property
    def key_fn(self):
        return digest_state_key if self.key_mode == "digest" else None

    def key_for(self, nodes) -> int:
        mask = canonical_state_key(nodes)
        return digest_state_key(mask) if self.key_mode == "digest" else mask

    def values(self, nodes) -> dict:
        return self.data.get(self.key_for(nodes), {})

    def copy(self) -> "QTable":
        return QTable({k: dict(v) for k, v in self.data.items()}, self.key_mode)

    def __len__(self):
        return len(self.data)

    def __eq__(self, other):
        return (
            isinstance(other, QTable)
            and self.key_mode == other.key_mode
            and self.data == other.data
        )


@dataclass(frozen=True)
class TrainConfig:
    alpha: float = 0.1
    gamma: float = 0.9
    epsilon_init: float = 1.0
    epsilon_decay: float | None = None  # None means 1 / episodes
    episodes: int = 20000
    seed: int = 0
    key_mode: str = "canonical"

    def __post_init__(self):
        if not 0.0 < self.alpha <= 1.0:
            raise ValueError(f"alpha must be in (0, 1], got {self.alpha}")
        if not 0.0 < self.gamma <= 1.0:
            raise ValueError(f"gamma must be in (0, 1], got {self.gamma}")
        if not 0.0 <= self.epsilon_init <= 1.0:
            raise ValueError(f"epsilon_init must be in [0, 1], got {self.epsilon_init}")
        if self.epsilon_decay is not None and self.epsilon_decay < 0:
            raise ValueError(f"epsilon_decay must be >= 0, got {self.epsilon_decay}")
        if self.episodes < 1:
            raise ValueError(f"episodes must be >= 1, got {self.episodes}")
        if self.key_mode not in KEY_MODES:
            raise ValueError(f"key_mode must be one of {KEY_MODES}")

    def epsilon_after(self, k: int) -> float:
        """Exploration rate once ``k`` episodes have finished (closed form of the linear decay)."""
        if self.epsilon_decay is None:
            decayed = k / self.episodes
        else:
            decayed = k * self.epsilon_decay
        return max(self.epsilon_init - decayed, 0.0)


@dataclass
class TrainOutcome:
    best_delay: int
    best_schedule: Schedule
    best_qtable: QTable
    delays: list[int]
    epsilons: list[float]  # exploration rate used in each episode
    qtable: QTable  # table after the last episode


def bellman_update(q: float, reward: float, max_next: float, alpha: float, gamma: float) -> float:
    return q + alpha * (reward + gamma * max_next - q)


def reward_of(batch: BatchResult) -> float:
    return float(len(batch) ** 2)


def choose_action(qtable: QTable, state_key, eligible, epsilon: float, rng: random.Random | None):
    """Epsilon-greedy pick among ``eligible``.

    Draws one uniform number (when ``rng`` is given) and, when exploring, one
    ``randrange`` over the ascending eligible list; the training kernel makes
    exactly the same calls.
    """
    ordered = sorted(eligible)
    if not ordered:
        raise ValueError("choose_action needs a nonempty eligible set")
    if rng is not None and rng.random() < epsilon:
        return ordered[rng.randrange(len(ordered))]
    entries = qtable.data.get(state_key)
    best = ordered[0]
    if entries:
        best_v = entries.get(best, 0.0)
        for a in ordered[1:]:
            v = entries.get(a, 0.0)
            if v > best_v:
                best, best_v = a, v
    return best


def _schedule_from_batches(batches) -> Schedule:
    return reverse_schedule(Schedule(slots=tuple(batches), direction=CONSTRUCTION))


def train(topology: Topology, adjacency: Adjacency, config: TrainConfig = TrainConfig(),
          kernel=None) -> TrainOutcome:
    """Run ``config.episodes`` training episodes and keep the best schedule seen."""
    if not is_connected(adjacency):
        raise DisconnectedTopologyError("cannot train on a disconnected topology")
    if len(adjacency) != topology.n_nodes:
        raise ValueError("adjacency does not match topology")
    kernel = kernel or EpisodeKernel(adjacency, topology.sink_id)
    qtable = QTable(key_mode=config.key_mode)
    rng = random.Random(config.seed)
    best_delay = None
    best_batches = None
    best_q = QTable(key_mode=config.key_mode)
    delays, epsilons = [], []
    epsilon = config.epsilon_init
    for k in range(1, config.episodes + 1):
        _, batches = kernel.run_episode(
            qtable.data, epsilon, config.alpha, config.gamma, rng, True, qtable.key_fn
        )
        delay = len(batches)
        delays.append(delay)
        epsilons.append(epsilon)
        if best_delay is None or delay < best_delay:
            best_delay, best_batches = delay, batches
            best_q = qtable.copy()
            log.debug("episode %d: new best delay %d", k, delay)
        epsilon = config.epsilon_after(k)
    return TrainOutcome(
        best_delay=best_delay,
        best_schedule=_schedule_from_batches(best_batches),
        best_qtable=best_q,
        delays=delays,
        epsilons=epsilons,
        qtable=qtable,
    )


def evaluate_greedy(topology: Topology, adjacency: Adjacency, qtable: QTable, kernel=None) -> Schedule:
    """Single pure-exploitation rollout, returned in transmission order."""
    kernel = kernel or EpisodeKernel(adjacency, topology.sink_id)
    _, batches = kernel.run_episode(qtable.data, 0.0, 0.0, 0.0, None, False, qtable.key_fn)
    return _schedule_from_batches(batches)


@dataclass
class SolveResult:
    schedule: Schedule
    delay: int
    greedy_delay: int
    outcome: TrainOutcome


def solve(topology: Topology, adjacency: Adjacency, config: TrainConfig = TrainConfig(),
          kernel=None) -> SolveResult:
    """Train, roll out greedily on the best table, and report the shorter of the two schedules."""
    kernel = kernel or EpisodeKernel(adjacency, topology.sink_id)
    outcome = train(topology, adjacency, config, kernel)
    greedy = evaluate_greedy(topology, adjacency, outcome.best_qtable, kernel)
    if len(greedy.slots) < outcome.best_delay:
        chosen = greedy
    else:
        chosen = outcome.best_schedule
    return SolveResult(chosen, len(chosen.slots), len(greedy.slots), outcome)


def qtable_to_dict(qtable: QTable) -> dict:
    states = []
    for key in sorted(qtable.data):
        values = qtable.data[key]
        state = state_nodes(key) if qtable.key_mode == "canonical" else f"{key:016x}"
        states.append({"state": state, "values": {str(a): values[a] for a in sorted(values)}})
    return {"version": QTABLE_FILE_VERSION, "key_mode": qtable.key_mode, "states": states}


def qtable_from_dict(doc: dict) -> QTable:
    try:
        if doc["version"] != QTABLE_FILE_VERSION:
            raise QTableError(f"field 'version': unsupported value {doc['version']!r}")
        key_mode = doc["key_mode"]
        data = {}
        for i, entry in enumerate(doc["states"]):
            state = entry["state"]
            key = canonical_state_key(state) if key_mode == "canonical" else int(state, 16)
            data[key] = {int(a): float(v) for a, v in entry["values"].items()}
    except (KeyError, TypeError, ValueError, AttributeError) as exc:
        if isinstance(exc, QTableError):
            raise
        raise QTableError(f"malformed Q-table document: {exc!r}") from exc
    return QTable(data, key_mode)


def save_qtable(qtable: QTable, destination) -> None:
    Path(destination).write_text(json.dumps(qtable_to_dict(qtable)) + "\n")


def load_qtable(source) -> QTable:
    try:
        doc = json.loads(Path(source).read_text())
    except json.JSONDecodeError as exc:
        raise QTableError(f"not a valid Q-table document: {exc}") from exc
    return qtable_from_dict(doc)
