"""Aggregation schedules and their validation under the protocol interference model."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .topology import SINK, Adjacency

CONSTRUCTION = "construction_order"
TRANSMISSION = "transmission_order"

Pair = tuple[int, int]  # (sender, aggregator)

VIOLATION_KINDS = (
    "non-edge-link",
    "multi-sender-per-receiver",
    "neighbor-interference",
    "dependency",
    "missing-node",
    "duplicate-sender",
)


class ScheduleError(ValueError):
    """Contract violation: wrong direction tag, invalid schedule, bad file."""


@dataclass(frozen=True)
class Schedule:
    slots: tuple[tuple[Pair, ...], ...]
    direction: str = TRANSMISSION

    def __post_init__(self):
        if self.direction not in (CONSTRUCTION, TRANSMISSION):
            raise ScheduleError(f"unknown direction tag {self.direction!r}")
        object.__setattr__(
            self,
            "slots",
            tuple(tuple((int(s), int(r)) for s, r in slot) for slot in self.slots),
        )

    def __len__(self):
        return len(self.slots)

    def pairs(self):
        for slot in self.slots:
            yield from slot

    def sender_slots(self) -> dict[int, int]:
        """Map sender -> 1-based slot index (first occurrence)."""
        out: dict[int, int] = {}
        for t, slot in enumerate(self.slots, start=1):
            for s, _ in slot:
                out.setdefault(s, t)
        return out


@dataclass(frozen=True)
class Violation:
    slot: int | None  # 1-based; None for schedule-wide problems
    kind: str
    nodes: tuple[int, ...]


@dataclass
class ValidationReport:
    violations: list[Violation] = field(default_factory=list)

    @property
    def valid(self) -> bool:
        return not self.violations

    def kinds(self) -> set[str]:
        return {v.kind for v in self.violations}

    def __str__(self):
        if self.valid:
            return "valid"
        lines = [f"{len(self.violations)} violation(s):"]
        for v in self.violations:
            where = f"slot {v.slot}" if v.slot is not None else "schedule"
            lines.append(f"  {where}: {v.kind} {list(v.nodes)}")
        return "\n".join(lines)


def delay_of(schedule: Schedule) -> int:
    return len(schedule.slots)


def reverse_schedule(schedule: Schedule) -> Schedule:
    if schedule.direction != CONSTRUCTION:
        raise ScheduleError(
            f"reverse_schedule expects a {CONSTRUCTION} schedule, got {schedule.direction}"
        )
    return Schedule(slots=schedule.slots[::-1], direction=TRANSMISSION)


def unreverse_schedule(schedule: Schedule) -> Schedule:
    """Inverse of reverse_schedule (transmission order back to construction order)."""
    if schedule.direction != TRANSMISSION:
        raise ScheduleError(
            f"unreverse_schedule expects a {TRANSMISSION} schedule, got {schedule.direction}"
        )
    return Schedule(slots=schedule.slots[::-1], direction=CONSTRUCTION)


def validate_schedule(schedule: Schedule, adjacency: Adjacency) -> ValidationReport:
    """Check a transmission-order schedule exhaustively; never raises on bad content.

    Checks run in this order: links are edges, one sender per receiver per
    slot, no sender adjacent to another pair's receiver, receivers transmit
    strictly later than they receive, every sensor sends exactly once.
    """
    if schedule.direction != TRANSMISSION:
        raise ScheduleError(f"validate_schedule expects a {TRANSMISSION} schedule")
    n = len(adjacency)
    report = ValidationReport()
    add = report.violations.append

    for t, slot in enumerate(schedule.slots, start=1):
        for s, r in slot:
            if not (0 <= s < n and 0 <= r < n) or r not in adjacency[s]:
                add(Violation(t, "non-edge-link", (s, r)))

    for t, slot in enumerate(schedule.slots, start=1):
        senders_at: dict[int, list[int]] = {}
        for s, r in slot:
            senders_at.setdefault(r, []).append(s)
        for r, senders in senders_at.items():
            if len(senders) > 1:
                add(Violation(t, "multi-sender-per-receiver", (r, *senders)))

    for t, slot in enumerate(schedule.slots, start=1):
        for s, r in slot:
            if not 0 <= r < n:
                continue
            for s2, r2 in slot:
                # same-receiver conflicts are already reported above
                if s2 != s and r2 != r and 0 <= s2 < n and r in adjacency[s2]:
                    add(Violation(t, "neighbor-interference", (r, s2)))

    send_slot = schedule.sender_slots()
    for t, slot in enumerate(schedule.slots, start=1):
        for s, r in slot:
            if s == SINK:
                add(Violation(t, "dependency", (s,)))
            if r == SINK:
                continue
            tr = send_slot.get(r)
            if tr is None or tr <= t:
                add(Violation(t, "dependency", (s, r)))

    counts: dict[int, int] = {}
    for s, _ in schedule.pairs():
        counts[s] = counts.get(s, 0) + 1
    for s in sorted(counts):
        if counts[s] > 1:
            add(Violation(None, "duplicate-sender", (s,)))
    for u in range(n):
        if u != SINK and u not in counts:
            add(Violation(None, "missing-node", (u,)))
    return report


def schedule_to_tree(schedule: Schedule, adjacency: Adjacency) -> dict[int, int]:
    """Parent map (sender -> aggregator) of the aggregation tree a schedule induces."""
    report = validate_schedule(schedule, adjacency)
    if not report.valid:
        raise ScheduleError(f"schedule is invalid; run validate_schedule first\n{report}")
    return {s: r for s, r in schedule.pairs()}


def schedule_to_dict(schedule: Schedule) -> dict:
    return {
        "direction": schedule.direction,
        "slots": [[{"sender": s, "aggregator": r} for s, r in slot] for slot in schedule.slots],
    }


def schedule_from_dict(doc: dict) -> Schedule:
    try:
        direction = doc["direction"]
        slots = [[(p["sender"], p["aggregator"]) for p in slot] for slot in doc["slots"]]
    except (KeyError, TypeError) as exc:
        raise ScheduleError(f"malformed schedule document: missing {exc}") from exc
    return Schedule(slots=tuple(tuple(slot) for slot in slots), direction=direction)


def save_schedule(schedule: Schedule, destination) -> None:
    Path(destination).write_text(json.dumps(schedule_to_dict(schedule), indent=1) + "\n")


def load_schedule(source) -> Schedule:
    try:
        doc = json.loads(Path(source).read_text())
    except json.JSONDecodeError as exc:
        raise ScheduleError(f"not a valid schedule document: {exc}") from exc
    return schedule_from_dict(doc)
