"""Static unit-disk-graph topologies: generation, adjacency, persistence.

Random topologies are drawn with NumPy's PCG64 bit generator
(``numpy.random.default_rng(seed)``). Sensor coordinates come from a single
``rng.random((n_sensors, 2))`` call, i.e. in row-major order ``x1, y1, x2,
y2, ...`` (x then y, node id ascending), scaled by the area width/height. A
draw that is not connected is discarded and all sensor positions are redrawn
from the same stream.
"""

from __future__ import annotations

import json
import math
from collections import deque
from dataclasses import dataclass
from pathlib import Path

import numpy as np

SINK = 0
TOPOLOGY_FILE_VERSION = 1

Adjacency = tuple[frozenset[int], ...]


class TopologyError(ValueError):
    """Raised for malformed topology files or invalid topology values."""


class DisconnectedTopologyError(TopologyError):
    pass


@dataclass(frozen=True)
class Topology:
    """Node positions, communication range and deployment area.

    ``coords[i]`` is the ``(x, y)`` position of node ``i``; node 0 is the sink.
    """

    coords: tuple[tuple[float, float], ...]
    range_R: float
    area: tuple[float, float] = (100.0, 100.0)
    sink_id: int = SINK

    def __post_init__(self):
        if self.sink_id != SINK:
            raise TopologyError(f"sink_id must be {SINK}, got {self.sink_id}")
        if not self.coords:
            raise TopologyError("nodes: at least the sink is required")
        if not self.range_R > 0:
            raise TopologyError(f"range_R must be positive, got {self.range_R}")
        width, height = self.area
        if not (width > 0 and height > 0):
            raise TopologyError(f"area must be positive, got {self.area}")
        for i, (x, y) in enumerate(self.coords):
            if not (0.0 <= x <= width and 0.0 <= y <= height):
                raise TopologyError(
                    f"nodes[{i}]: coordinate ({x}, {y}) outside [0, {width}] x [0, {height}]"
                )

    @property
    def n_nodes(self) -> int:
        return len(self.coords)

    @property
    def n_sensors(self) -> int:
        return len(self.coords) - 1


def build_adjacency(topology: Topology) -> Adjacency:
    """Closed-disk neighbor sets: ``v in N(u)`` iff ``dist(u, v) <= R``."""
    pts = np.asarray(topology.coords, dtype=float).reshape(-1, 2)
    dx = pts[:, 0][:, None] - pts[:, 0][None, :]
    dy = pts[:, 1][:, None] - pts[:, 1][None, :]
    within = np.hypot(dx, dy) <= topology.range_R
    np.fill_diagonal(within, False)
    return tuple(frozenset(np.flatnonzero(row).tolist()) for row in within)


def hop_distances(adjacency: Adjacency, sources=(SINK,)) -> list[int]:
    """Multi-source BFS hop counts; unreachable nodes get -1."""
    dist = [-1] * len(adjacency)
    queue = deque()
    for s in sources:
        dist[s] = 0
        queue.append(s)
    while queue:
        u = queue.popleft()
        for v in adjacency[u]:
            if dist[v] < 0:
                dist[v] = dist[u] + 1
                queue.append(v)
    return dist


def is_connected(adjacency: Adjacency) -> bool:
    if not adjacency:
        return True
    return min(hop_distances(adjacency)) >= 0


def sink_eccentricity(adjacency: Adjacency) -> int:
    """Largest hop distance from the sink; a lower bound on any schedule's delay."""
    dist = hop_distances(adjacency)
    if min(dist) < 0:
        raise DisconnectedTopologyError("topology is not connected")
    return max(dist)


def sink_position(kind: str, area: tuple[float, float]) -> tuple[float, float]:
    if kind == "center":
        return (area[0] / 2.0, area[1] / 2.0)
    if kind == "corner":
        return (0.0, 0.0)
    raise ValueError(f"sink position must be 'center' or 'corner', got {kind!r}")


def generate_topology(
    n_sensors: int,
    area: tuple[float, float] = (100.0, 100.0),
    range_R: float = 20.0,
    sink_position_kind: str = "center",
    seed: int = 0,
    max_attempts: int = 1000,
) -> Topology:
    """Draw a connected random topology with ``n_sensors`` sensors plus the sink.

    Raises DisconnectedTopologyError if ``max_attempts`` draws all fail to
    connect, which signals a density too low for the chosen range.
    """
    if n_sensors < 1:
        raise ValueError(f"n_sensors must be >= 1, got {n_sensors}")
    width, height = float(area[0]), float(area[1])
    sink_xy = sink_position(sink_position_kind, (width, height))
    rng = np.random.default_rng(seed)
    for _ in range(max_attempts):
        draw = rng.random((n_sensors, 2)) * np.array([width, height])
        coords = (sink_xy,) + tuple((float(x), float(y)) for x, y in draw)
        topo = Topology(coords=coords, range_R=float(range_R), area=(width, height))
        if is_connected(build_adjacency(topo)):
            return topo
    raise DisconnectedTopologyError(
        f"no connected topology after {max_attempts} attempts "
        f"(n_sensors={n_sensors}, range_R={range_R}, area={area})"
    )


def topology_to_dict(topology: Topology) -> dict:
    return {
        "version": TOPOLOGY_FILE_VERSION,
        "area": {"width": topology.area[0], "height": topology.area[1]},
        "range_R": topology.range_R,
        "sink_id": topology.sink_id,
        "nodes": [{"id": i, "x": x, "y": y} for i, (x, y) in enumerate(topology.coords)],
    }


def _field(doc: dict, name: str, where: str = ""):
    if not isinstance(doc, dict) or name not in doc:
        raise TopologyError(f"missing field '{where}{name}'")
    return doc[name]


def _number(value, name: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise TopologyError(f"field '{name}' must be a finite number, got {value!r}")
    return float(value)


def topology_from_dict(doc: dict) -> Topology:
    version = _field(doc, "version")
    if version != TOPOLOGY_FILE_VERSION:
        raise TopologyError(f"field 'version': unsupported value {version!r}")
    area = _field(doc, "area")
    width = _number(_field(area, "width", "area."), "area.width")
    height = _number(_field(area, "height", "area."), "area.height")
    range_R = _number(_field(doc, "range_R"), "range_R")
    sink_id = _field(doc, "sink_id")
    nodes = _field(doc, "nodes")
    if not isinstance(nodes, list):
        raise TopologyError("field 'nodes' must be a list")
    coords = []
    for i, node in enumerate(nodes):
        node_id = _field(node, "id", f"nodes[{i}].")
        if node_id != i:
            raise TopologyError(f"field 'nodes[{i}].id': expected {i}, got {node_id!r}")
        x = _number(_field(node, "x", f"nodes[{i}]."), f"nodes[{i}].x")
        y = _number(_field(node, "y", f"nodes[{i}]."), f"nodes[{i}].y")
        coords.append((x, y))
    return Topology(coords=tuple(coords), range_R=range_R, area=(width, height), sink_id=sink_id)


def save_topology(topology: Topology, destination) -> None:
    # json writes floats via repr(), which round-trips doubles exactly
    Path(destination).write_text(json.dumps(topology_to_dict(topology), indent=2) + "\n")


def load_topology(source) -> Topology:
    try:
        doc = json.loads(Path(source).read_text())
    except json.JSONDecodeError as exc:
        raise TopologyError(f"not a valid topology document: {exc}") from exc
    return topology_from_dict(doc)
