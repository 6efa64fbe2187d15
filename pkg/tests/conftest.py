import sys

import pytest

from aggsched.topology import Topology, build_adjacency

# Fig.-3 style example, letters mapped to ids: A=0 (sink), B=1, ... H=7.
A, B, C, D, E, F, G, H = range(8)
FIG3_EDGES = [
    (A, B), (A, C), (B, D), (C, D), (B, E), (C, F), (C, G),
    (D, E), (D, F), (D, G),
    (G, H),  # H hangs off G so the graph is connected; it never touches {A, B, C}
]


def adjacency_from_edges(n, edges):
    nbrs = [set() for _ in range(n)]
    for u, v in edges:
        nbrs[u].add(v)
        nbrs[v].add(u)
    return tuple(frozenset(s) for s in nbrs)


def line_topology(n, spacing=10.0, R=10.0):
    return Topology(coords=tuple((i * spacing, 0.0) for i in range(n)), range_R=R)


@pytest.fixture
def fig3():
    return adjacency_from_edges(8, FIG3_EDGES)


@pytest.fixture
def path3():
    return adjacency_from_edges(3, [(0, 1), (1, 2)])


@pytest.fixture
def path4():
    return adjacency_from_edges(4, [(0, 1), (1, 2), (2, 3)])


@pytest.fixture
def star3():
    return adjacency_from_edges(4, [(0, 1), (0, 2), (0, 3)])


@pytest.fixture
def triangle():
    return adjacency_from_edges(3, [(0, 1), (0, 2), (1, 2)])


def topology_for(adjacency):
    """Placeholder coordinates for graph-only tests (adjacency is passed explicitly)."""
    n = len(adjacency)
    return Topology(coords=tuple((float(i), 0.0) for i in range(n)), range_R=1.0, area=(max(n, 1), 1.0))


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
