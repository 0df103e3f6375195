import itertools

import networkx as nx
import pytest

from anonmatch import build_graph


def nx_maximal_matchings(g):
    """Independent oracle: every edge subset that networkx calls a maximal matching."""
    G = nx.Graph()
    G.add_nodes_from(range(g.n))
    G.add_edges_from(g.edges)
    edges = [tuple(sorted(e)) for e in g.edges]
    out = set()
    for r in range(len(edges) + 1):
        for sub in itertools.combinations(edges, r):
            if nx.is_maximal_matching(G, set(sub)):
                out.add(frozenset(sub))
    return out


@pytest.fixture
def k2():
    return build_graph(2, [(0, 1)])


@pytest.fixture
def p3():
    return build_graph(3, [(0, 1), (1, 2)])


@pytest.fixture
def c4():
    return build_graph(4, [(0, 1), (1, 2), (2, 3), (3, 0)])


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
