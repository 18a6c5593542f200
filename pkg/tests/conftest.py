import itertools
import random

import numpy as np
import pytest

from ilprefine import Graph, Partition


def random_graph(n, p, seed, max_weight=1, vertex_weights=False):
    rng = random.Random(seed)
    edges = [
        (u, v, rng.randint(1, max_weight))
        for u, v in itertools.combinations(range(n), 2)
        if rng.random() < p
    ]
    vw = [rng.randint(1, 3) for _ in range(n)] if vertex_weights else None
    return Graph.from_edges(n, edges, vw)


def random_partition(g, k, seed, epsilon=0.0):
    rng = np.random.default_rng(seed)
    return Partition.from_assignment(g, rng.integers(0, k, g.n), k, epsilon)


def brute_force_cut(g, assignment):
    """Cut value straight from the edge list."""
    return sum(w for u, v, w in g.edges() if assignment[u] != assignment[v])


def brute_force_optimum(g, k, epsilon):
    """Minimum cut over all balanced assignments (k^n enumeration)."""
    from ilprefine import l_max

    cap = l_max(g, k, epsilon)
    best = None
    for a in itertools.product(range(k), repeat=g.n):
        loads = [0.0] * k
        for v, b in enumerate(a):
            loads[b] += g.vwgt[v]
        if max(loads) > cap:
            continue
        cut = brute_force_cut(g, a)
        if best is None or cut < best:
            best = cut
    return best


@pytest.fixture
def path3():
    return Graph.from_edges(3, [(0, 1, 1), (1, 2, 1)])


@pytest.fixture
def path5():
    return Graph.from_edges(5, [(i, i + 1, 1) for i in range(4)])


@pytest.fixture
def k4():
    return Graph.from_edges(4, [(u, v, 1) for u, v in itertools.combinations(range(4), 2)])


@pytest.fixture
def c4():
    return Graph.from_edges(4, [(i, (i + 1) % 4, 1) for i in range(4)])


@pytest.fixture
def star3():
    # center 0 with leaves 1, 2, 3
    return Graph.from_edges(4, [(0, 1, 1), (0, 2, 1), (0, 3, 1)])


def pytest_terminal_summary(terminalreporter):
    import sys

    module = sys.modules.get("test_acceptance")
    if module is None or not module.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(module.RESULTS):
        verdict, title, detail = module.RESULTS[number]
        line = f"criterion {number}: {verdict} {title}"
        terminalreporter.write_line(f"{line} ({detail})" if detail else line)
