import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ilprefine import (
    Graph,
    Partition,
    build_model,
    cut_value,
    induced_model_partition,
    project_solution,
)
from ilprefine.coarse import write_model

from conftest import random_graph, random_partition


def model_of_path(path3):
    p = Partition.from_assignment(path3, [0, 0, 1], 2)
    return p, build_model(path3, p, [1, 2])


def test_path_contraction(path3):
    p, m = model_of_path(path3)
    assert m.n_model == 4
    assert m.model_graph.vwgt.tolist() == [1, 0, 1, 1]
    assert m.model_graph.edges() == [(0, 2, 1.0), (2, 3, 1.0)]
    induced = induced_model_partition(m)
    assert induced.tolist() == [0, 1, 0, 1]
    assert cut_value(m.model_graph, induced) == 1 == p.cut


def test_path_projection(path3):
    _, m = model_of_path(path3)
    q = project_solution(m, [0, 1, 1, 1])
    assert q.assignment.tolist() == [0, 1, 1]
    assert q.cut == 1


def test_keep_everything():
    g = random_graph(10, 0.3, 4, max_weight=3, vertex_weights=True)
    p = random_partition(g, 3, 4)
    m = build_model(g, p, list(range(g.n)))
    assert m.model_graph.vwgt[:3].tolist() == [0, 0, 0]
    assert all(m.model_graph.degree(i) == 0 for i in range(3))
    shifted = [(u + 3, v + 3, w) for u, v, w in g.edges()]
    assert m.model_graph.edges() == shifted
    assert induced_model_partition(m).tolist() == [0, 1, 2] + p.assignment.tolist()


def test_c4_nothing_kept(c4):
    p = Partition.from_assignment(c4, [0, 1, 0, 1], 2)
    m = build_model(c4, p, [])
    assert m.model_graph.edges() == [(0, 1, 4.0)]
    assert cut_value(m.model_graph, induced_model_partition(m)) == 4 == p.cut


def test_empty_block_has_weightless_super_vertex(path3):
    p = Partition.from_assignment(path3, [0, 0, 0], 3)
    m = build_model(path3, p, [])
    assert m.model_graph.vwgt.tolist() == [3, 0, 0]
    assert [len(x) for x in m.interior_members] == [3, 0, 0]


def test_rejects_duplicates(path3):
    p = Partition.from_assignment(path3, [0, 0, 1], 2)
    with pytest.raises(ValueError):
        build_model(path3, p, [1, 1])


def random_instance(seed, n_max=14):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(3, n_max))
    k = int(rng.integers(2, 4))
    g = random_graph(n, 0.35, seed, max_weight=4, vertex_weights=True)
    p = random_partition(g, k, seed)
    size = int(rng.integers(0, n + 1))
    kept = rng.permutation(n)[:size].tolist()
    return g, p, kept


@given(st.integers(0, 10**6))
@settings(max_examples=80, deadline=None)
def test_round_trip_and_conservation(seed):
    g, p, kept = random_instance(seed)
    m = build_model(g, p, kept)
    mg = m.model_graph
    assert mg.n == p.k + len(kept)
    assert mg.total_vertex_weight() == pytest.approx(g.total_vertex_weight())
    internal = sum(
        w for u, v, w in g.edges()
        if p.assignment[u] == p.assignment[v] and u not in kept and v not in kept
    )
    assert mg.total_edge_weight() + internal == pytest.approx(g.total_edge_weight())
    # model edge weight equals the summed original edges between the two sets
    members = {i: set(m.interior_members[i].tolist()) for i in range(p.k)}
    members.update({p.k + j: {v} for j, v in enumerate(kept)})
    for a, b, w in mg.edges():
        expected = sum(ew for u, v, ew in g.edges()
                       if (u in members[a] and v in members[b]) or (u in members[b] and v in members[a]))
        assert w == expected
    induced = induced_model_partition(m)
    assert cut_value(mg, induced) == p.cut
    back = project_solution(m, induced)
    assert back == p


@given(st.integers(0, 10**6))
@settings(max_examples=25, deadline=None)
def test_every_model_assignment_projects_exactly(seed):
    rng = np.random.default_rng(seed)
    k = int(rng.integers(2, 4))
    n = int(rng.integers(k, 10))
    g = random_graph(n, 0.4, seed, max_weight=3, vertex_weights=True)
    p = random_partition(g, k, seed)
    kept = rng.permutation(n)[: 8 - k].tolist()
    m = build_model(g, p, kept)
    assert m.n_model <= 8
    for a in itertools.product(range(k), repeat=m.n_model):
        q = project_solution(m, a)
        assert q.cut == cut_value(m.model_graph, a)
        weights = np.bincount(np.asarray(a), weights=m.model_graph.vwgt, minlength=k)
        assert np.allclose(q.block_weights, weights)


def test_write_model(tmp_path, path3):
    _, m = model_of_path(path3)
    write_model(m, tmp_path / "m.graph", tmp_path / "m.map")
    assert (tmp_path / "m.map").read_text() == "0 mu:0\n1 mu:1\n2 1\n3 2\n"
    from ilprefine import load_graph

    h = load_graph(tmp_path / "m.graph")
    assert h.edges() == m.model_graph.edges()


def test_isolated_vertices_and_weights():
    g = Graph.from_edges(4, [(0, 1, 2.5)], [1, 2, 3, 4])
    p = Partition.from_assignment(g, [0, 1, 0, 1], 2)
    m = build_model(g, p, [3])
    assert m.super_weights.tolist() == [4, 2]
    assert m.model_graph.edges() == [(0, 1, 2.5)]
