import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ilprefine import (
    CapExceededError,
    IlpInstance,
    IlpOptions,
    Partition,
    SolverConfig,
    SolveStatus,
    build_ilp,
    build_model,
    solve,
    solve_exhaustive,
)
from ilprefine.solver import BranchOrder, SearchState, _BranchAndBound, _set_partition_count

from conftest import brute_force_optimum, random_graph, random_partition

BASIC = IlpOptions.preset("Basic")


def full_model(g, k, eps, options=BASIC, assignment=None):
    a = assignment if assignment is not None else [i % k for i in range(g.n)]
    p = Partition.from_assignment(g, a, k, eps)
    return build_ilp(build_model(g, p, list(range(g.n))), options)


def enumerate_completions(inst, partial):
    """Objectives of every balanced completion of ``partial`` (dict v -> block)."""
    free = [v for v in range(inst.n_vertices) if v not in partial]
    out = []
    for combo in itertools.product(range(inst.k), repeat=len(free)):
        a = np.zeros(inst.n_vertices, dtype=np.int64)
        for v, b in partial.items():
            a[v] = b
        a[free] = combo
        if inst.is_feasible(a, with_bound=False):
            out.append(inst.objective(a))
    return out


def test_path_optimum(path3):
    res = solve(full_model(path3, 2, 0.0))
    assert res.status is SolveStatus.OPTIMAL and res.objective == 1


def test_k4_optimum(k4):
    res = solve(full_model(k4, 2, 0.0))
    assert res.status is SolveStatus.OPTIMAL and res.objective == 4


def test_path_model_oracle(path3):
    p = Partition.from_assignment(path3, [0, 0, 1], 2)
    inst = build_ilp(build_model(path3, p, [1, 2]), IlpOptions.preset("BasicSym"))
    res = solve_exhaustive(inst)
    assert res.stats.nodes == 4
    assert res.objective == 1


def test_no_free_vertices(c4):
    p = Partition.from_assignment(c4, [0, 1, 0, 1], 2)
    inst = build_ilp(build_model(c4, p, []), IlpOptions.preset("BasicSym"))
    assert solve_exhaustive(inst).objective == 4 == inst.offset


@pytest.mark.parametrize("seed", range(50))
def test_random_graphs_against_brute_force(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(3, 11))
    k = [2, 3][seed % 2]
    eps = [0.0, 0.1][(seed // 2) % 2]
    g = random_graph(n, 0.4, seed, max_weight=3)
    res = solve(full_model(g, k, eps))
    assert res.status is SolveStatus.OPTIMAL
    assert res.objective == brute_force_optimum(g, k, eps)


@given(st.integers(0, 10**6), st.sampled_from(["Basic", "BasicSym", "BasicSymSSol", "BSSSConst=", "BSSSConst<"]))
@settings(max_examples=60, deadline=None)
def test_matches_oracle_on_models(seed, preset):
    rng = np.random.default_rng(seed)
    g = random_graph(int(rng.integers(5, 14)), 0.3, seed, max_weight=3, vertex_weights=True)
    k = int(rng.integers(2, 4))
    p = random_partition(g, k, seed, epsilon=2.0)
    kept = rng.permutation(g.n)[: int(rng.integers(0, 8))].tolist()
    inst = build_ilp(build_model(g, p, kept), IlpOptions.preset(preset))
    ours, oracle = solve(inst), solve_exhaustive(inst)
    assert ours.status == oracle.status
    assert ours.objective == oracle.objective
    if ours.assignment is not None:
        assert inst.is_feasible(ours.assignment)
    if inst.warm_start is not None and ours.objective is not None:
        assert ours.objective <= inst.warm_start_objective


def test_tiny_time_limit_returns_warm_start():
    g = random_graph(40, 0.2, 1)
    p = random_partition(g, 2, 1, epsilon=0.5)
    inst = build_ilp(build_model(g, p, list(range(40))), IlpOptions.preset("BasicSymSSol"))
    res = solve(inst, SolverConfig(time_limit=1e-6))
    assert res.status is SolveStatus.FEASIBLE_TIME_LIMIT
    assert res.objective == p.cut
    assert res.stats.timed_out


def test_time_limit_without_warm_start():
    g = random_graph(40, 0.2, 1)
    inst = full_model(g, 2, 0.5)
    res = solve(inst, SolverConfig(time_limit=1e-9))
    assert res.status is SolveStatus.TIME_LIMIT_NO_SOLUTION
    assert res.assignment is None


def test_node_limit_keeps_best_so_far():
    g = random_graph(30, 0.3, 7)
    p = random_partition(g, 2, 7, epsilon=0.2)
    inst = build_ilp(build_model(g, p, list(range(30))), IlpOptions.preset("BasicSymSSol"))
    res = solve(inst, SolverConfig(time_limit=0, node_limit=200))
    assert res.status is SolveStatus.FEASIBLE_TIME_LIMIT
    assert inst.is_feasible(res.assignment)
    assert res.objective <= p.cut


def test_infeasible_instance():
    inst = IlpInstance(k=2, l_max=2.0, vertex_weights=np.array([3.0, 1.0]), edges=((0, 1, 1.0),))
    assert solve(inst).status is SolveStatus.INFEASIBLE
    assert solve_exhaustive(inst).status is SolveStatus.INFEASIBLE


def test_strict_bound_at_optimum():
    g = random_graph(8, 0.5, 3)
    opt = brute_force_optimum(g, 2, 0.0)
    inst = full_model(g, 2, 0.0)
    from ilprefine import ObjectiveBound, add_objective_bound

    bounded = add_objective_bound(inst, ObjectiveBound.STRICTLY_LESS, opt)
    assert solve(bounded).status is SolveStatus.NO_IMPROVEMENT
    assert solve_exhaustive(bounded).status is SolveStatus.NO_IMPROVEMENT


def test_enumeration_cap():
    inst = full_model(random_graph(30, 0.2, 0), 3, 0.5)
    with pytest.raises(CapExceededError):
        solve_exhaustive(inst)
    with pytest.raises(CapExceededError):
        solve_exhaustive(full_model(random_graph(8, 0.4, 0), 3, 0.5), cap=100)


def test_set_partition_count():
    # Bell-type sums of Stirling numbers of the second kind
    assert _set_partition_count(0, 3) == 1
    assert _set_partition_count(4, 4) == 15
    assert _set_partition_count(12, 4) == 700075
    assert _set_partition_count(5, 2) == 16


def test_config_validation():
    with pytest.raises(ValueError):
        SolverConfig(time_limit=-1)


@pytest.mark.parametrize("seed", range(15))
def test_lower_bound_is_admissible(seed):
    rng = np.random.default_rng(seed)
    g = random_graph(7, 0.5, seed, max_weight=3, vertex_weights=True)
    k = int(rng.integers(2, 4))
    inst = full_model(g, k, 0.3)
    state = SearchState(inst)
    order = list(range(inst.n_vertices))
    # walk a few random partial assignments and compare against all completions
    for _ in range(6):
        depth = int(rng.integers(0, inst.n_vertices))
        partial = {v: int(rng.integers(k)) for v in order[:depth]}
        for v, b in partial.items():
            state.assign(v, b)
        if all(w <= inst.l_max for w in state.bw):
            completions = enumerate_completions(inst, partial)
            bound = state.partial + state.lower_bound(order[depth:])
            if completions:
                assert bound <= min(completions) + 1e-9
        for v in reversed(list(partial)):
            state.unassign(v)
        assert state.partial == 0 and all(w == 0 for w in state.bw)


@given(st.integers(0, 10**6))
@settings(max_examples=30, deadline=None)
def test_incumbent_trace_is_monotone(seed):
    g = random_graph(14, 0.35, seed, max_weight=2)
    p = random_partition(g, 3, seed, epsilon=1.0)
    inst = build_ilp(build_model(g, p, list(range(14))), IlpOptions.preset("BasicSymSSol"))
    res = solve(inst)
    values = [obj for _, obj in res.stats.incumbent_trace]
    assert values == sorted(values, reverse=True)
    assert values[0] == p.cut
    times = [t for t, _ in res.stats.incumbent_trace]
    assert times == sorted(times)


def test_determinism():
    g = random_graph(16, 0.3, 11, max_weight=3)
    p = random_partition(g, 3, 11, epsilon=0.5)
    inst = build_ilp(build_model(g, p, list(range(16))), IlpOptions.preset("BasicSymSSol"))
    for cfg in (SolverConfig(), SolverConfig(seed=5), SolverConfig(branch_order=BranchOrder.INSERTION_ORDER)):
        a, b = solve(inst, cfg), solve(inst, cfg)
        assert a.stats.nodes == b.stats.nodes
        assert a.assignment.tolist() == b.assignment.tolist()


@pytest.mark.parametrize("seed", range(20))
def test_symmetry_breaking_explores_no_more_nodes(seed):
    rng = np.random.default_rng(seed)
    g = random_graph(14, 0.3, seed)
    p = random_partition(g, 2, seed, epsilon=0.3)
    kept = rng.permutation(14)[:6].tolist()
    m = build_model(g, p, kept)
    sym = build_ilp(m, IlpOptions.preset("BasicSym"))
    plain = build_ilp(m, BASIC)
    a, b = solve(sym), solve(plain)
    assert a.stats.nodes <= b.stats.nodes
    if sym.pairwise_condition:
        assert a.objective == b.objective


def test_insertion_order_agrees():
    g = random_graph(11, 0.4, 9, max_weight=3)
    inst = full_model(g, 3, 0.1)
    a = solve(inst, SolverConfig(branch_order=BranchOrder.INSERTION_ORDER))
    assert a.objective == solve(inst).objective == brute_force_optimum(g, 3, 0.1)


def test_result_dict():
    g = random_graph(6, 0.5, 0)
    res = solve(full_model(g, 2, 0.0))
    d = res.to_dict()
    assert d["status"] == "Optimal" and d["nodes"] == res.stats.nodes
    assert math.isfinite(d["time"])


def test_state_is_restored_after_search():
    g = random_graph(10, 0.4, 2)
    inst = full_model(g, 2, 0.0)
    bb = _BranchAndBound(inst, SolverConfig(time_limit=0, node_limit=15))
    bb.run()
    assert all(b == -1 for b in bb.state.block)
