"""Exact solver for the block-assignment program, plus an enumeration oracle.

The branch-and-bound search assigns free model vertices one at a time. A
node is pruned when a block would overflow, when the remaining vertex weight
cannot fit into the residual capacities, or when the partial cut plus an
admissible bound reaches the incumbent. The bound charges every unassigned
vertex its cheapest cut contribution towards already assigned neighbors
over the blocks that can still take it.

At an optimum of the binary program an edge variable is one exactly when its
endpoints differ, so searching block assignments directly is equivalent.
"""

from __future__ import annotations

import logging
import math
import random
import time
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import CapExceededError
from .ilp import IlpInstance

logger = logging.getLogger(__name__)

DEFAULT_TIME_LIMIT = 60.0
DEFAULT_ENUMERATION_CAP = 10**7


class SolveStatus(str, Enum):
    OPTIMAL = "Optimal"
    FEASIBLE_TIME_LIMIT = "FeasibleTimeLimit"
    NO_IMPROVEMENT = "NoImprovement"
    INFEASIBLE = "Infeasible"
    # time limit reached before any feasible assignment was known
    TIME_LIMIT_NO_SOLUTION = "TimeLimitNoSolution"


class BranchOrder(str, Enum):
    DEGREE_DESCENDING = "degree"
    INSERTION_ORDER = "insertion"


@dataclass
class SolverConfig:
    time_limit: float = DEFAULT_TIME_LIMIT  # seconds, 0 = unlimited
    branch_order: BranchOrder = BranchOrder.DEGREE_DESCENDING
    seed: int | None = None  # shuffles equal-degree vertices when set
    node_limit: int | None = None

    def __post_init__(self):
        if self.time_limit < 0:
            raise ValueError("time_limit must be >= 0")


@dataclass
class SolveStats:
    nodes: int = 0
    pruned_bound: int = 0
    pruned_balance: int = 0
    pruned_capacity: int = 0
    wall_time: float = 0.0
    timed_out: bool = False
    incumbent_trace: list[tuple[float, float]] = field(default_factory=list)


@dataclass
class SolveResult:
    status: SolveStatus
    assignment: np.ndarray | None
    objective: float | None
    stats: SolveStats

    def to_dict(self) -> dict:
        return {
            "status": self.status.value,
            "objective": self.objective,
            "nodes": self.stats.nodes,
            "time": self.stats.wall_time,
        }


def _tol(x: float) -> float:
    return 1e-9 * max(1.0, abs(x))


class SearchState:
    """Partial assignment with incremental cut and connectivity bookkeeping."""

    def __init__(self, inst: IlpInstance):
        self.inst = inst
        n, k = inst.n_vertices, inst.k
        self.n, self.k = n, k
        self.cap = float(inst.l_max)
        self.c = [float(w) for w in inst.vertex_weights]
        self.adj: list[list[tuple[int, float]]] = [[] for _ in range(n)]
        for u, v, w in inst.edges:
            self.adj[u].append((v, w))
            self.adj[v].append((u, w))
        self.block = [-1] * n
        self.bw = [0.0] * k
        self.conn = [[0.0] * k for _ in range(n)]  # weight to assigned vertices per block
        self.att = [0.0] * n  # weight to all assigned neighbors
        self.partial = float(inst.offset)
        self.unassigned_weight = sum(self.c)

    def cost(self, v: int, b: int) -> float:
        return self.att[v] - self.conn[v][b]

    def assign(self, v: int, b: int) -> None:
        self.partial += self.att[v] - self.conn[v][b]
        self.bw[b] += self.c[v]
        self.unassigned_weight -= self.c[v]
        self.block[v] = b
        conn, att = self.conn, self.att
        for u, w in self.adj[v]:
            conn[u][b] += w
            att[u] += w

    def unassign(self, v: int) -> None:
        b = self.block[v]
        conn, att = self.conn, self.att
        for u, w in self.adj[v]:
            conn[u][b] -= w
            att[u] -= w
        self.block[v] = -1
        self.unassigned_weight += self.c[v]
        self.bw[b] -= self.c[v]
        self.partial -= self.att[v] - self.conn[v][b]

    def capacity_ok(self) -> bool:
        residual = sum(self.cap - w for w in self.bw if w < self.cap)
        return self.unassigned_weight <= residual + _tol(residual)

    def lower_bound(self, pending: list[int]) -> float:
        """Admissible bound on the cut added by assigning ``pending``.

        Returns ``inf`` when some pending vertex fits in no block.
        """
        bw, cap, conn, att, c = self.bw, self.cap, self.conn, self.att, self.c
        min_bw = min(bw)
        k = self.k
        total = 0.0
        for v in pending:
            cv = c[v]
            if att[v] == 0.0:
                if min_bw + cv > cap:
                    return math.inf
                continue
            row = conn[v]
            a = att[v]
            best = math.inf
            for b in range(k):
                if bw[b] + cv <= cap:
                    x = a - row[b]
                    if x < best:
                        best = x
            if best == math.inf:
                return math.inf
            total += best
        return total


class _BranchAndBound:
    def __init__(self, inst: IlpInstance, cfg: SolverConfig, use_bound: bool = True, first_only: bool = False):
        self.inst = inst
        self.cfg = cfg
        self.first_only = first_only
        self.limit = inst.objective_limit if use_bound else None
        self.stats = SolveStats()
        self.state = SearchState(inst)
        self.order = self._branch_order()
        self.best_obj = math.inf
        self.best: list[int] | None = None
        self.start = time.perf_counter()
        if use_bound and inst.warm_start is not None and inst.is_feasible(inst.warm_start):
            self._record(inst.objective(inst.warm_start), [int(b) for b in inst.warm_start])

    def _branch_order(self) -> list[int]:
        free = self.inst.free_vertices
        if self.cfg.branch_order is BranchOrder.INSERTION_ORDER:
            return free
        deg = {v: len(self.state.adj[v]) for v in free}
        if self.cfg.seed is not None:
            random.Random(self.cfg.seed).shuffle(free)
            return sorted(free, key=lambda v: -deg[v])
        return sorted(free, key=lambda v: (-deg[v], v))

    def _record(self, obj: float, assignment: list[int]) -> None:
        self.best_obj = obj
        self.best = assignment
        self.stats.incumbent_trace.append((time.perf_counter() - self.start, obj))

    def _out_of_budget(self) -> bool:
        cfg = self.cfg
        if cfg.node_limit is not None and self.stats.nodes >= cfg.node_limit:
            return True
        return cfg.time_limit > 0 and time.perf_counter() - self.start > cfg.time_limit

    def _hopeless(self, value: float) -> bool:
        """True if no completion with objective ``>= value`` can be accepted."""
        if self.best is not None and value >= self.best_obj - _tol(self.best_obj):
            return True
        return self.limit is not None and value > self.limit + _tol(self.limit)

    def _candidates(self, v: int) -> list[int]:
        s = self.state
        cv, cap, bw = s.c[v], s.cap, s.bw
        fits = [b for b in range(s.k) if bw[b] + cv <= cap]
        self.stats.pruned_balance += s.k - len(fits)
        fits.sort(key=lambda b: (s.cost(v, b), b))
        return fits

    def _leaf(self) -> None:
        s = self.state
        obj = s.partial
        if not self._hopeless(obj):
            self._record(obj, s.block[:])

    def run(self) -> None:
        s = self.state
        for v, b in sorted(self.inst.fixed.items()):
            s.assign(v, b)
        if any(w > s.cap for w in s.bw):
            return
        order = self.order
        depth_max = len(order)
        if depth_max == 0:
            self._leaf()
            return
        if not s.capacity_ok() or self._hopeless(s.partial + s.lower_bound(order)):
            return
        if self._out_of_budget():
            self.stats.timed_out = True
            return
        # frames: [depth, candidate blocks, next index, child assigned?]
        stack = [[0, self._candidates(order[0]), 0, False]]
        while stack:
            frame = stack[-1]
            d = frame[0]
            v = order[d]
            if frame[3]:
                s.unassign(v)
                frame[3] = False
            if frame[2] == len(frame[1]):
                stack.pop()
                continue
            b = frame[1][frame[2]]
            frame[2] += 1
            if self._out_of_budget():
                self.stats.timed_out = True
                break
            s.assign(v, b)
            frame[3] = True
            self.stats.nodes += 1
            if d + 1 == depth_max:
                self._leaf()
                if self.first_only and self.best is not None:
                    break
                continue
            if not s.capacity_ok():
                self.stats.pruned_capacity += 1
                continue
            bound = s.lower_bound(order[d + 1 :])
            if bound == math.inf:
                self.stats.pruned_balance += 1
                continue
            if self._hopeless(s.partial + bound):
                self.stats.pruned_bound += 1
                continue
            stack.append([d + 1, self._candidates(order[d + 1]), 0, False])
        # leave the state clean for callers that inspect it
        for frame in reversed(stack):
            if frame[3]:
                s.unassign(order[frame[0]])


def solve(inst: IlpInstance, cfg: SolverConfig | None = None) -> SolveResult:
    """Branch-and-bound over block assignments of the free model vertices."""
    cfg = cfg or SolverConfig()
    bb = _BranchAndBound(inst, cfg)
    bb.run()
    stats = bb.stats
    found = bb.best is not None
    if stats.timed_out:
        status = SolveStatus.FEASIBLE_TIME_LIMIT if found else SolveStatus.TIME_LIMIT_NO_SOLUTION
    elif found:
        status = SolveStatus.OPTIMAL
    elif inst.objective_limit is not None and _has_feasible(inst, cfg, bb.start):
        status = SolveStatus.NO_IMPROVEMENT
    else:
        status = SolveStatus.INFEASIBLE
    stats.wall_time = time.perf_counter() - bb.start
    assignment = np.array(bb.best, dtype=np.int64) if found else None
    objective = bb.best_obj if found else None
    if found:
        # report the objective recomputed from scratch, not the incremental sum
        objective = inst.objective(assignment)
    logger.debug(
        "solve: %s objective=%s nodes=%d time=%.3fs",
        status.value,
        objective,
        stats.nodes,
        stats.wall_time,
    )
    return SolveResult(status, assignment, objective, stats)


def _has_feasible(inst: IlpInstance, cfg: SolverConfig, start: float) -> bool:
    """Does any balanced assignment exist, ignoring the objective bound?"""
    if inst.warm_start is not None and inst.is_feasible(inst.warm_start, with_bound=False):
        return True
    remaining = 0.0
    if cfg.time_limit > 0:
        remaining = max(cfg.time_limit - (time.perf_counter() - start), 1e-9)
    probe_cfg = SolverConfig(time_limit=remaining, branch_order=cfg.branch_order, seed=cfg.seed)
    probe = _BranchAndBound(inst, probe_cfg, use_bound=False, first_only=True)
    probe.run()
    # an unfinished probe gives no proof of infeasibility; report no improvement
    return probe.best is not None or probe.stats.timed_out


# -------------------------------------------------------------------- oracle


def _set_partition_count(length: int, k: int) -> int:
    """Number of ways to split ``length`` labelled items into at most ``k`` blocks."""
    row = [1] + [0] * k  # row[j]: Stirling numbers S(i, j)
    for _ in range(length):
        row = [0] + [j * row[j] + row[j - 1] for j in range(1, k + 1)]
    return sum(row) if length else 1


def _restricted_growth(length: int, k: int) -> np.ndarray:
    """All labelings where each item uses at most one block beyond those seen before it."""
    rows = np.zeros((1, 0), dtype=np.int8)
    top = np.full(1, -1, dtype=np.int8)
    for _ in range(length):
        vals = np.tile(np.arange(k, dtype=np.int8), len(rows))
        prev_top = np.repeat(top, k)
        keep = vals <= prev_top + 1
        rows = np.hstack([np.repeat(rows, k, axis=0)[keep], vals[keep, None]])
        top = np.maximum(prev_top[keep], vals[keep])
    return rows


def solve_exhaustive(inst: IlpInstance, cap: int = DEFAULT_ENUMERATION_CAP) -> SolveResult:
    """Enumerate every assignment of the free vertices.

    Two exact reductions keep the enumeration small: a free vertex with zero
    weight and no edge variables cannot change objective or balance, so it
    is placed in block 0; and without fixed vertices all blocks are
    interchangeable, so only one labeling per set partition is visited.
    """
    start = time.perf_counter()
    n, k = inst.n_vertices, inst.k
    c = np.asarray(inst.vertex_weights, dtype=np.float64)
    touched = np.zeros(n, dtype=bool)
    for u, v, _ in inst.edges:
        touched[u] = touched[v] = True
    base = np.zeros(n, dtype=np.int64)
    for v, b in inst.fixed.items():
        base[v] = b
    free = [v for v in inst.free_vertices if touched[v] or c[v] != 0]
    symmetric = not inst.fixed
    total = _set_partition_count(len(free), k) if symmetric else k ** len(free)
    if total > cap:
        raise CapExceededError(f"{total} assignments of {len(free)} free vertices exceed the cap {cap}")
    if symmetric:
        labelings = _restricted_growth(len(free), k)
    else:
        powers = k ** np.arange(len(free), dtype=np.int64)

    us = np.array([e[0] for e in inst.edges], dtype=np.int64)
    vs = np.array([e[1] for e in inst.edges], dtype=np.int64)
    ws = np.array([e[2] for e in inst.edges], dtype=np.float64)
    limit = inst.objective_limit
    best_obj = math.inf
    best = None
    any_balanced = False
    chunk = 1 << 18
    for lo in range(0, total, chunk):
        hi = min(lo + chunk, total)
        full = np.broadcast_to(base, (hi - lo, n)).copy()
        if free:
            if symmetric:
                full[:, free] = labelings[lo:hi]
            else:
                idx = np.arange(lo, hi, dtype=np.int64)
                full[:, free] = (idx[:, None] // powers[None, :]) % k
        obj = inst.offset + (full[:, us] != full[:, vs]).astype(np.float64) @ ws
        loads = np.stack([(full == b).astype(np.float64) @ c for b in range(k)], axis=1)
        balanced = np.all(loads <= inst.l_max, axis=1)
        any_balanced = any_balanced or bool(balanced.any())
        ok = balanced
        if limit is not None:
            ok = ok & (obj <= limit + _tol(limit))
        if ok.any():
            i = int(np.argmin(np.where(ok, obj, np.inf)))
            if obj[i] < best_obj:
                best_obj = float(obj[i])
                best = full[i].copy()
    stats = SolveStats(nodes=total, wall_time=time.perf_counter() - start)
    if best is not None:
        return SolveResult(SolveStatus.OPTIMAL, best, best_obj, stats)
    status = SolveStatus.NO_IMPROVEMENT if limit is not None and any_balanced else SolveStatus.INFEASIBLE
    return SolveResult(status, None, None, stats)
