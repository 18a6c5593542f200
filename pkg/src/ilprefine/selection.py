"""Selection of the kept vertex set K under a non-zero budget.

Three strategies grow K around the cut of the input partition: ``boundary``
(random boundary vertices, then BFS), ``gain:<rho>`` (BFS from boundary
vertices with gain >= rho) and ``topvertices:<delta>`` (hop balls of radius
delta around boundary vertices in decreasing gain order). Every insertion is
checked against the non-zero count of the binary program that the resulting
coarse model would produce; selection stops before the first insertion that
would push the count above the budget.
"""

from __future__ import annotations

import logging
import math
import random
from collections import deque
from dataclasses import dataclass, field
from enum import Enum

from .graph import Graph, Partition, boundary_vertices, gain

logger = logging.getLogger(__name__)

DEFAULT_NONZERO_BUDGET = 10**6
LARGE_K_NONZERO_BUDGET = 5 * 10**6
UNBOUNDED = math.inf

_TESTED_RHO = {-2.0, -1.0, 0.0, 1.0}
_TESTED_DELTA = {1, 2, 3}


class StrategyKind(str, Enum):
    BOUNDARY = "boundary"
    GAIN = "gain"
    TOP_VERTICES = "topvertices"


@dataclass(frozen=True)
class SelectionStrategy:
    kind: StrategyKind
    rho: float | None = None
    delta: int | None = None
    nonzero_budget: float = DEFAULT_NONZERO_BUDGET
    seed: int = 0
    max_starts: int | None = None  # topvertices only: cap on the number of start vertices

    def __post_init__(self):
        if self.nonzero_budget <= 0:
            raise ValueError("nonzero_budget must be positive")
        if self.kind is StrategyKind.GAIN:
            if self.rho is None:
                raise ValueError("gain strategy requires rho")
            if self.rho not in _TESTED_RHO:
                logger.info("rho=%g is outside the tuned range {-2,-1,0,1}", self.rho)
        elif self.kind is StrategyKind.TOP_VERTICES:
            if self.delta is None or self.delta < 1:
                raise ValueError("topvertices strategy requires delta >= 1")
            if self.delta not in _TESTED_DELTA:
                logger.info("delta=%d is outside the tuned range {1,2,3}", self.delta)

    @classmethod
    def parse(cls, text: str, nonzero_budget: float = DEFAULT_NONZERO_BUDGET, seed: int = 0):
        """Parse ``boundary``, ``gain:<rho>`` or ``topvertices:<delta>``."""
        name, _, arg = text.strip().lower().partition(":")
        if name == "boundary" and not arg:
            return cls(StrategyKind.BOUNDARY, nonzero_budget=nonzero_budget, seed=seed)
        try:
            if name == "gain" and arg:
                return cls(StrategyKind.GAIN, rho=float(arg), nonzero_budget=nonzero_budget, seed=seed)
            if name == "topvertices" and arg:
                return cls(
                    StrategyKind.TOP_VERTICES,
                    delta=int(arg),
                    nonzero_budget=nonzero_budget,
                    seed=seed,
                )
        except ValueError as exc:
            raise ValueError(f"invalid strategy {text!r}: {exc}") from None
        raise ValueError(f"invalid strategy {text!r}; expected boundary, gain:<rho> or topvertices:<delta>")

    @property
    def label(self) -> str:
        if self.kind is StrategyKind.GAIN:
            return f"gain:{self.rho:g}"
        if self.kind is StrategyKind.TOP_VERTICES:
            return f"topvertices:{self.delta}"
        return "boundary"


@dataclass
class KeptSet:
    vertices: list[int]
    nonzeros_at_stop: int
    strategy_used: SelectionStrategy | None = None
    budget_hit: bool = False
    skipped: bool = False  # even the empty-K model exceeds the budget


class NonzeroTracker:
    """Incremental count of coarse-model edges while K grows.

    Model edges come in three kinds: kept-kept (original edges inside K),
    kept-super (a kept vertex and a block that still has a contracted
    neighbor) and super-super (two blocks joined by an edge between their
    contracted parts).
    """

    def __init__(self, g: Graph, p: Partition):
        self.g = g
        self.k = p.k
        self.block = p.assignment.tolist()
        self.kept: dict[int, int] = {}  # vertex -> insertion index
        # per kept vertex: block -> number of contracted neighbors in that block
        self._contracted_nbrs: dict[int, dict[int, int]] = {}
        self._super_pairs: dict[tuple[int, int], int] = {}
        self.kept_edges = 0
        self.kept_super_edges = 0
        a = p.assignment
        src = g.sources()
        mask = (src < g.adjncy) & (a[src] != a[g.adjncy])
        for bu, bv in zip(a[src[mask]].tolist(), a[g.adjncy[mask]].tolist()):
            key = (bu, bv) if bu < bv else (bv, bu)
            self._super_pairs[key] = self._super_pairs.get(key, 0) + 1

    @property
    def model_vertices(self) -> int:
        return self.k + len(self.kept)

    @property
    def model_edges(self) -> int:
        return self.kept_edges + self.kept_super_edges + len(self._super_pairs)

    @property
    def nonzeros(self) -> int:
        return nonzero_formula(self.k, self.model_edges, self.model_vertices)

    def _delta(self, v: int) -> tuple[int, int, dict[int, int], list[tuple[int, int]]]:
        """Edge-count changes if ``v`` were kept, without committing them."""
        bv = self.block[v]
        block = self.block
        kept = self.kept
        d_kept = 0
        d_kept_super = 0
        own: dict[int, int] = {}
        pair_dec: dict[tuple[int, int], int] = {}
        for u in self.g.neighbors(v):
            if u in kept:
                d_kept += 1
                if self._contracted_nbrs[u].get(bv) == 1:
                    d_kept_super -= 1  # v was u's last contracted neighbor in block bv
            else:
                bu = block[u]
                own[bu] = own.get(bu, 0) + 1
                if bu != bv:
                    key = (bu, bv) if bu < bv else (bv, bu)
                    pair_dec[key] = pair_dec.get(key, 0) + 1
        d_kept_super += len(own)
        return d_kept, d_kept_super, own, list(pair_dec.items())

    def nonzeros_if_added(self, v: int) -> int:
        d_kept, d_ks, _, pair_dec = self._delta(v)
        vanished = sum(1 for key, c in pair_dec if self._super_pairs[key] == c)
        edges = self.model_edges + d_kept + d_ks - vanished
        return nonzero_formula(self.k, edges, self.model_vertices + 1)

    def add(self, v: int) -> None:
        if v in self.kept:
            return
        d_kept, d_ks, own, pair_dec = self._delta(v)
        bv = self.block[v]
        for u in self.g.neighbors(v):
            if u in self.kept:
                cnt = self._contracted_nbrs[u]
                cnt[bv] -= 1
                if cnt[bv] == 0:
                    del cnt[bv]
        for key, c in pair_dec:
            left = self._super_pairs[key] - c
            if left:
                self._super_pairs[key] = left
            else:
                del self._super_pairs[key]
        self.kept_edges += d_kept
        self.kept_super_edges += d_ks
        self._contracted_nbrs[v] = own
        self.kept[v] = len(self.kept)


def nonzero_formula(k: int, edges: int, vertices: int) -> int:
    """Non-zeros of the unoptimized program: ``k * (6|E| + 2|V|)``."""
    return k * (6 * edges + 2 * vertices)


def estimate_nonzeros(g: Graph, p: Partition, kept: list[int] | set[int]) -> int:
    """Non-zero count of the program built from the coarse model of ``kept``."""
    tracker = NonzeroTracker(g, p)
    for v in kept:
        tracker.add(v)
    return tracker.nonzeros


class _Selector:
    """Budget-checked insertion into K."""

    def __init__(self, g: Graph, p: Partition, strategy: SelectionStrategy):
        self.tracker = NonzeroTracker(g, p)
        self.budget = strategy.nonzero_budget
        self.strategy = strategy
        self.order: list[int] = []
        self.full = self.tracker.nonzeros > self.budget
        self.skipped = self.full

    def __contains__(self, v: int) -> bool:
        return v in self.tracker.kept

    def try_add(self, v: int) -> bool:
        """Insert ``v``; returns False (and latches) once the budget is hit."""
        if self.full:
            return False
        if v in self.tracker.kept:
            return True
        if self.tracker.nonzeros_if_added(v) > self.budget:
            self.full = True
            return False
        self.tracker.add(v)
        self.order.append(v)
        return True

    def result(self) -> KeptSet:
        return KeptSet(
            vertices=self.order,
            nonzeros_at_stop=self.tracker.nonzeros,
            strategy_used=self.strategy,
            budget_hit=self.full,
            skipped=self.skipped,
        )


def _bfs_extend(g: Graph, sel: _Selector, queue: deque[int]) -> None:
    """FIFO BFS from ``queue`` (all already in K), inserting reached vertices."""
    while queue and not sel.full:
        u = queue.popleft()
        for w in g.neighbors(u):
            if w in sel:
                continue
            if not sel.try_add(w):
                return
            queue.append(w)


def select_boundary(
    g: Graph, p: Partition, nonzero_budget: float = DEFAULT_NONZERO_BUDGET, seed: int = 0
) -> KeptSet:
    strategy = SelectionStrategy(StrategyKind.BOUNDARY, nonzero_budget=nonzero_budget, seed=seed)
    return _select_boundary(g, p, strategy)


def _select_boundary(g: Graph, p: Partition, strategy: SelectionStrategy) -> KeptSet:
    rng = random.Random(strategy.seed)
    sel = _Selector(g, p, strategy)
    boundary = boundary_vertices(g, p)
    order = boundary[:]
    rng.shuffle(order)
    for v in order:
        if not sel.try_add(v):
            return sel.result()
    if boundary:
        starts = boundary[:]
        rng.shuffle(starts)
        _bfs_extend(g, sel, deque(starts))
    return sel.result()


def select_gain(
    g: Graph,
    p: Partition,
    rho: float,
    nonzero_budget: float = DEFAULT_NONZERO_BUDGET,
    seed: int = 0,
) -> KeptSet:
    strategy = SelectionStrategy(StrategyKind.GAIN, rho=rho, nonzero_budget=nonzero_budget, seed=seed)
    return _select_gain(g, p, strategy)


def _select_gain(g: Graph, p: Partition, strategy: SelectionStrategy) -> KeptSet:
    rng = random.Random(strategy.seed)
    sel = _Selector(g, p, strategy)
    frontier = [v for v in boundary_vertices(g, p) if gain(g, p, v)[0] >= strategy.rho]
    rng.shuffle(frontier)
    for v in frontier:
        if not sel.try_add(v):
            return sel.result()
    _bfs_extend(g, sel, deque(frontier))
    return sel.result()


def select_top_vertices(
    g: Graph,
    p: Partition,
    delta: int,
    nonzero_budget: float = DEFAULT_NONZERO_BUDGET,
    seed: int = 0,
    max_starts: int | None = None,
) -> KeptSet:
    strategy = SelectionStrategy(
        StrategyKind.TOP_VERTICES,
        delta=delta,
        nonzero_budget=nonzero_budget,
        seed=seed,
        max_starts=max_starts,
    )
    return _select_top_vertices(g, p, strategy)


def _select_top_vertices(g: Graph, p: Partition, strategy: SelectionStrategy) -> KeptSet:
    rng = random.Random(strategy.seed)
    sel = _Selector(g, p, strategy)
    starts = boundary_vertices(g, p)
    rng.shuffle(starts)
    gains = {v: gain(g, p, v)[0] for v in starts}
    starts.sort(key=lambda v: -gains[v])  # stable: shuffled order breaks ties
    if strategy.max_starts is not None:
        starts = starts[: strategy.max_starts]
    for s in starts:
        # hop ball of radius delta; traversal passes through vertices already in K
        dist = {s: 0}
        queue = deque([s])
        while queue:
            u = queue.popleft()
            if u not in sel and not sel.try_add(u):
                return sel.result()
            if dist[u] == strategy.delta:
                continue
            for w in g.neighbors(u):
                if w not in dist:
                    dist[w] = dist[u] + 1
                    queue.append(w)
    return sel.result()


def select(g: Graph, p: Partition, strategy: SelectionStrategy) -> KeptSet:
    """Run ``strategy`` on ``(g, p)``."""
    if strategy.kind is StrategyKind.BOUNDARY:
        return _select_boundary(g, p, strategy)
    if strategy.kind is StrategyKind.GAIN:
        return _select_gain(g, p, strategy)
    return _select_top_vertices(g, p, strategy)


def budget_for(k: int) -> int:
    """Default non-zero budget: raised for k in {32, 64}."""
    return LARGE_K_NONZERO_BUDGET if k in (32, 64) else DEFAULT_NONZERO_BUDGET

