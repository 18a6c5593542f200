"""Local search driver: select K, contract, solve, project, accept.

Also holds the partition validator used by the ``evaluate`` command and a
seeded greedy graph-growing partitioner that produces balanced start
partitions when none is supplied.
"""

from __future__ import annotations

import logging
import math
import random
import time
from collections import deque
from collections.abc import Sequence
from dataclasses import asdict, dataclass, field

import numpy as np

from .coarse import build_model, project_solution
from .errors import BootstrapFailedError, PartitionFormatError, UnbalancedInputError
from .graph import Graph, Partition, cut_value, is_balanced, l_max
from .ilp import IlpOptions, build_ilp
from .selection import SelectionStrategy, budget_for, select
from .solver import DEFAULT_TIME_LIMIT, SolverConfig, SolveStatus, solve

logger = logging.getLogger(__name__)

SKIPPED = "Skipped"
DEFAULT_EPSILONS = (0.0, 0.01, 0.03, 0.05)


def default_strategies(k: int) -> list[str]:
    """``gain:-2`` up to 16 blocks; beyond that both ``gain:-2`` and ``gain:-1``."""
    return ["gain:-2"] if k <= 16 else ["gain:-2", "gain:-1"]


@dataclass
class RefineConfig:
    k: int
    epsilon: float = 0.0
    strategies: list[str] | None = None  # None: default_strategies(k)
    ilp_options: IlpOptions = field(default_factory=lambda: IlpOptions.preset("BasicSymSSol"))
    time_limit: float = DEFAULT_TIME_LIMIT
    rounds: int = 1
    seed: int = 0
    nonzero_budget: float | None = None  # None: budget_for(k)
    max_starts: int | None = None  # topvertices only
    node_limit: int | None = None  # per solve; a deterministic alternative to time_limit

    def __post_init__(self):
        if self.k < 2:
            raise ValueError("k must be >= 2")
        if self.epsilon < 0:
            raise ValueError("epsilon must be >= 0")
        if self.rounds < 1:
            raise ValueError("rounds must be >= 1")
        if self.time_limit < 0:
            raise ValueError("time_limit must be >= 0")
        if self.nonzero_budget is not None and self.nonzero_budget <= 0:
            raise ValueError("nonzero budget must be positive")
        if self.node_limit is not None and self.node_limit < 1:
            raise ValueError("node_limit must be >= 1")

    @property
    def strategy_labels(self) -> list[str]:
        return list(self.strategies) if self.strategies else default_strategies(self.k)

    @property
    def budget(self) -> float:
        return self.nonzero_budget if self.nonzero_budget is not None else budget_for(self.k)


@dataclass
class RunRecord:
    instance: str
    k: int
    eps: float
    strategy: str
    input_cut: float
    output_cut: float
    improved: bool
    status: str
    time_s: float
    nodes: int

    FIELDS = (
        "instance", "k", "eps", "strategy", "input_cut", "output_cut",
        "improved", "status", "time_s", "nodes",
    )

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> RunRecord:
        return cls(**{name: d[name] for name in cls.FIELDS})


def _better(cand: Partition, cur: Partition) -> bool:
    """Smaller cut, or equal cut with a lighter heaviest block."""
    if cand.cut != cur.cut:
        return cand.cut < cur.cut
    return cand.max_block_weight() < cur.max_block_weight()


def _round_seeds(seed: int, count: int) -> list[int]:
    return np.random.SeedSequence(seed).generate_state(count, dtype=np.uint64).tolist()


def refine(
    g: Graph,
    p: Partition,
    cfg: RefineConfig,
    instance: str = "",
    solver_cfg: SolverConfig | None = None,
) -> tuple[Partition, RunRecord]:
    """Improve ``p`` with the contracted-model program; never accept worse."""
    if p.k != cfg.k:
        raise PartitionFormatError(f"partition has k={p.k}, config has k={cfg.k}")
    current = Partition(p.k, p.assignment.copy(), p.block_weights.copy(), p.cut, cfg.epsilon)
    if not is_balanced(g, current):
        raise UnbalancedInputError(
            f"input partition is unbalanced: max block weight {current.max_block_weight():g} "
            f"> L_max={l_max(g, cfg.k, cfg.epsilon):g}"
        )
    solver_cfg = solver_cfg or SolverConfig(time_limit=cfg.time_limit, node_limit=cfg.node_limit)
    labels = cfg.strategy_labels
    seeds = iter(_round_seeds(cfg.seed, cfg.rounds * len(labels)))
    start = time.perf_counter()
    input_cut = current.cut
    nodes = 0
    statuses: list[str] = []
    for rnd in range(cfg.rounds):
        best_cand: Partition | None = None
        for label in labels:
            strategy = SelectionStrategy.parse(label, cfg.budget, next(seeds))
            if cfg.max_starts is not None:
                strategy = SelectionStrategy(
                    strategy.kind, strategy.rho, strategy.delta,
                    strategy.nonzero_budget, strategy.seed, cfg.max_starts,
                )
            kept = select(g, current, strategy)
            if kept.skipped:
                logger.info("round %d %s: empty model exceeds the budget, skipped", rnd, label)
                statuses.append(SKIPPED)
                continue
            model = build_model(g, current, kept)
            inst = build_ilp(model, cfg.ilp_options)
            result = solve(inst, solver_cfg)
            nodes += result.stats.nodes
            statuses.append(result.status.value)
            logger.info(
                "round %d %s: |K|=%d status=%s objective=%s nodes=%d",
                rnd, label, len(kept.vertices), result.status.value,
                result.objective, result.stats.nodes,
            )
            if result.assignment is None:
                continue
            cand = project_solution(model, result.assignment)
            if best_cand is None or _better(cand, best_cand):
                best_cand = cand
        if best_cand is not None and is_balanced(g, best_cand) and _better(best_cand, current):
            current = best_cand
    record = RunRecord(
        instance=instance,
        k=cfg.k,
        eps=cfg.epsilon,
        strategy="+".join(labels),
        input_cut=input_cut,
        output_cut=current.cut,
        improved=bool(current.cut < input_cut or not np.array_equal(current.assignment, p.assignment)),
        status=_summary_status(statuses),
        time_s=time.perf_counter() - start,
        nodes=nodes,
    )
    return current, record


def _summary_status(statuses: Sequence[str]) -> str:
    """Worst-case status over all solves: a time-out anywhere is reported."""
    priority = [
        SolveStatus.TIME_LIMIT_NO_SOLUTION.value,
        SolveStatus.FEASIBLE_TIME_LIMIT.value,
        SolveStatus.INFEASIBLE.value,
        SolveStatus.OPTIMAL.value,
        SolveStatus.NO_IMPROVEMENT.value,
        SKIPPED,
    ]
    for status in priority:
        if status in statuses:
            return status
    return SKIPPED


# ------------------------------------------------------------------ evaluate


def evaluate(
    g: Graph,
    assignment: Sequence[int] | np.ndarray,
    k: int | None = None,
    epsilons: Sequence[float] = DEFAULT_EPSILONS,
) -> dict:
    """Cut, block weights and balance verdicts of a partition."""
    a = np.asarray(assignment, dtype=np.int64)
    if k is not None and len(a) and a.max() >= k:
        raise PartitionFormatError(f"block id {int(a.max())} >= k={k}")
    p = Partition.from_assignment(g, a, k)
    heaviest = p.max_block_weight()
    return {
        "n": g.n,
        "m": g.m,
        "k": p.k,
        "cut": cut_value(g, a),
        "block_weights": p.block_weights.tolist(),
        "max_block_weight": heaviest,
        "balance": [
            {"epsilon": eps, "l_max": l_max(g, p.k, eps), "balanced": heaviest <= l_max(g, p.k, eps)}
            for eps in epsilons
        ],
    }


# ----------------------------------------------------------------- bootstrap


def bootstrap_partition(g: Graph, k: int, epsilon: float = 0.0, seed: int = 0) -> Partition:
    """Greedy BFS region growing, one block after the other.

    Block ``b`` grows from a random unassigned vertex towards
    ``ceil(remaining weight / remaining blocks)``, never beyond L_max, and
    restarts from another random vertex when its BFS runs dry. Vertices left
    over go to the lightest adjacent block that can take them, else to the
    lightest block overall.
    """
    if k < 2:
        raise ValueError("k must be >= 2")
    rng = random.Random(seed)
    cap = l_max(g, k, epsilon)
    c = g.vwgt.tolist()
    block = [-1] * g.n
    bw = [0.0] * k
    order = list(range(g.n))
    rng.shuffle(order)
    remaining = sum(c)
    for b in range(k):
        target = min(cap, math.ceil(remaining / (k - b)))
        seeds = iter(order)
        queue: deque[int] = deque()
        while bw[b] < target:
            if not queue:
                v = next((v for v in seeds if block[v] < 0 and bw[b] + c[v] <= target), None)
                if v is None:
                    break
                block[v] = b
                bw[b] += c[v]
                queue.append(v)
                continue
            u = queue.popleft()
            for w in g.neighbors(u):
                if block[w] < 0 and bw[b] + c[w] <= target:
                    block[w] = b
                    bw[b] += c[w]
                    queue.append(w)
        remaining -= bw[b]
    for v in order:
        if block[v] >= 0:
            continue
        fits = lambda b: bw[b] + c[v] <= cap  # noqa: E731
        adjacent = sorted({block[u] for u in g.neighbors(v) if block[u] >= 0 and fits(block[u])})
        pool = adjacent or [b for b in range(k) if fits(b)]
        if not pool:
            raise BootstrapFailedError(
                f"vertex {v} (weight {c[v]:g}) fits in no block under L_max={cap:g}; retry with another seed"
            )
        b = min(pool, key=lambda b: (bw[b], b))
        block[v] = b
        bw[b] += c[v]
    p = Partition.from_assignment(g, block, k, epsilon)
    assert is_balanced(g, p)
    return p
