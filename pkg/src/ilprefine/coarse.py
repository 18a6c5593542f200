"""Coarse model: contract each block minus the kept set into one super-vertex.

Model ids ``0..k-1`` are the super-vertices (super-vertex ``i`` holds the
non-kept vertices of block ``i``); kept vertices follow in insertion order.
Every model partition maps to an input partition with the same cut and block
weights, and the input partition itself maps to a model partition.
"""

from __future__ import annotations

import os
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from .graph import Graph, Partition, write_graph
from .selection import KeptSet


@dataclass(frozen=True)
class CoarseModel:
    model_graph: Graph
    kept: tuple[int, ...]  # original ids of model vertices k, k+1, ...
    super_weights: np.ndarray
    origin_graph: Graph
    origin_partition: Partition
    interior_members: tuple[np.ndarray, ...]

    @property
    def k(self) -> int:
        return self.origin_partition.k

    @property
    def n_model(self) -> int:
        return self.model_graph.n


def build_model(g: Graph, p: Partition, kept: KeptSet | Sequence[int]) -> CoarseModel:
    """Contract ``V_i minus K`` into super-vertex ``i`` for every block."""
    order = kept.vertices if isinstance(kept, KeptSet) else list(kept)
    k = p.k
    if len(set(order)) != len(order):
        raise ValueError("kept set contains duplicates")
    model_ids = p.assignment.copy()
    if order:
        idx = np.asarray(order, dtype=np.int64)
        if idx.min() < 0 or idx.max() >= g.n:
            raise ValueError("kept vertex out of range")
        model_ids[idx] = k + np.arange(len(order))
    n_model = k + len(order)

    src = g.sources()
    a, b = model_ids[src], model_ids[g.adjncy]
    mask = a < b  # each undirected edge once; drops edges inside one super-vertex
    edge_w: dict[tuple[int, int], float] = {}
    for u, v, w in zip(a[mask].tolist(), b[mask].tolist(), g.adjwgt[mask].tolist()):
        edge_w[(u, v)] = edge_w.get((u, v), 0.0) + w
    vwgt = np.bincount(model_ids, weights=g.vwgt, minlength=n_model).astype(np.float64)
    model_graph = Graph._from_merged(n_model, edge_w, vwgt)

    kept_mask = np.zeros(g.n, dtype=bool)
    kept_mask[order] = True
    members = tuple(
        np.flatnonzero((p.assignment == i) & ~kept_mask) for i in range(k)
    )
    return CoarseModel(
        model_graph=model_graph,
        kept=tuple(int(v) for v in order),
        super_weights=vwgt[:k].copy(),
        origin_graph=g,
        origin_partition=p,
        interior_members=members,
    )


def induced_model_partition(m: CoarseModel) -> np.ndarray:
    """Super-vertex ``i`` to block ``i``; kept vertices keep their input block."""
    head = np.arange(m.k, dtype=np.int64)
    tail = m.origin_partition.assignment[list(m.kept)] if m.kept else np.empty(0, np.int64)
    return np.concatenate([head, tail])


def project_solution(m: CoarseModel, model_assignment: Sequence[int] | np.ndarray) -> Partition:
    """Lift a model assignment to a partition of the original graph."""
    a = np.asarray(model_assignment, dtype=np.int64)
    if a.shape != (m.n_model,):
        raise ValueError(f"model assignment must have {m.n_model} entries")
    out = a[m.origin_partition.assignment]  # contracted vertex follows its super-vertex
    if m.kept:
        out[list(m.kept)] = a[m.k :]
    p = m.origin_partition
    return Partition.from_assignment(m.origin_graph, out, p.k, p.epsilon)


def write_model(m: CoarseModel, graph_path: str | os.PathLike, map_path: str | os.PathLike) -> None:
    """Dump the model graph (METIS) and a model-id to original-id mapping."""
    write_graph(m.model_graph, graph_path)
    with open(map_path, "w", encoding="ascii", newline="\n") as fh:
        for i in range(m.k):
            fh.write(f"{i} mu:{i}\n")
        for j, v in enumerate(m.kept):
            fh.write(f"{m.k + j} {v}\n")
