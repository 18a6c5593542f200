"""Graph and partition representations, METIS I/O and the basic partition
quantities (cut, balance bound, boundary vertices, vertex gain)."""

from __future__ import annotations

import logging
import math
import os
from collections.abc import Iterable, Sequence

import numpy as np

from .errors import (
    AsymmetricAdjacencyError,
    GraphFormatError,
    LengthMismatchError,
    PartitionFormatError,
)

logger = logging.getLogger(__name__)

PathLike = str | os.PathLike


class Graph:
    """Immutable undirected weighted graph in CSR form.

    Neighbors of ``v`` are ``adjncy[xadj[v]:xadj[v+1]]`` with weights in the
    matching slice of ``adjwgt``; each undirected edge is stored twice.
    Neighbor lists are sorted by id.
    """

    def __init__(
        self,
        xadj: np.ndarray,
        adjncy: np.ndarray,
        adjwgt: np.ndarray,
        vwgt: np.ndarray,
    ):
        self.xadj = np.asarray(xadj, dtype=np.int64)
        self.adjncy = np.asarray(adjncy, dtype=np.int64)
        self.adjwgt = np.asarray(adjwgt, dtype=np.float64)
        self.vwgt = np.asarray(vwgt, dtype=np.float64)
        for arr in (self.xadj, self.adjncy, self.adjwgt, self.vwgt):
            arr.flags.writeable = False
        if len(self.adjncy) % 2:
            raise ValueError("adjacency must store every edge twice")
        self._lists: tuple[list[list[int]], list[list[float]]] | None = None

    @classmethod
    def from_edges(
        cls,
        n: int,
        edges: Iterable[tuple[int, int, float]],
        vertex_weights: Sequence[float] | np.ndarray | None = None,
    ) -> Graph:
        """Build a graph from an undirected edge list.

        Parallel edges are merged by summing their weights, self-loops are
        dropped with a warning.
        """
        merged: dict[tuple[int, int], float] = {}
        loops = 0
        for u, v, w in edges:
            if not (0 <= u < n and 0 <= v < n):
                raise ValueError(f"edge ({u}, {v}) out of range for n={n}")
            if w < 0:
                raise ValueError(f"negative edge weight {w} on ({u}, {v})")
            if u == v:
                loops += 1
                continue
            key = (u, v) if u < v else (v, u)
            merged[key] = merged.get(key, 0.0) + float(w)
        if loops:
            logger.warning("dropped %d self-loop(s)", loops)
        if vertex_weights is None:
            vwgt = np.ones(n)
        else:
            vwgt = np.asarray(vertex_weights, dtype=np.float64)
            if vwgt.shape != (n,):
                raise ValueError("vertex_weights must have length n")
            if np.any(vwgt < 0):
                raise ValueError("vertex weights must be non-negative")
        return cls._from_merged(n, merged, vwgt)

    @classmethod
    def _from_merged(
        cls, n: int, merged: dict[tuple[int, int], float], vwgt: np.ndarray
    ) -> Graph:
        m = len(merged)
        src = np.empty(2 * m, dtype=np.int64)
        dst = np.empty(2 * m, dtype=np.int64)
        wgt = np.empty(2 * m, dtype=np.float64)
        for i, ((u, v), w) in enumerate(merged.items()):
            src[2 * i], dst[2 * i], wgt[2 * i] = u, v, w
            src[2 * i + 1], dst[2 * i + 1], wgt[2 * i + 1] = v, u, w
        order = np.lexsort((dst, src))
        src, dst, wgt = src[order], dst[order], wgt[order]
        xadj = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(src, minlength=n), out=xadj[1:])
        return cls(xadj, dst, wgt, vwgt)

    @property
    def n(self) -> int:
        return len(self.vwgt)

    @property
    def m(self) -> int:
        return len(self.adjncy) // 2

    def degree(self, v: int) -> int:
        return int(self.xadj[v + 1] - self.xadj[v])

    def neighbors(self, v: int) -> list[int]:
        return self.adjacency_lists()[0][v]

    def edge_weights(self, v: int) -> list[float]:
        return self.adjacency_lists()[1][v]

    def adjacency_lists(self) -> tuple[list[list[int]], list[list[float]]]:
        """Per-vertex neighbor and weight lists (cached; for Python-level loops)."""
        if self._lists is None:
            nbrs = self.adjncy.tolist()
            wts = self.adjwgt.tolist()
            bounds = self.xadj.tolist()
            self._lists = (
                [nbrs[bounds[v] : bounds[v + 1]] for v in range(self.n)],
                [wts[bounds[v] : bounds[v + 1]] for v in range(self.n)],
            )
        return self._lists

    def edges(self) -> list[tuple[int, int, float]]:
        """Undirected edges ``(u, v, w)`` with ``u < v``, sorted."""
        src = np.repeat(np.arange(self.n), np.diff(self.xadj))
        mask = src < self.adjncy
        return list(
            zip(src[mask].tolist(), self.adjncy[mask].tolist(), self.adjwgt[mask].tolist())
        )

    def total_vertex_weight(self) -> float:
        return float(self.vwgt.sum())

    def total_edge_weight(self) -> float:
        return float(self.adjwgt.sum()) / 2

    def sources(self) -> np.ndarray:
        """Source vertex of every directed adjacency entry."""
        return np.repeat(np.arange(self.n), np.diff(self.xadj))

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, m={self.m})"


class Partition:
    """Vertex-to-block assignment with cached block weights and cut value.

    Use :meth:`from_assignment` to build one; :meth:`move` keeps the caches
    in sync incrementally. Not safe for concurrent mutation, :meth:`copy` per
    thread instead.
    """

    def __init__(
        self,
        k: int,
        assignment: np.ndarray,
        block_weights: np.ndarray,
        cut: float,
        epsilon: float = 0.0,
    ):
        self.k = k
        self.assignment = assignment
        self.block_weights = block_weights
        self.cut = cut
        self.epsilon = epsilon

    @classmethod
    def from_assignment(
        cls,
        g: Graph,
        assignment: Sequence[int] | np.ndarray,
        k: int | None = None,
        epsilon: float = 0.0,
    ) -> Partition:
        a = np.array(assignment, dtype=np.int64)
        if a.shape != (g.n,):
            raise LengthMismatchError(
                f"partition has {len(a)} entries, graph has {g.n} vertices"
            )
        if k is None:
            k = int(a.max()) + 1 if len(a) else 1
        if len(a) and (a.min() < 0 or a.max() >= k):
            raise PartitionFormatError(f"block ids must lie in [0, {k})")
        if epsilon < 0:
            raise ValueError("epsilon must be non-negative")
        return cls(k, a, block_weights(g, a, k), cut_value(g, a), epsilon)

    def copy(self) -> Partition:
        return Partition(
            self.k, self.assignment.copy(), self.block_weights.copy(), self.cut, self.epsilon
        )

    def move(self, g: Graph, v: int, target: int) -> None:
        """Move ``v`` to block ``target``, updating cut and block weights."""
        source = int(self.assignment[v])
        if source == target:
            return
        nbrs, wts = g.neighbors(v), g.edge_weights(v)
        delta = 0.0
        for u, w in zip(nbrs, wts):
            b = self.assignment[u]
            if b == source:
                delta += w
            elif b == target:
                delta -= w
        self.cut += delta
        self.block_weights[source] -= g.vwgt[v]
        self.block_weights[target] += g.vwgt[v]
        self.assignment[v] = target

    def max_block_weight(self) -> float:
        return float(self.block_weights.max())

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Partition):
            return NotImplemented
        return (
            self.k == other.k
            and self.epsilon == other.epsilon
            and self.cut == other.cut
            and np.array_equal(self.assignment, other.assignment)
            and np.array_equal(self.block_weights, other.block_weights)
        )

    def __repr__(self) -> str:
        return f"Partition(k={self.k}, cut={self.cut:g}, epsilon={self.epsilon:g})"


def block_weights(g: Graph, assignment: Sequence[int] | np.ndarray, k: int) -> np.ndarray:
    return np.bincount(np.asarray(assignment), weights=g.vwgt, minlength=k).astype(np.float64)


def cut_value(g: Graph, assignment: Sequence[int] | np.ndarray) -> float:
    """Total weight of edges whose endpoints lie in different blocks."""
    a = np.asarray(assignment)
    crossing = a[g.sources()] != a[g.adjncy]
    return float(g.adjwgt[crossing].sum()) / 2


def l_max(g: Graph | float, k: int, epsilon: float) -> float:
    """Largest admissible block weight ``(1 + epsilon) * ceil(c(V) / k)``.

    ``g`` may also be the total vertex weight directly.
    """
    total = g if isinstance(g, (int, float)) else g.total_vertex_weight()
    return (1 + epsilon) * math.ceil(total / k)


def is_balanced(g: Graph, p: Partition) -> bool:
    return p.max_block_weight() <= l_max(g, p.k, p.epsilon)


def boundary_vertices(g: Graph, p: Partition) -> list[int]:
    """Vertices with at least one neighbor in another block, ascending."""
    a = p.assignment
    src = g.sources()
    crossing = a[src] != a[g.adjncy]
    return np.unique(src[crossing]).tolist()


def gain(g: Graph, p: Partition, v: int) -> tuple[float, int | None]:
    """Best cut decrease from moving ``v`` to another block.

    Only blocks containing a neighbor of ``v`` are candidates; ties go to the
    smallest block id. Interior vertices return ``(-w_own, None)``.
    """
    own = int(p.assignment[v])
    conn: dict[int, float] = {}
    w_own = 0.0
    for u, w in zip(g.neighbors(v), g.edge_weights(v)):
        b = int(p.assignment[u])
        if b == own:
            w_own += w
        else:
            conn[b] = conn.get(b, 0.0) + w
    if not conn:
        return -w_own, None
    target = min(conn, key=lambda b: (-conn[b], b))
    return conn[target] - w_own, target


# --------------------------------------------------------------------- I/O


def _parse_number(token: str, lineno: int, what: str) -> float:
    try:
        value = float(token)
    except ValueError:
        raise GraphFormatError(f"invalid {what} {token!r}", lineno) from None
    if not math.isfinite(value) or value < 0:
        raise GraphFormatError(f"{what} must be a finite non-negative number", lineno)
    return value


def parse_metis(text: str) -> Graph:
    """Parse a graph in METIS/Chaco format (1-indexed adjacency lists)."""
    lines = [(i + 1, line) for i, line in enumerate(text.splitlines())]
    lines = [(i, line) for i, line in lines if not line.lstrip().startswith("%")]
    if not lines:
        raise GraphFormatError("empty file", 1)
    header_line, header = lines[0]
    fields = header.split()
    if len(fields) < 2 or len(fields) > 4:
        raise GraphFormatError("header must be 'n m [fmt [ncon]]'", header_line)
    try:
        n, m = int(fields[0]), int(fields[1])
    except ValueError:
        raise GraphFormatError("n and m must be integers", header_line) from None
    if n < 0 or m < 0:
        raise GraphFormatError("n and m must be non-negative", header_line)
    fmt = fields[2] if len(fields) > 2 else "0"
    if len(fmt) > 3 or any(ch not in "01" for ch in fmt):
        raise GraphFormatError(f"invalid format code {fmt!r}", header_line)
    has_vsize, has_vwgt, has_ewgt = (ch == "1" for ch in fmt.zfill(3))
    ncon = 1
    if len(fields) > 3:
        try:
            ncon = int(fields[3])
        except ValueError:
            raise GraphFormatError("ncon must be an integer", header_line) from None
        if ncon != 1:
            raise GraphFormatError("multi-constraint vertex weights are not supported", header_line)

    body = lines[1:]
    while len(body) > n and not body[-1][1].strip():
        body.pop()
    if len(body) > n:
        raise GraphFormatError(f"more than n={n} vertex lines", body[n][0])

    vwgt = np.ones(n)
    entries: dict[tuple[int, int], float] = {}
    entry_line: dict[tuple[int, int], int] = {}
    n_entries = 0
    loops = 0
    for v, (lineno, line) in enumerate(body):
        tokens = line.split()
        pos = 0
        if has_vsize:
            pos += 1
        if has_vwgt:
            if len(tokens) < pos + 1:
                raise GraphFormatError("missing vertex weight", lineno)
            vwgt[v] = _parse_number(tokens[pos], lineno, "vertex weight")
            pos += 1
        rest = tokens[pos:]
        step = 2 if has_ewgt else 1
        if len(rest) % step:
            raise GraphFormatError("neighbor without edge weight", lineno)
        for j in range(0, len(rest), step):
            try:
                u = int(rest[j]) - 1
            except ValueError:
                raise GraphFormatError(f"invalid neighbor id {rest[j]!r}", lineno) from None
            if not 0 <= u < n:
                raise GraphFormatError(f"vertex index {u + 1} out of range 1..{n}", lineno)
            w = _parse_number(rest[j + 1], lineno, "edge weight") if has_ewgt else 1.0
            if u == v:
                loops += 1
                continue
            n_entries += 1
            key = (v, u)
            entries[key] = entries.get(key, 0.0) + w
            entry_line.setdefault(key, lineno)

    for (v, u), w in entries.items():
        back = entries.get((u, v))
        if back is None:
            raise AsymmetricAdjacencyError(
                f"edge {v + 1}->{u + 1} has no reverse entry on vertex {u + 1}'s line",
                entry_line[(v, u)],
            )
        if back != w:
            raise AsymmetricAdjacencyError(
                f"edge {v + 1}-{u + 1} has weight {w:g} but reverse weight {back:g}",
                entry_line[(v, u)],
            )
    if n_entries != 2 * m:
        raise GraphFormatError(
            f"header declares m={m} but adjacency lists hold {n_entries} entries "
            f"(expected {2 * m})",
            header_line,
        )
    if loops:
        logger.warning("dropped %d self-loop entr%s", loops, "y" if loops == 1 else "ies")
    merged = {(v, u): w for (v, u), w in entries.items() if v < u}
    if len(merged) != m:
        logger.warning("merged parallel edges: %d declared, %d distinct", m, len(merged))
    return Graph._from_merged(n, merged, vwgt)


def load_graph(path: PathLike) -> Graph:
    with open(path, encoding="ascii") as fh:
        return parse_metis(fh.read())


def _fmt_weight(w: float) -> str:
    return str(int(w)) if float(w).is_integer() else repr(float(w))


def format_metis(g: Graph) -> str:
    unit_v = bool(np.all(g.vwgt == 1))
    unit_e = bool(np.all(g.adjwgt == 1))
    header = f"{g.n} {g.m}"
    if not (unit_v and unit_e):
        header += f" {int(not unit_v)}{int(not unit_e)}"
    out = [header]
    nbrs, wts = g.adjacency_lists()
    for v in range(g.n):
        tokens = [] if unit_v else [_fmt_weight(g.vwgt[v])]
        for u, w in zip(nbrs[v], wts[v]):
            tokens.append(str(u + 1))
            if not unit_e:
                tokens.append(_fmt_weight(w))
        out.append(" ".join(tokens))
    return "\n".join(out) + "\n"


def write_graph(g: Graph, path: PathLike) -> None:
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(format_metis(g))


def read_partition(path: PathLike, n: int | None = None) -> np.ndarray:
    """Read a partition file (one 0-indexed block id per line)."""
    ids = []
    with open(path, encoding="ascii") as fh:
        for lineno, line in enumerate(fh, start=1):
            token = line.strip()
            if not token:
                continue
            try:
                ids.append(int(token))
            except ValueError:
                raise PartitionFormatError(f"line {lineno}: invalid block id {token!r}") from None
            if ids[-1] < 0:
                raise PartitionFormatError(f"line {lineno}: negative block id")
    if n is not None and len(ids) != n:
        raise LengthMismatchError(f"partition file has {len(ids)} lines, graph has {n} vertices")
    return np.array(ids, dtype=np.int64)


def write_partition(assignment: Sequence[int] | np.ndarray, path: PathLike) -> None:
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.writelines(f"{int(b)}\n" for b in assignment)
