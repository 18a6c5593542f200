"""Binary program for balanced k-way partitioning of a coarse model.

Variables are ``e_u_v`` (edge {u, v} is cut) and ``x_v_b`` (vertex v is in
block b). Rows, in emission order:

* for every edge and block: ``e_uv >= x_ub - x_vb`` and ``e_uv >= x_vb - x_ub``
* for every block: ``sum_v c(v) x_vb <= L_max``
* for every vertex: ``sum_b x_vb = 1``
* optionally, a bound on the objective relative to the input cut

The objective is ``min sum w_uv e_uv`` plus a constant offset. Symmetry
breaking pins super-vertex ``i`` to block ``i``, drops its assignment row,
moves its weight to the right-hand side of the balance rows and folds edges
between two super-vertices into the constant offset.
"""

from __future__ import annotations

import dataclasses
import itertools
import os
from collections.abc import Iterator, Sequence
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .coarse import CoarseModel, induced_model_partition
from .errors import InfeasibleFixingError, UnbalancedInputError
from .graph import l_max as compute_l_max

DEFAULT_STRICT_GAP = 1e-6


class ObjectiveBound(str, Enum):
    NONE = "none"
    LESS_OR_EQUAL = "le"
    STRICTLY_LESS = "lt"


@dataclass(frozen=True)
class IlpOptions:
    symmetry_breaking: bool = True
    start_solution: bool = True
    objective_bound: ObjectiveBound = ObjectiveBound.NONE
    strict_gap: float = DEFAULT_STRICT_GAP  # used only when weights are not all integers

    PRESETS = ("Basic", "BasicSym", "BasicSymSSol", "BSSSConst=", "BSSSConst<")

    @classmethod
    def preset(cls, name: str) -> IlpOptions:
        """Options for one of the named variants (each adds to the previous)."""
        table = {
            "basic": (False, False, ObjectiveBound.NONE),
            "basicsym": (True, False, ObjectiveBound.NONE),
            "basicsymssol": (True, True, ObjectiveBound.NONE),
            "bsssconst=": (True, True, ObjectiveBound.LESS_OR_EQUAL),
            "bsssconst<": (True, True, ObjectiveBound.STRICTLY_LESS),
        }
        try:
            sym, start, bound = table[name.lower()]
        except KeyError:
            raise ValueError(f"unknown preset {name!r}; choose from {', '.join(cls.PRESETS)}") from None
        return cls(symmetry_breaking=sym, start_solution=start, objective_bound=bound)

    @property
    def name(self) -> str | None:
        for preset in self.PRESETS:
            if dataclasses.replace(IlpOptions.preset(preset), strict_gap=self.strict_gap) == self:
                return preset
        return None


@dataclass(frozen=True)
class Row:
    coeffs: list[tuple[str, float]]
    sense: str  # ">=", "<=", "="
    rhs: float


@dataclass(frozen=True, eq=False)
class IlpInstance:
    """Binary program over a model graph.

    ``edges`` lists the edge variables; super-super edges folded away by
    symmetry breaking contribute only to ``offset``. ``objective_limit`` is
    an upper bound on the full objective (offset included) or None.
    """

    k: int
    l_max: float
    vertex_weights: np.ndarray
    edges: tuple[tuple[int, int, float], ...]
    offset: float = 0.0
    fixed: dict[int, int] = field(default_factory=dict)
    pinned: frozenset[int] = frozenset()  # fixed vertices without an assignment row
    warm_start: np.ndarray | None = None
    objective_bound: ObjectiveBound = ObjectiveBound.NONE
    objective_limit: float | None = None
    input_cut: float | None = None
    pairwise_condition: bool | None = None
    strict_gap: float = DEFAULT_STRICT_GAP
    n_super: int = 0  # model ids below this are super-vertices

    @property
    def n_vertices(self) -> int:
        return len(self.vertex_weights)

    @property
    def free_vertices(self) -> list[int]:
        return [v for v in range(self.n_vertices) if v not in self.fixed]

    # ------------------------------------------------------------ semantics

    def objective(self, assignment: Sequence[int] | np.ndarray) -> float:
        a = np.asarray(assignment)
        total = self.offset
        for u, v, w in self.edges:
            if a[u] != a[v]:
                total += w
        return total

    def block_weights(self, assignment: Sequence[int] | np.ndarray) -> np.ndarray:
        return np.bincount(np.asarray(assignment), weights=self.vertex_weights, minlength=self.k)

    def is_feasible(self, assignment: Sequence[int] | np.ndarray, with_bound: bool = True) -> bool:
        a = np.asarray(assignment)
        if a.shape != (self.n_vertices,) or a.min(initial=0) < 0 or a.max(initial=0) >= self.k:
            return False
        if any(a[v] != b for v, b in self.fixed.items()):
            return False
        if np.any(self.block_weights(a) > self.l_max):
            return False
        if with_bound and self.objective_limit is not None:
            return self.objective(a) <= self.objective_limit
        return True

    @property
    def warm_start_objective(self) -> float | None:
        return None if self.warm_start is None else self.objective(self.warm_start)

    def warm_start_values(self) -> dict[str, int]:
        """0/1 value for every variable, consistent with the warm start."""
        if self.warm_start is None:
            raise ValueError("instance has no warm start")
        a = self.warm_start
        values = {x_name(v, b): int(a[v] == b) for v in range(self.n_vertices) for b in range(self.k)}
        values.update({e_name(u, v): int(a[u] != a[v]) for u, v, _ in self.edges})
        return values

    # ------------------------------------------------------------- rows

    def variables(self) -> list[str]:
        names = [e_name(u, v) for u, v, _ in self.edges]
        names += [x_name(v, b) for v in range(self.n_vertices) for b in range(self.k)]
        return names

    def fixed_values(self) -> dict[str, int]:
        return {
            x_name(v, b): int(b == blk) for v, blk in self.fixed.items() for b in range(self.k)
        }

    def rows(self) -> Iterator[Row]:
        k = self.k
        for u, v, _ in self.edges:
            e = e_name(u, v)
            for b in range(k):
                xu, xv = x_name(u, b), x_name(v, b)
                yield Row([(e, 1.0), (xu, -1.0), (xv, 1.0)], ">=", 0.0)
                yield Row([(e, 1.0), (xu, 1.0), (xv, -1.0)], ">=", 0.0)
        # a pinned vertex's weight sits on the right-hand side
        pinned = self.pinned
        for b in range(k):
            rhs = self.l_max
            coeffs = []
            for v in range(self.n_vertices):
                if v in pinned:
                    if self.fixed[v] == b:
                        rhs -= float(self.vertex_weights[v])
                else:
                    coeffs.append((x_name(v, b), float(self.vertex_weights[v])))
            yield Row(coeffs, "<=", rhs)
        for v in range(self.n_vertices):
            if v not in self.pinned:
                yield Row([(x_name(v, b), 1.0) for b in range(k)], "=", 1.0)
        if self.objective_limit is not None:
            yield Row([(e_name(u, v), w) for u, v, w in self.edges], "<=", self.objective_limit - self.offset)

    @property
    def counts(self) -> tuple[int, int, int]:
        """(variables, constraints, non-zeros), counted from the emitted rows."""
        cached = self.__dict__.get("_counts")
        if cached is None:
            n_rows = nnz = 0
            for row in self.rows():
                n_rows += 1
                nnz += len(row.coeffs)
            cached = (len(self.edges) + self.k * self.n_vertices, n_rows, nnz)
            object.__setattr__(self, "_counts", cached)
        return cached

    @property
    def num_variables(self) -> int:
        return self.counts[0]

    @property
    def num_constraints(self) -> int:
        return self.counts[1]

    @property
    def num_nonzeros(self) -> int:
        return self.counts[2]


def x_name(v: int, b: int) -> str:
    return f"x_{v}_{b}"


def e_name(u: int, v: int) -> str:
    return f"e_{u}_{v}"


def _all_integral(values) -> bool:
    return all(float(w).is_integer() for w in values)


# ------------------------------------------------------------------ builders


def basic_instance(m: CoarseModel) -> IlpInstance:
    """Unoptimized program over the model graph."""
    g = m.origin_graph
    p = m.origin_partition
    return IlpInstance(
        k=m.k,
        l_max=compute_l_max(g, p.k, p.epsilon),
        vertex_weights=m.model_graph.vwgt.copy(),
        edges=tuple(m.model_graph.edges()),
        n_super=m.k,
    )


def apply_symmetry_breaking(inst: IlpInstance) -> IlpInstance:
    """Pin super-vertex ``i`` to block ``i`` and fold super-super edges."""
    k = inst.k
    c = inst.vertex_weights
    for i in range(inst.n_super):
        if c[i] > inst.l_max:
            raise InfeasibleFixingError(
                f"super-vertex {i} has weight {c[i]:g} > L_max={inst.l_max:g}; "
                "the input partition is unbalanced"
            )
    fixed = dict(inst.fixed)
    fixed.update({i: i for i in range(inst.n_super)})
    kept_edges = []
    offset = inst.offset
    for u, v, w in inst.edges:
        if u < inst.n_super and v < inst.n_super:
            offset += w  # pinned to different blocks, always cut
        else:
            kept_edges.append((u, v, w))
    condition = all(
        c[i] + c[j] > inst.l_max for i, j in itertools.combinations(range(inst.n_super), 2)
    )
    return dataclasses.replace(
        inst,
        edges=tuple(kept_edges),
        offset=offset,
        fixed=fixed,
        pinned=frozenset(range(inst.n_super)),
        pairwise_condition=condition,
    )


def set_start_solution(inst: IlpInstance, m: CoarseModel) -> IlpInstance:
    """Use the input partition (mapped to the model) as the warm start."""
    start = induced_model_partition(m)
    if np.any(inst.block_weights(start) > inst.l_max):
        raise UnbalancedInputError("input partition is unbalanced; cannot warm start")
    return dataclasses.replace(inst, warm_start=start, input_cut=m.origin_partition.cut)


def strict_gap(inst: IlpInstance) -> float:
    """Smallest meaningful objective improvement: 1 for integer weights."""
    if _all_integral(w for _, _, w in inst.edges) and float(inst.offset).is_integer():
        return 1.0
    return inst.strict_gap


def add_objective_bound(inst: IlpInstance, mode: ObjectiveBound, input_cut: float) -> IlpInstance:
    """Forbid solutions worse than (or, strictly, not better than) ``input_cut``."""
    if mode is ObjectiveBound.NONE:
        return dataclasses.replace(inst, objective_bound=mode, objective_limit=None)
    limit = input_cut if mode is ObjectiveBound.LESS_OR_EQUAL else input_cut - strict_gap(inst)
    return dataclasses.replace(inst, objective_bound=mode, objective_limit=limit, input_cut=input_cut)


def build_ilp(m: CoarseModel, options: IlpOptions | None = None) -> IlpInstance:
    options = options or IlpOptions()
    inst = dataclasses.replace(basic_instance(m), strict_gap=options.strict_gap)
    if options.symmetry_breaking:
        inst = apply_symmetry_breaking(inst)
    if options.start_solution:
        inst = set_start_solution(inst, m)
    if options.objective_bound is not ObjectiveBound.NONE:
        inst = add_objective_bound(inst, options.objective_bound, m.origin_partition.cut)
    return inst


# -------------------------------------------------------------------- export

_MAX_LINE = 200


def _fmt(x: float) -> str:
    return str(int(x)) if float(x).is_integer() else repr(float(x))


def _linear(coeffs: list[tuple[str, float]]) -> list[str]:
    terms = []
    for i, (name, coef) in enumerate(coeffs):
        sign = "-" if coef < 0 else "+"
        mag = _fmt(abs(coef))
        term = f"{mag} {name}" if i == 0 and coef >= 0 else f"{sign} {mag} {name}"
        terms.append(term)
    return terms


def _wrap(head: str, terms: list[str], tail: str = "") -> list[str]:
    lines = []
    line = head
    for term in terms:
        if len(line) + len(term) + 1 > _MAX_LINE and line.strip():
            lines.append(line)
            line = "   "
        line += " " + term
    line += tail
    lines.append(line)
    return lines


def format_lp(inst: IlpInstance) -> str:
    """The instance in CPLEX LP text format."""
    out = [
        f"\\ k={inst.k} vertices={inst.n_vertices} edge_variables={len(inst.edges)}",
        f"\\ L_max={_fmt(inst.l_max)}",
        f"\\ objective constant {_fmt(inst.offset)}",
        "Minimize",
    ]
    objective = _linear([(e_name(u, v), w) for u, v, w in inst.edges])
    out += _wrap(" obj:", objective) if objective else [" obj: 0"]
    out.append("Subject To")
    for i, row in enumerate(inst.rows()):
        terms = _linear(row.coeffs) or ["0 " + x_name(0, 0)]
        out += _wrap(f" c{i}:", terms, f" {row.sense} {_fmt(row.rhs)}")
    fixed = inst.fixed_values()
    if fixed:
        out.append("Bounds")
        out += [f" {name} = {val}" for name, val in fixed.items()]
    out.append("Binaries")
    out += _wrap("", inst.variables())
    out.append("End")
    return "\n".join(out) + "\n"


def export_lp(inst: IlpInstance, path: str | os.PathLike) -> None:
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(format_lp(inst))
