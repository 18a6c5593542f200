"""Improve balanced k-way graph partitions by solving a contracted binary
program around the cut to optimality."""

from .coarse import CoarseModel, build_model, induced_model_partition, project_solution
from .errors import (
    AsymmetricAdjacencyError,
    BootstrapFailedError,
    CapExceededError,
    GraphFormatError,
    IlpRefineError,
    InfeasibleFixingError,
    LengthMismatchError,
    PartitionFormatError,
    UnbalancedInputError,
)
from .graph import (
    Graph,
    Partition,
    boundary_vertices,
    cut_value,
    gain,
    is_balanced,
    l_max,
    load_graph,
    parse_metis,
    read_partition,
    write_graph,
    write_partition,
)
from .ilp import (
    IlpInstance,
    IlpOptions,
    ObjectiveBound,
    add_objective_bound,
    apply_symmetry_breaking,
    build_ilp,
    export_lp,
    set_start_solution,
)
from .refine import RefineConfig, RunRecord, bootstrap_partition, evaluate, refine
from .report import report_performance
from .selection import (
    KeptSet,
    SelectionStrategy,
    estimate_nonzeros,
    select,
    select_boundary,
    select_gain,
    select_top_vertices,
)
from .solver import SolveResult, SolverConfig, SolveStatus, solve, solve_exhaustive

__version__ = "0.1.0"
