"""Exception hierarchy shared by all ilprefine modules."""


class IlpRefineError(Exception):
    """Base class for all errors raised by ilprefine."""


class GraphFormatError(IlpRefineError, ValueError):
    """Malformed METIS graph file.

    Attributes:
        line: 1-based line number of the offending input line, if known.
    """

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class AsymmetricAdjacencyError(GraphFormatError):
    """An adjacency entry (u, v, w) has no matching (v, u, w)."""


class PartitionFormatError(IlpRefineError, ValueError):
    """Malformed partition file or partition vector."""


class LengthMismatchError(PartitionFormatError):
    """Partition length differs from the number of vertices."""


class UnbalancedInputError(IlpRefineError, ValueError):
    """Input partition violates the balance constraint."""


class InfeasibleFixingError(IlpRefineError):
    """A super-vertex pinned to its block is heavier than the block limit."""


class CapExceededError(IlpRefineError):
    """Exhaustive enumeration would exceed the configured cap."""


class BootstrapFailedError(IlpRefineError):
    """The greedy bootstrap partitioner could not place every vertex."""
