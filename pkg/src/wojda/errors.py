"""Exception hierarchy shared by every packer and oracle."""

from __future__ import annotations


class PackingError(Exception):
    """Base class for all errors raised by :mod:`wojda`."""


class InvalidDigraph(PackingError, ValueError):
    """A digraph was built from a self-loop, a duplicate or an out-of-range arc."""


class ShapeError(PackingError, ValueError):
    """An injection's orders do not match the digraphs it is applied to."""


class PartialMapError(PackingError, ValueError):
    """A total map was required but some source vertex is unassigned."""


class InjectivityError(PackingError, ValueError):
    """Two source vertices were sent to the same target vertex."""


class OverlapError(PackingError, ValueError):
    """Partial injections that should have disjoint domains share a vertex."""


class RangeError(PackingError, ValueError):
    """A numeric argument is outside the range an operation supports."""


class ScaleError(RangeError):
    """An exhaustive routine was asked to work beyond its feasible size."""


class HypothesisError(PackingError):
    """The inequality a construction relies on does not hold for the input."""

    def __init__(self, message: str, lhs=None, rhs=None):
        super().__init__(message)
        self.lhs = lhs
        self.rhs = rhs


class RegimeError(HypothesisError):
    """(n, m) lies outside the regime m >= 93, n >= 31 m."""


class DecompositionError(PackingError):
    pass


class StageExhausted(PackingError):
    """The greedy forest packer found no admissible target vertex."""

    def __init__(self, stage: int, vertex: int, message: str = ""):
        super().__init__(message or f"stage {stage}: no admissible target for forest vertex {vertex}")
        self.stage = stage
        self.vertex = vertex


class InternalInvariantError(PackingError, AssertionError):
    """A proven inequality or a post-condition failed at runtime (a bug)."""


class NotEnoughLowDegree(PackingError):
    pass


class StructureError(PackingError):
    """The extremal witness violates its own construction."""


class BudgetExceeded(PackingError):
    """An exhaustive search ran out of nodes or time before reaching a verdict."""


class ParseError(PackingError, ValueError):
    def __init__(self, message: str, line: int | None = None):
        super().__init__(f"line {line}: {message}" if line is not None else message)
        self.line = line
