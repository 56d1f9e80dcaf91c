"""Exception taxonomy shared across the library."""

from __future__ import annotations


class SplitwidthError(Exception):
    """Base class for all library errors."""


class ModelError(SplitwidthError):
    """A model or graph file is malformed."""


class NotLinear(ModelError):
    """The successor relation is not a single linear chain."""


class BackwardConstraint(ModelError):
    """A timing constraint points backward or is a self-loop."""


class LabelMismatch(SplitwidthError):
    """A timed word's letters do not match the word's non-silent labels."""


class Unrealizable(SplitwidthError):
    """No timestamp map satisfies the timing constraints.

    ``cycle`` holds one violated cycle as a list of (src, tgt, reason)
    edges, alternating order edges and constraint bounds.
    """

    def __init__(self, cycle):
        self.cycle = list(cycle)
        super().__init__("unrealizable: violated cycle %s" % (self.cycle,))


class WellTimedViolation(SplitwidthError):
    """Base class for well-timedness violations."""


class StackCrossing(WellTimedViolation):
    def __init__(self, stack, edges):
        self.stack = stack
        self.edges = edges
        super().__init__(f"stack {stack} edges cross: {edges}")


class ClockMatchViolation(WellTimedViolation):
    def __init__(self, clock, edges):
        self.clock = clock
        self.edges = edges
        super().__init__(f"clock {clock} constraints badly matched: {edges}")


class TooManyRounds(WellTimedViolation):
    def __init__(self, needed, allowed):
        self.needed = needed
        self.allowed = allowed
        super().__init__(f"needs {needed} rounds, only {allowed} allowed")


class ColorClash(SplitwidthError):
    """Disjoint union applied to terms with overlapping active colors."""


class TermSyntaxError(SplitwidthError):
    """Term text could not be parsed; ``pos`` is the character offset."""

    def __init__(self, message, pos):
        self.pos = pos
        super().__init__(f"{message} (at offset {pos})")


class WidthExceeded(SplitwidthError):
    """A split-tree is wider than the color budget allows."""


class IllFormedRun(SplitwidthError):
    """A transition sequence does not form an accepting run."""


class InternalInconsistency(SplitwidthError):
    """A witness failed re-validation; indicates a bug, never expected."""
