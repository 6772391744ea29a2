"""Exception hierarchy.

Every error raised on purpose by the package derives from :class:`PriometError`
(itself a ``ValueError``) so callers and the CLI can separate input problems
from bugs.
"""


class PriometError(ValueError):
    """Base class for all package errors."""


class DisconnectedGraph(PriometError):
    pass


class NegativeWeight(PriometError):
    pass


class DimensionMismatch(PriometError):
    pass


class InvalidTree(PriometError):
    pass


class InvalidOrdering(PriometError):
    pass


class SchemeMismatch(PriometError):
    pass


class BadEpsilon(PriometError):
    pass


class UnsupportedNorm(PriometError):
    pass


class ScheduleExhausted(PriometError):
    pass


class BadParameter(PriometError):
    pass


class EmptyTerminals(PriometError):
    pass


class SameVertex(PriometError):
    pass


class NoSeparator(PriometError):
    pass


class SizeMismatch(PriometError):
    pass


class ExpansionViolation(PriometError):
    pass


class NotAnEmbeddingOfGPrime(PriometError):
    pass


class RetriesExhausted(PriometError):
    pass


class SchemeRequiresTree(PriometError):
    pass


class FormatError(PriometError):
    """Malformed or unrecognised input file."""
