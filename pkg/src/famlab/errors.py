"""Exception hierarchy shared by every famlab module."""


class FamlabError(Exception):
    """Base class for all library errors."""


class StructureError(FamlabError, ValueError):
    """Operands do not live in the same structure (atom space, tree, level)."""


class CapacityError(FamlabError):
    """An exhaustive enumeration was asked to exceed its configured bound."""


class IllegalConditioningError(FamlabError, ZeroDivisionError):
    """Conditioning on an event of measure zero."""


class RefinementNeeded(FamlabError, KeyError):
    """A cylinder mentions a coordinate outside the algebra's support."""


class UnsupportedSetError(FamlabError, TypeError):
    """A set of indices cannot be expressed in the eventually-periodic algebra."""


class IllegalRegionError(FamlabError, ValueError):
    """A region of the index set has measure zero where positive mass is required."""


class NotMaterializedError(FamlabError, IndexError):
    """A tree level beyond the declared height was requested."""


class PreconditionError(FamlabError, ValueError):
    """A documented hypothesis of a construction does not hold on the input."""


class InvariantViolation(FamlabError, RuntimeError):
    """A construction that is guaranteed to succeed did not; indicates a bug."""


class DensityFailure(InvariantViolation):
    """No member of the dense set was found below a required condition."""


class CoverageError(FamlabError):
    """Some positive element is not covered by any Q-set of the density family."""

    def __init__(self, message, uncovered=()):
        super().__init__(message)
        self.uncovered = list(uncovered)


class NoWitnessFound(FamlabError):
    """Sampling budget exhausted before a witness path was found."""

    def __init__(self, message, stats=None):
        super().__init__(message)
        self.stats = dict(stats or {})
