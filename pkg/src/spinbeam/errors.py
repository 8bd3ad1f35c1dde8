"""Exception hierarchy shared across the package."""


class SpinbeamError(Exception):
    """Base class for all package-specific errors."""


class InvalidParameterError(SpinbeamError, ValueError):
    """A physical or geometric parameter is outside its valid range."""


class RankDeficiencyError(SpinbeamError):
    """A linear solve failed because the system matrix is singular.

    Carries the (approximate) null direction so the caller can see which
    combination of unknowns is undetermined.
    """

    def __init__(self, message, null_direction=None):
        super().__init__(message)
        self.null_direction = null_direction


class ModelInvalidError(SpinbeamError):
    """The small-deformation assumption does not hold at the requested
    equilibrium.  Carries the offending static elastic coordinates."""

    def __init__(self, message, q_static=None):
        super().__init__(message)
        self.q_static = q_static


class PortError(SpinbeamError):
    """Illegal port operation: wrong channel group, double closure,
    reduction of an already reduced block, and similar contract breaches."""


class TopologyError(SpinbeamError):
    """The interconnection graph is not a tree rooted at a main body."""


class AlgebraicLoopError(SpinbeamError):
    """A feedback interconnection has a singular (or numerically singular)
    algebraic loop matrix."""


class UnsupportedEquilibriumError(SpinbeamError):
    """The requested equilibrium is outside the linearization assumptions
    (e.g. main-body spin not aligned with the z body axis)."""
