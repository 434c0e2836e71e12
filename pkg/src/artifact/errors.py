"""Exception types shared by the numerical modules."""


class ArtifactError(Exception):
    """Base class for all errors raised by this package."""


class InvalidInputError(ArtifactError, ValueError):
    """Parameters violate an operation's preconditions."""


class PoleProximityError(ArtifactError):
    """A denominator is too close to a zero of a theta function.

    Parameters
    ----------
    where : str
        Human readable name of the offending denominator.
    value : complex
        Its value at the evaluation point.
    """

    def __init__(self, where, value):
        self.where = where
        self.value = value
        super().__init__(f"denominator {where} too close to zero ({abs(value):.3e})")


class TruncationError(ArtifactError):
    """A truncated series did not reach the requested tolerance."""


class DegenerateEigenvalueError(ArtifactError):
    """Two cosets produced the same shift-operator eigenphase."""


class SamplingExhaustedError(ArtifactError):
    """Could not draw enough sample points away from the poles."""


class InternalCheckError(ArtifactError, AssertionError):
    """An internal consistency relation failed; indicates a bug."""


class LimitNotConvergedError(ArtifactError):
    """A limit taken along a decreasing sequence did not settle."""
