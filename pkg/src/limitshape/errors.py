"""Exception hierarchy shared across the package."""


class LimitShapeError(Exception):
    """Base class for all package errors."""


class NonMonotoneDerivative(LimitShapeError):
    """Root bracketing failed: the supplied derivative is not monotone."""


class QuadratureFailure(LimitShapeError):
    """Adaptive quadrature did not reach the requested tolerance."""


class SlopeOutOfRange(LimitShapeError):
    """A slope argument lies outside the curve's tangent-slope range."""


class InvalidPresetParameter(LimitShapeError):
    """Preset curve parameters outside their valid range."""


class NotMonotone(LimitShapeError):
    """Tabulated curve data is not strictly increasing."""


class NotConvex(LimitShapeError):
    """Tabulated curve data (or its interpolant) is not strictly convex."""


class CurvatureFloorViolated(LimitShapeError):
    """Curvature drops below the required positive floor."""


class LimitTooLarge(LimitShapeError):
    """Sieve limit exceeds the configured memory budget."""


class TailBoundViolated(LimitShapeError):
    """A truncated lattice sum cannot certify its tail tolerance."""


class ParameterOutOfRange(LimitShapeError):
    """A distribution parameter lies outside its admissible range."""


class SingularCovariance(LimitShapeError):
    """Covariance matrix is singular or not positive definite."""


class EmptyPath(LimitShapeError):
    """A path metric received an empty polyline."""


class Exhausted(LimitShapeError):
    """Rejection sampling hit the attempt budget without an acceptance.

    Carries the attempt count and closest-miss diagnostics.
    """

    def __init__(self, attempts, diagnostics=None):
        super().__init__(f"no acceptance within {attempts} attempts")
        self.attempts = attempts
        self.diagnostics = diagnostics


class StateSpaceTooLarge(LimitShapeError):
    """Exhaustive enumeration would exceed the state-space budget."""


class InsufficientReplicates(LimitShapeError):
    """Too few replicates for the requested empirical comparison."""


class IoFailure(LimitShapeError):
    """Report emission failed at the filesystem level."""
