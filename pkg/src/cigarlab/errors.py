"""Exception hierarchy shared by every module."""


class GeometryError(ValueError):
    """Base class for all errors raised by cigarlab."""


class DomainError(GeometryError):
    """A point lies outside the domain of a chart or transform."""


class ChartMismatchError(GeometryError):
    """Two objects declared in different charts were combined."""


class SingularMetricError(GeometryError):
    """The metric determinant is (numerically) zero."""


class StepSizeError(GeometryError):
    """Adaptive differencing could not reach the requested tolerance."""


class DegenerateRhoError(GeometryError):
    """rho = 1/2 makes the potential field vanish identically."""


class ConstraintError(GeometryError):
    """Field parameters violate a constraint on the requested domain."""


class UnknownFieldError(GeometryError, KeyError):
    """No catalog entry with the requested name."""


class DegenerateSampleError(GeometryError):
    """The sample cannot support a conclusive classification."""


class FactorUndefinedError(GeometryError, ZeroDivisionError):
    """A closed-form factor divides by a quantity that vanishes at the point."""


class ParameterInconsistencyError(GeometryError):
    """Parameters that must satisfy an algebraic relation do not."""


class TipProximityError(GeometryError):
    """A non-radial geodesic state came too close to the tip s = 0."""


class EmptySampleError(GeometryError):
    """An operation over a sample received no points."""
