"""Exception hierarchy.

Two families exist so that callers (and the command line) can tell bad input
apart from numerical breakdown: :class:`ValidationError` for malformed or
inconsistent data, :class:`NumericalError` for operations that cannot be
carried out on otherwise well-formed data.
"""


class ShapeTransportError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(ShapeTransportError, ValueError):
    """Input data violates a structural requirement."""


class NumericalError(ShapeTransportError, ArithmeticError):
    """A numerical operation is undefined for the given data."""


class InvalidConfiguration(ValidationError):
    pass


class EmptyTrajectory(ValidationError):
    pass


class CardinalityMismatch(ValidationError):
    pass


class ParseError(ValidationError):
    pass


class SchemaError(ValidationError):
    pass


class SingularConfiguration(NumericalError):
    """Landmarks are collinear (or coincident), so X^T X is not invertible."""


class SingularMatrix(NumericalError):
    pass


class NoConvergence(NumericalError):
    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class DegenerateShape(NumericalError):
    """Centroid size is zero."""


class DuplicateLandmarks(NumericalError):
    pass


class SingularSystem(NumericalError):
    pass


class AntipodalConfigurations(NumericalError):
    """The size-and-shape geodesic between two configurations is undefined."""


class SingularParameter(NumericalError):
    pass
