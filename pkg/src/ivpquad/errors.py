class IvpQuadError(Exception):
    """Base class for all errors raised by ivpquad."""


class ConfigurationError(IvpQuadError, ValueError):
    pass


class IntegrandError(IvpQuadError):
    """The integrand returned a non-finite value where one was required."""

    def __init__(self, message, abscissa=None):
        super().__init__(message)
        self.abscissa = abscissa


class StiffnessError(IvpQuadError):
    """An element could not be accepted within the bisection budget."""

    def __init__(self, message, abscissa=None):
        super().__init__(message)
        self.abscissa = abscissa


class NonConvergence(IvpQuadError):
    """The element budget ran out; ``partial`` holds the solution so far."""

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class DomainError(IvpQuadError, ValueError):
    pass


class SolutionFormatError(IvpQuadError, ValueError):
    """A serialized solution could not be loaded."""
