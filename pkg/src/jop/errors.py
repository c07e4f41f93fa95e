"""Exception hierarchy shared by all jop modules."""


class JopError(Exception):
    """Base class for all library errors."""


class ZeroPolynomial(JopError, ValueError):
    pass


class NonIntegrable(JopError, ValueError):
    """The weight violates integrability or moment-existence conditions."""


class ConvergenceFailure(JopError, RuntimeError):
    pass


class InsufficientMoments(JopError, ValueError):
    pass


class IndexOutOfRange(JopError, IndexError):
    pass


class UnsupportedDimension(JopError, ValueError):
    pass


class OverlappingIntervals(JopError, ValueError):
    pass


class NotK2(JopError, ValueError):
    pass


class CholeskyFailure(JopError, ValueError):
    """Gram matrix is not positive definite, so the measure is invalid."""


class IncompleteSystem(JopError, RuntimeError):
    def __init__(self, message, found=None, expected=None):
        super().__init__(message)
        self.found = found
        self.expected = expected


class DegenerateVector(JopError, ValueError):
    pass


class DuplicateRoots(JopError, ValueError):
    pass


class UnderdeterminedSystem(JopError, ValueError):
    pass


class ComplexEigenvalues(JopError, ValueError):
    pass


class DivisionRemainder(JopError, RuntimeError):
    pass


class ConfigError(JopError, ValueError):
    pass
