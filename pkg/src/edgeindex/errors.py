"""Exception and warning types shared across the package."""


class EdgeIndexError(Exception):
    """Base class for all package errors."""


class DomainError(EdgeIndexError, ValueError):
    """An argument lies outside the domain where the quantity is defined."""


class OverflowScaled(RuntimeWarning):
    """Emitted when an evaluator returns exponentially scaled values."""


class GridMismatch(EdgeIndexError, ValueError):
    pass


class DiagonalError(EdgeIndexError, ValueError):
    """The Green's kernel was requested on its diagonal."""


class SupportError(EdgeIndexError, ValueError):
    """A right-hand side is not compactly supported inside the grid."""


class NoConventionConverges(EdgeIndexError):
    """Neither sign convention turns the Green's operator into a right inverse."""


class EmptyGrid(EdgeIndexError, ValueError):
    pass


class NormTooLarge(EdgeIndexError, ValueError):
    pass


class NotIdempotent(EdgeIndexError, ValueError):
    pass


class EmptySpectrum(EdgeIndexError, ValueError):
    pass


class TruncationError(EdgeIndexError, ValueError):
    """A spectrum query fell beyond the recorded truncation cutoff."""


class GeneratorClash(EdgeIndexError, ValueError):
    pass


class ShapeError(EdgeIndexError, ValueError):
    pass


class HypothesisViolated(EdgeIndexError):
    pass


class PiResidue(EdgeIndexError):
    """A characteristic number kept a nonzero power of 2*pi."""


class QuadratureMismatch(EdgeIndexError):
    pass


class IdentityViolation(EdgeIndexError):
    pass
