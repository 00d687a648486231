"""Exception hierarchy shared by all modules."""


class TCRCError(Exception):
    """Base class for every error raised by this package."""


class ParameterError(TCRCError, ValueError):
    """An argument is outside its admissible range."""


class ShapeError(ParameterError):
    """Vector or matrix dimensions do not match."""


class DomainError(ParameterError):
    """A value left the domain of a function (e.g. ``arccos``)."""


class CapacityError(ParameterError):
    """A series is too short for the requested windows."""


class DegenerateSeriesError(ParameterError):
    """A series has zero variance and cannot be standardized."""


class InsufficientHistoryError(ParameterError):
    """Not enough past samples to form a stacked input."""


class ConfigurationError(ParameterError):
    """A model or experiment configuration is inconsistent."""


class SpectralRadiusZeroError(ParameterError):
    """The matrix has no nonzero eigenvalue to rescale."""


class NumericError(TCRCError, ArithmeticError):
    """Non-finite numbers where finite ones are required."""


class DivergenceError(NumericError):
    """An iteration produced a non-finite state."""


class NoViableConfigError(TCRCError):
    """Every search trial diverged.

    The full trial log is kept on ``self.log``.
    """

    def __init__(self, message, log=None):
        super().__init__(message)
        self.log = log if log is not None else []
