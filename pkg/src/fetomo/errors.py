"""Exception and warning types shared across the toolkit."""


class FetomoError(Exception):
    """Base class for all toolkit errors."""


class DimensionMismatchError(FetomoError, ValueError):
    """Operands live on incompatible energy windows or grids."""


class DegenerateInputError(FetomoError, ValueError):
    """Input carries no usable information (zero vector, empty spectrum, ...)."""


class UndefinedStatisticError(FetomoError, ValueError):
    """A diagnostic is undefined for the given series (e.g. zero variance)."""


class UndefinedWidthError(FetomoError, ValueError):
    """A density profile has no well-defined full width at half maximum."""


class AmbiguousPeakError(FetomoError, ValueError):
    """Several equal global maxima; the peak walk cannot pick one."""

    def __init__(self, message, peaks):
        super().__init__(message)
        self.peaks = list(peaks)


class CurvatureError(FetomoError, ArithmeticError):
    """A Hessian is indefinite beyond repair (largest eigenvalue <= 0)."""


class FormatError(FetomoError, ValueError):
    """A file does not conform to one of the on-disk formats."""


class TruncationWarning(UserWarning):
    """An energy window is too small for the requested coupling strength."""


class ConvergenceWarning(UserWarning):
    """An iterative routine stopped before reaching its tolerance."""
