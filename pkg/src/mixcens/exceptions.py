"""Exception types raised by mixcens."""


class MixcensError(Exception):
    """Base class for package errors."""


class DataError(MixcensError, ValueError):
    """Input data violate a precondition (length, sign, parse failure)."""


class DegenerateDataError(DataError):
    """Data carry no information about the shape parameter."""


class ConvergenceError(MixcensError, RuntimeError):
    """A numerical routine failed to reach its tolerance.

    ``partial`` holds whatever value was available when the routine gave up.
    """

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial
