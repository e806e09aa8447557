"""Exception types. The CLI maps each class to its own exit code."""


class CVDEError(Exception):
    """Base class for all errors raised by this package."""

    exit_code = 3


class DataError(CVDEError, ValueError):
    """Malformed or inconsistent input data (bad files, dimension mismatch, empty sets)."""

    exit_code = 2


class NumericError(CVDEError, ArithmeticError):
    """A computation could not produce a usable number (degenerate bandwidth, zero mass)."""

    exit_code = 3
