"""Exception types raised across the package."""


class SvmdError(Exception):
    """Base class for all package errors."""


class InvalidInputError(SvmdError, ValueError):
    """Input violates a documented precondition."""


class DegenerateSpectrumError(SvmdError, ArithmeticError):
    """A quantity is undefined because a spectrum (or reference) has zero power."""


class NoPeakError(SvmdError):
    """No admissible spectral peak is left to initialise an extraction."""
