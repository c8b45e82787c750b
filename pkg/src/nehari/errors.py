"""Exception types shared across the package."""


class NehariError(Exception):
    """Base class for all package errors."""


class ConfigurationError(NehariError):
    """A grid, degree or tolerance setting violates a precondition."""


class DegenerateInputError(NehariError):
    """The input is identically zero, rank-deficient or otherwise unusable."""


class CannotDetermineError(NehariError):
    """A discrete computation cannot be certified (e.g. near-vanishing winding)."""


class FactorizationError(NehariError):
    """A factorization step failed its residual checks.

    Carries a ``diagnostics`` dict with the offending residuals so callers can
    report what went wrong instead of silently accepting a bad factor.
    """

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = dict(diagnostics or {})


class SymbolFormatError(NehariError):
    """A symbol file does not conform to the JSON term-list format."""
