"""Exception hierarchy shared by every module.

The CLI maps :class:`UsageError` to exit code 1 and every other
:class:`WKBError` to exit code 2.
"""


class WKBError(Exception):
    """Base class for all errors raised by this package."""


class UsageError(WKBError):
    """Invalid configuration or argument combination."""


class ContractError(WKBError, ValueError):
    """An operation was called with arguments violating its precondition."""


class NumericDomainError(WKBError, ArithmeticError):
    """A numeric operation left its mathematical domain."""


class JetDivisionError(NumericDomainError, ZeroDivisionError):
    """Division by a jet whose constant term is (numerically) zero."""


class ExprSyntaxError(WKBError, ValueError):
    """Malformed coefficient expression.

    ``position`` is the 0-based character offset of the offending token.
    """

    def __init__(self, message, position):
        super().__init__(f"{message} at position {position}")
        self.position = position


class ExprDomainError(NumericDomainError):
    """Expression could not be evaluated at the requested point."""

    def __init__(self, message, subexpression=None, x=None):
        super().__init__(message)
        self.subexpression = subexpression
        self.x = x


class NonPositiveCoefficientError(NumericDomainError):
    """a(x) <= 0 somewhere on the interval (turning point or evanescent zone)."""

    def __init__(self, message, x=None):
        super().__init__(message)
        self.x = x


class ResolutionError(NumericDomainError):
    """Chebyshev tail coefficients show the grid does not resolve a series."""


class ResolutionWarning(UserWarning):
    """Non-fatal counterpart of :class:`ResolutionError`."""


class IllConditionedMatchingError(NumericDomainError):
    """The initial-condition matching denominator is too close to zero."""


class ExponentOverflowError(NumericDomainError):
    """A WKB exponent has a real part beyond the representable range."""


class TruncationBoundaryError(NumericDomainError):
    """Selected truncation order coincides with the largest available order."""


class DegenerateFitError(NumericDomainError):
    """Not enough nonzero norms to fit a growth law."""


class OracleError(NumericDomainError):
    """A reference solution could not be computed to the requested tolerance."""
