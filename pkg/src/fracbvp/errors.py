"""
Exceptions raised by fracbvp
"""


class FracBvpError(Exception):
    """Base class of every error raised on purpose by this package."""


class DomainError(FracBvpError, ValueError):
    """An argument is outside the domain an operation is defined on."""


class RegimeError(FracBvpError, ValueError):
    """The parameters (alpha, beta, eta) are outside the positivity regime."""


class ConditionError(FracBvpError, ValueError):
    """A standing assumption of the index conditions fails (e.g. lambda~[gamma] >= 1)."""


class NonlinearityError(FracBvpError, ArithmeticError):
    """The nonlinearity returned a negative or non-finite value."""


class NumericError(FracBvpError, ArithmeticError):
    """An iterate or intermediate quantity stopped being finite."""


class ConfigError(FracBvpError, ValueError):
    """The run configuration is missing keys or has invalid values."""


class ExpressionError(FracBvpError, ValueError):
    """Base class for errors in user supplied expressions.

    Args:
        message (str): human readable description
        offset (int): byte offset into the source where the error was found
    """

    def __init__(self, message: str, offset: int = 0):
        super().__init__("{} (at offset {})".format(message, offset))
        self.offset = offset


class ExprSyntaxError(ExpressionError):
    """Malformed expression source."""


class UnknownIdentifierError(ExpressionError):
    """Identifier that is neither a variable nor a known function."""


class ArityError(ExpressionError):
    """Function called with the wrong number of arguments."""
