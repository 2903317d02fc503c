"""Exception taxonomy shared by every module in the package."""


class PadicFormsError(Exception):
    """Base class for all errors raised by this package."""


class InputError(PadicFormsError, ValueError):
    """Malformed user input: unknown field id, bad element syntax, invalid degree."""


class PrecisionError(PadicFormsError, ArithmeticError):
    """A computation would exceed the precision guaranteed by the representation.

    The remedy is always the same: re-run with a larger bit precision.
    """


class TacticError(PadicFormsError):
    """A contraction constructor was invoked on variables that violate its
    hypothesis (wrong level, wrong coefficient class, wrong field family).

    This is an expected, recoverable condition for search code, not a crash.
    """


class InternalError(PadicFormsError):
    """An invariant that should be unconditionally true was violated; a bug."""
