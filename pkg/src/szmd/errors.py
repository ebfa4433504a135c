"""Exception types shared across the package."""


class SzmdError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(SzmdError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class GrowthPreconditionError(DomainError):
    """The operator index violates n > 2A for the declared growth class."""

    def __init__(self, n, growth_a):
        super().__init__(
            f"operator index n={n!r} violates the precondition n > 2A "
            f"(declared growth constant A={growth_a!r})"
        )
        self.n = n
        self.growth_a = growth_a
        self.precondition = "n > 2A"


class ArityError(SzmdError, ValueError):
    """A derivative sequence has the wrong length for the requested order."""


class ExpressionError(SzmdError, ValueError):
    """Base class for expression-language errors."""


class ExpressionSyntaxError(ExpressionError):
    """Parse failure, carrying the byte offset and the expected tokens."""

    def __init__(self, message, offset, expected=None):
        detail = f"syntax error at offset {offset}: {message}"
        if expected:
            detail += f" (expected {expected})"
        super().__init__(detail)
        self.offset = offset
        self.expected = expected


class UnknownIdentifierError(ExpressionSyntaxError):
    """An identifier other than ``x`` and the known function names."""


class EvalDomainError(DomainError):
    """Evaluation hit a singular point (division by zero, sqrt of a negative)."""

    def __init__(self, message, offset=-1):
        if offset >= 0:
            message = f"{message} (node at offset {offset})"
        super().__init__(message)
        self.offset = offset


class NonDifferentiableError(ExpressionError):
    """Symbolic differentiation of a non-smooth node (abs) was requested."""


class QuadratureConvergenceError(SzmdError, RuntimeError):
    """The panel budget was exhausted before the requested tolerance."""

    def __init__(self, achieved, required, panels):
        super().__init__(
            f"quadrature did not converge: error estimate {achieved:.3e} "
            f"exceeds tolerance {required:.3e} after {panels} panels"
        )
        self.achieved = achieved
        self.required = required
        self.panels = panels


class DegenerateFitError(SzmdError, ValueError):
    """A log-log order fit was requested on non-positive error values."""
