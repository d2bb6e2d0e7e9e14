"""Exception types shared across the package."""


class DrspaceError(Exception):
    """Base class for package errors."""


class DomainError(DrspaceError, ValueError):
    """Input outside the mathematical domain of an operation."""


class OutsideCertifiedDomainError(DomainError):
    """Input where an evaluator cannot certify its accuracy."""


class PrecisionLossError(DrspaceError, ArithmeticError):
    """Requested accuracy not reached; ``estimate`` holds the achieved error."""

    def __init__(self, message: str, estimate: float):
        super().__init__(message)
        self.estimate = estimate


class UnsupportedSpaceError(DomainError):
    """Space instance outside the supported (m, k) families."""


class UncalibratedError(DrspaceError, RuntimeError):
    """Inverse transform requested before the inversion constant was calibrated."""


class BudgetExhaustedError(DrspaceError, RuntimeError):
    """Monte-Carlo budget used up before the requested precision."""
