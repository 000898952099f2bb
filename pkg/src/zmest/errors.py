"""Exception hierarchy shared by every zmest module."""


class ZmestError(Exception):
    """Base class for all library errors."""


class StructuralError(ZmestError, ValueError):
    """Inputs are dimensionally inconsistent or malformed."""


class AlphabetMismatchError(ZmestError, ValueError):
    pass


class InvalidModelError(ZmestError, ValueError):
    """A model fails the checks required by the requested operation."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class ReducibleChainError(ZmestError, ValueError):
    def __init__(self, message, unreachable=()):
        super().__init__(message)
        self.unreachable = tuple(unreachable)


class BudgetExceededError(ZmestError, RuntimeError):
    """An exhaustive enumeration would exceed its configured size bound."""


class ContractViolation(ZmestError, RuntimeError):
    pass


class FitError(ZmestError, RuntimeError):
    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best
