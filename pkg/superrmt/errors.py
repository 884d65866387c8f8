"""
Exception hierarchy shared by every app.

Each error carries the process exit code the command line reports for it:
1 for usage problems, 2 for numerical failures, 3 for output failures.
"""


class WorkbenchError(Exception):
    exit_code = 2


class UsageError(WorkbenchError, ValueError):
    """Bad input: unknown class label, wrong half-plane, malformed config."""
    exit_code = 1


class UnsupportedClassError(UsageError):
    pass


class PoolError(WorkbenchError):
    """Grassmann elements from different generator pools were combined."""


class SingularityError(WorkbenchError, ArithmeticError):
    """A body that has to be inverted is zero or singular."""


class NumericalError(WorkbenchError):
    pass


class QuadratureError(NumericalError):
    def __init__(self, message, partial=None, achieved=None):
        super().__init__(message)
        self.partial = partial
        self.achieved = achieved


class DivergenceError(NumericalError):
    pass


class NormalizationDriftError(NumericalError):
    pass


class OutputError(WorkbenchError, OSError):
    exit_code = 3

    def __init__(self, message, path=None):
        super().__init__(message)
        self.path = path

    def __str__(self):
        base = super().__str__()
        return f"{base} [{self.path}]" if self.path else base
