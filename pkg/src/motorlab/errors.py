"""Exception hierarchy shared across the package.

The CLI maps these onto process exit codes: InputError -> 2,
SolverError (and subclasses) -> 1, OSError -> 3.
"""


class MotorLabError(Exception):
    """Base class for all package errors."""


class InputError(MotorLabError, ValueError):
    """Invalid user input: config contents, argument ranges, domain violations."""


class SolverError(MotorLabError, RuntimeError):
    """Numerical failure: singular systems, lost positivity, bad residuals."""


class NonConvergenceError(SolverError):
    """Iteration failed to reach tolerance; carries the last residual."""

    def __init__(self, message, residual=None, iterations=None):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations
