"""Exception hierarchy shared by all solver modules."""


class PadpdError(Exception):
    """Base class for every error raised by this package."""


class InvalidFunctionError(PadpdError, ValueError):
    """A function was constructed with parameters that break convexity."""


class OracleFailure(PadpdError, RuntimeError):
    """The numeric prox oracle ran out of sweeps before reaching its tolerance."""


class ProblemShapeError(PadpdError, ValueError):
    """Matrix, vector or function dimensions are inconsistent."""


class ConfigError(PadpdError, ValueError):
    """Invalid solver settings (step size, penalty, safety factor, ...)."""


class ConvergenceError(PadpdError, RuntimeError):
    """An inner iterative routine exhausted its budget.

    The best estimate reached so far is kept on ``estimate``.
    """

    def __init__(self, message, estimate=None):
        super().__init__(message)
        self.estimate = estimate


class DivergenceError(PadpdError, RuntimeError):
    """An iterate became non-finite or blew past the divergence threshold.

    ``state`` holds the last finite solver state and ``records`` the trace
    collected up to that point.
    """

    def __init__(self, message, state=None, records=None):
        super().__init__(message)
        self.state = state
        self.records = records if records is not None else []


class AssumptionViolation(PadpdError, ValueError):
    """A consensus weight matrix or graph violates a standing assumption."""

    def __init__(self, message, violations=()):
        super().__init__(message)
        self.violations = list(violations)


class SubproblemError(PadpdError, RuntimeError):
    """An ADMM block subproblem cannot be solved in closed form."""


class GeneratorError(PadpdError, RuntimeError):
    """A random problem generator could not build a well-posed instance."""


class ProblemFileError(PadpdError, ValueError):
    """A problem file failed to parse or validate."""

    def __init__(self, message, line=None, path=None):
        where = ""
        if path is not None:
            where += f"{path}"
        if line is not None:
            where += f":{line}"
        super().__init__(f"{where}: {message}" if where else message)
        self.line = line
        self.path = path
