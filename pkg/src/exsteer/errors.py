"""Exception hierarchy shared by all exsteer modules."""


class ExsteerError(Exception):
    """Base class for every error raised by the package."""


class ParameterError(ExsteerError, ValueError):
    """A scalar parameter lies outside its admissible range."""


class GridMismatchError(ExsteerError, ValueError):
    """Two operands live on different grids (or different restrictions)."""


class KindMismatchError(ExsteerError, TypeError):
    """A scalar state was given to a two-stream system, or vice versa."""


class SingularityError(ExsteerError, ArithmeticError):
    """The partial Gramian is not invertible for the requested arguments."""


class RegistryError(ExsteerError, KeyError):
    """Unknown name in the nonlinearity or function-preset registry."""


class ConvergenceError(ExsteerError, RuntimeError):
    """Picard iteration did not reach its tolerance.

    Attributes
    ----------
    gap : float
        Sup-norm gap between the last two iterates.
    iterations : int
        Number of iterations performed.
    stage : int or None
        Dyadic stage index, filled in by the steering driver.
    """

    def __init__(self, message, gap, iterations, stage=None):
        super().__init__(message)
        self.gap = gap
        self.iterations = iterations
        self.stage = stage

    def __str__(self):
        base = super().__str__()
        if self.stage is not None:
            base = f"stage {self.stage}: {base}"
        return f"{base} (gap={self.gap:.3e} after {self.iterations} iterations)"


class ConfigError(ExsteerError, ValueError):
    """One or more problems in a scenario document; all are listed."""

    def __init__(self, problems):
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


class RunError(ExsteerError, RuntimeError):
    """A scenario command failed; wraps the underlying module error."""

    def __init__(self, command, cause):
        self.command = command
        self.cause = cause
        super().__init__(f"{command}: {type(cause).__name__}: {cause}")
