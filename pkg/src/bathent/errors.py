"""Exception hierarchy shared by all modules."""


class BathentError(Exception):
    """Base class for every error raised by the package."""


class DomainError(BathentError, ValueError):
    """Argument outside the mathematical domain of a function."""


class ConvergenceError(BathentError, ArithmeticError):
    """An iterative expansion did not converge within its budget."""


class QuadratureError(BathentError, ArithmeticError):
    """Adaptive quadrature could not reach the requested tolerance."""


class NumericalError(BathentError, ArithmeticError):
    """Result failed an internal consistency check."""


class SingularMatrixError(NumericalError):
    """A linear system to be solved is numerically singular."""


class PhysicalityError(NumericalError):
    """A covariance matrix violates the uncertainty principle."""


class StabilityError(NumericalError):
    """Coupled normal modes are unstable (negative squared frequency)."""


class IntegratorError(NumericalError):
    """The ODE integrator failed to advance."""


class BracketError(BathentError, ValueError):
    """A root/threshold search was started without a valid bracket."""


class ConfigError(BathentError, ValueError):
    """Inconsistent solver configuration."""


class ParseError(ConfigError):
    """Malformed configuration file."""

    def __init__(self, message, lineno=None):
        self.lineno = lineno
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)


class ValidationError(ConfigError):
    """Configuration values violate a documented invariant."""
