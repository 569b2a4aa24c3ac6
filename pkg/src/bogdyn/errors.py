"""Exception and warning types shared across the package."""


class BogdynError(Exception):
    """Base class for all errors raised by this package."""


class ConfigurationError(BogdynError, ValueError):
    """Invalid parameters; ``field`` names the offending config path when known."""

    def __init__(self, message, field=None):
        self.field = field
        if field is not None:
            message = f"{field}: {message}"
        super().__init__(message)


class ContractError(BogdynError, ValueError):
    """An input violates a documented precondition of an operation."""


class CapacityError(BogdynError):
    """A Fock space would exceed the configured memory cap."""

    def __init__(self, dimension, cap):
        self.dimension = dimension
        self.cap = cap
        super().__init__(f"Fock space dimension {dimension} exceeds cap {cap}")


class NumericalBlowupError(BogdynError, ArithmeticError):
    """Non-finite values appeared during time stepping."""

    def __init__(self, message, time):
        self.time = time
        super().__init__(f"{message} (t={time:.6g})")


class KrylovConvergenceError(NumericalBlowupError):
    """The Lanczos exponential did not reach its tolerance."""

    def __init__(self, residual, time=float("nan")):
        self.residual = residual
        super().__init__(f"Krylov exponential did not converge, residual {residual:.3e}", time)


class ResolutionWarning(UserWarning):
    """The scaled interaction is too narrow for the lattice spacing."""


class AccuracyWarning(UserWarning):
    """A finite-difference quantity did not converge under step refinement."""


class TruncationError(BogdynError):
    """A Fock cutoff discards more weight than allowed."""

    def __init__(self, loss, limit):
        self.loss = loss
        super().__init__(f"cutoff discards weight {loss:.3e} > {limit:.3e}")
