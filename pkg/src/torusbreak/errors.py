"""Exception hierarchy shared across the library."""


class TorusbreakError(Exception):
    """Base class for all library errors."""


class DomainError(TorusbreakError):
    """Input violates a documented precondition."""


class PartnerQualityError(TorusbreakError):
    """No orthogonal partner of acceptable quality was found.

    Carries the best candidate so callers can inspect how close the
    search came.
    """

    def __init__(self, message, best_candidate=None, best_value=None):
        super().__init__(message)
        self.best_candidate = best_candidate
        self.best_value = best_value


class ApproximationQualityError(TorusbreakError):
    """A trigonometric approximation failed its quality thresholds."""


class BvpError(TorusbreakError):
    """Pendulum boundary-value solve failed; carries scan diagnostics."""

    def __init__(self, message, scan=None):
        super().__init__(message)
        self.scan = scan


class MinimizationError(TorusbreakError):
    """Discrete action minimization did not converge."""

    def __init__(self, message, residual_history=None):
        super().__init__(message)
        self.residual_history = residual_history or []


class IntegrationError(TorusbreakError):
    """Implicit integrator step failed to converge."""
