"""Exception hierarchy shared by all modules.

Each class carries a short ``category`` string that the command line maps to
an exit code.
"""


class CentralQCError(Exception):
    category = "error"


class DomainError(CentralQCError, ValueError):
    """An argument lies outside the region where the quantity is defined."""

    category = "domain"


class WindowError(DomainError):
    """A radial window fails one of the admissibility inequalities."""

    category = "window"

    def __init__(self, message, radius=None, condition=None):
        super().__init__(message)
        self.radius = radius
        self.condition = condition


class SingularConfigurationError(DomainError):
    category = "singular"


class NumericalError(CentralQCError, ArithmeticError):
    """Iteration failed to converge or an internal consistency check failed."""

    category = "numeric"


class OrbitAbortError(NumericalError):
    """Trajectory came too close to the force centre."""

    category = "abort"

    def __init__(self, message, time=None, radius=None):
        super().__init__(message)
        self.time = time
        self.radius = radius


class StabilityRefusal(CentralQCError):
    """Initial actions lie inside the rho-neighbourhood of the exceptional set."""

    category = "refused"

    def __init__(self, message, distance=None):
        super().__init__(message)
        self.distance = distance


class ConfigError(CentralQCError, ValueError):
    category = "config"
