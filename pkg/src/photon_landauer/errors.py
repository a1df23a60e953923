"""Exception hierarchy shared by the library and the command-line front end."""


class PhotonLandauerError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(PhotonLandauerError, ValueError):
    """An argument lies outside the domain of a function (e.g. energy <= 0)."""


class ConfigurationError(PhotonLandauerError, ValueError):
    """A model or run configuration violates one of its invariants."""


class NumericalError(PhotonLandauerError, ArithmeticError):
    """A numerical procedure failed (singular matrix, unstable integration, ...)."""


class IntegrationError(NumericalError):
    """Time integration of the covariance dynamics became unstable or under-resolved."""


class ConvergenceError(NumericalError):
    """Adaptive quadrature did not reach the requested tolerance.

    The best available estimate is kept on ``best`` so callers can still
    report it.
    """

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best
