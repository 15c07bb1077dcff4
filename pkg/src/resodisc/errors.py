"""Exception hierarchy shared across the package."""


class ResodiscError(Exception):
    """Base class for all errors raised by resodisc."""


class NumericalError(ResodiscError):
    """A numerical procedure failed (non-convergence, non-finite values)."""


class ConvergenceError(NumericalError):
    """An iteration did not reach its tolerance within the iteration cap."""


class QuadratureError(NumericalError):
    """Quadrature produced a non-finite sample or failed its self-check."""
