"""Exception hierarchy shared by all qmoment modules."""


class QMomentError(Exception):
    """Base class for every error raised by this package."""


class InvalidArgumentError(QMomentError, ValueError):
    pass


class NumericalDomainError(QMomentError, ArithmeticError):
    """An integrand or intermediate quantity was not finite."""


class InvalidWeightError(QMomentError, ValueError):
    pass


class DegenerateWeightError(QMomentError, ArithmeticError):
    """Cholesky factorization of a moment matrix hit a non-positive pivot."""

    def __init__(self, pivot: int, message: str | None = None):
        self.pivot = pivot
        super().__init__(message or f"moment matrix is not positive definite at pivot {pivot}")


class UnsupportedModelError(QMomentError, ValueError):
    pass


class InconsistentSubmodelError(QMomentError, ValueError):
    pass


class InconsistentSupportError(QMomentError, ArithmeticError):
    """A derivative operator has weight outside the support of the state."""


class DegenerateInformationError(QMomentError, ArithmeticError):
    pass


class InvalidDirectionError(QMomentError, ValueError):
    pass


class ConfigurationError(QMomentError, ValueError):
    pass


class InvalidDataError(QMomentError, ValueError):
    pass


class IncompleteSweepError(QMomentError, ValueError):
    pass
