"""Exception hierarchy shared by every module of the package."""


class LosslessError(Exception):
    """Base class for all errors raised by lossless_schur."""


class NotStableError(LosslessError):
    """A matrix required to be stable has spectral radius >= 1."""

    def __init__(self, name: str, radius: float):
        super().__init__(f"{name} is not stable (spectral radius {radius:.3e})")
        self.name = name
        self.radius = radius


class NotPositiveDefiniteError(LosslessError):
    """A matrix required to be Hermitian positive definite is not."""

    def __init__(self, message: str, min_eigenvalue: float = float("nan")):
        super().__init__(message)
        self.min_eigenvalue = min_eigenvalue


class InadmissibleDataError(NotPositiveDefiniteError):
    """Nudelman data whose Stein solution is not positive definite."""


class OutOfDomainError(LosslessError):
    """The Schur algorithm stopped: the function is outside the chart domain.

    ``step`` is the 1-based index of the failing Schur step (``None`` for the
    single-step test of the mutual atlas), ``quality`` the diagnostic value
    that triggered the failure.
    """

    def __init__(self, message: str, step: int | None = None, quality: float = float("nan")):
        super().__init__(message)
        self.step = step
        self.quality = quality


class SingularEvaluationError(LosslessError):
    """A resolvent or LFT denominator is singular at the requested point."""


class DimensionError(LosslessError, ValueError):
    """Incompatible matrix shapes."""


class ConsistencyError(LosslessError):
    """An internal residual check failed (numerical breakdown)."""
