"""Exception hierarchy shared by the numerical core, the services and the CLI."""

from typing import Optional, Tuple


class ChirpedEnsembleError(Exception):
    """Base class for every error raised on purpose by this package."""


class DomainError(ChirpedEnsembleError, ValueError):
    """An argument lies outside the admissible domain (box, horizon, window)."""


class ArgumentError(ChirpedEnsembleError, ValueError):
    """Arguments are malformed or mutually inconsistent."""


class ModelError(ChirpedEnsembleError, ValueError):
    """Model data violates a structural invariant."""

    def __init__(self, message: str, pair: Optional[Tuple[int, int]] = None):
        super().__init__(message)
        self.pair = pair


class HypothesisViolationError(ChirpedEnsembleError, ValueError):
    """A construction relies on a gap hypothesis that fails for this system."""

    def __init__(self, message: str, index: Optional[Tuple[int, ...]] = None):
        super().__init__(message)
        self.index = index


class UnsupportedDriftError(ChirpedEnsembleError, NotImplementedError):
    """Raised for non-affine drifts when grid evaluation was not allowed."""


class NumericError(ChirpedEnsembleError, RuntimeError):
    """Numerical failure: non-Hermitian input, non-convergence."""


class SingularityError(NumericError):
    """The dressed gap lambda_eps vanished."""


class ConfigError(ChirpedEnsembleError, ValueError):
    """Config file could not be parsed or validated."""

    def __init__(
        self,
        message: str,
        line: Optional[int] = None,
        column: Optional[int] = None,
        field: Optional[str] = None,
    ):
        super().__init__(message)
        self.line = line
        self.column = column
        self.field = field
