"""Exception hierarchy.

Each class maps to one CLI exit code (see ``previewlqr.cli``).
"""


class PreviewLQRError(Exception):
    """Base class for all errors raised by this package."""


class DimensionError(PreviewLQRError, ValueError):
    """Matrices or vectors have incompatible shapes."""


class AssumptionError(PreviewLQRError, ValueError):
    """A standing assumption (stabilizability, definiteness, ...) failed."""

    def __init__(self, message, failures=None):
        super().__init__(message)
        self.failures = list(failures or [])


class ConfigError(PreviewLQRError, ValueError):
    """An experiment config file could not be parsed or is incomplete."""


class NumericalError(PreviewLQRError, ArithmeticError):
    """An iterative solver diverged or a factorization was ill conditioned."""


class InformationError(PreviewLQRError, LookupError):
    """A controller asked for a disturbance outside its information set."""


class OracleMismatch(PreviewLQRError, AssertionError):
    """An independent verification route disagreed with the main route."""
