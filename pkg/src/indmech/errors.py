"""Exception types shared across the package."""

from __future__ import annotations


class Error(Exception):
    """Base class for all package-specific errors."""


class InvalidModelError(Error):
    """An operation received a model whose validation reported errors."""

    def __init__(self, report):
        self.report = report
        super().__init__("invalid model: " + "; ".join(report.errors))


class NoiseSpaceError(Error):
    """The exogenous configuration space is too large to enumerate."""

    def __init__(self, size: int, cap: int):
        self.size = size
        self.cap = cap
        super().__init__(
            f"noise space has {size} configurations, above the cap of {cap}"
        )


class ColumnError(Error):
    """A query referenced a column the table does not have."""


class PositivityError(Error):
    """A conditioning event or required stratum has probability zero."""

    def __init__(self, condition: str):
        self.condition = condition
        super().__init__(f"positivity: zero probability for {condition}")


class TruncatedOutcomeError(Error):
    """The outcome is undefined on part of the conditioning set."""


class EmptyStratumError(Error):
    """An estimator stratum contains no (or too few) observations."""


class RoleError(Error):
    """A required variable role is missing or ill-formed."""


class CalibrationError(Error):
    """Moment calibration did not reach its targets.

    Carries the best parameters found and the residual per target moment.
    """

    def __init__(self, message: str, params=None, residuals=None):
        self.params = params
        self.residuals = residuals
        if residuals:
            detail = ", ".join(f"{k}={v:.3g}" for k, v in sorted(residuals.items()))
            message = f"{message} (residuals: {detail})"
        super().__init__(message)


class ScenarioError(Error):
    """A scenario file does not conform to the schema."""
