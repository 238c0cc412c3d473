"""Shared exception types."""


class PhivarError(Exception):
    """Base class for errors raised by this package."""


class GaugeDomainError(PhivarError):
    """A gauge restricted to [0,1) was asked to evaluate at x >= 1 (or x < 0)."""


class CapExceededError(PhivarError):
    """An enumeration/resolution cap was exceeded (level, depth, or memory)."""


class ConfigError(PhivarError):
    """Aggregated configuration validation failure.

    Carries every violation found in one pass so a bad config is reported
    as a single error listing all problems.
    """

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))
