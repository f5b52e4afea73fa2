"""
Error hierarchy for clickboost.

Each error carries the process exit code the CLI returns for it.
"""


class ClickBoostError(Exception):
    """Base class for all clickboost errors."""

    exit_code = 1


class ConfigError(ClickBoostError):
    """Invalid or unreadable experiment configuration."""

    exit_code = 1


class DatasetError(ClickBoostError):
    """Schema, parse or data-domain failure."""

    exit_code = 2


class TrainingError(ClickBoostError):
    """A learner could not be trained."""

    exit_code = 3


class FingerprintMismatchError(ClickBoostError):
    """Model was trained under a different preprocessing fingerprint."""

    exit_code = 4


class ReportConflictError(ClickBoostError):
    """Reports cannot be combined (duplicate model names)."""

    exit_code = 5
