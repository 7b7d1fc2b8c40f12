"""Exception types shared across the package."""


class ConvAbuseError(Exception):
    """Base class for all package errors."""


class CorpusFormatError(ConvAbuseError):
    """Malformed corpus input. Carries the 1-based line number when known."""

    def __init__(self, message: str, line_no: int | None = None):
        self.line_no = line_no
        if line_no is not None:
            message = f"line {line_no}: {message}"
        super().__init__(message)


class UnknownMessageError(ConvAbuseError):
    """A message id was not found in the corpus."""


class DatasetBalanceError(ConvAbuseError):
    """Not enough material to build a balanced dataset."""


class ConfigError(ConvAbuseError):
    """Invalid configuration value or file."""


class FitError(ConvAbuseError):
    """A model could not be fit on the given data."""


class ManifestMismatchError(ConvAbuseError):
    """A trained bundle disagrees with the current feature manifest."""
