"""Exception types shared across the package.

The CLI maps these onto its exit codes: DataValidationError is exit 2,
NumericsError is exit 3, plain ValueError (bad flag or config values) is
exit 1.
"""


class EpifitError(Exception):
    """Base class for errors raised by this package."""


class DataValidationError(EpifitError):
    """Input data is malformed, inconsistent, or too short to use."""


class NumericsError(EpifitError):
    """A numerical routine failed: blow-up, non-finite values, singularity."""
