"""Exception types shared across the toolkit.

Two families, matching the CLI exit-code contract:
  ValidationError -> exit code 3 (bad values, inconsistent dimensions, domain errors)
  FileFormatError -> exit code 4 (unreadable or malformed files), alongside OSError
"""


class ValidationError(ValueError):
    """Input violates a documented precondition or invariant."""


class FileFormatError(IOError):
    """File exists but its contents are not in the expected format."""
