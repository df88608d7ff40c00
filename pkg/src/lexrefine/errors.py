"""Shared exception type for data-level failures (CLI maps these to exit code 2)."""


class DataError(Exception):
    """Raised when input data violates a documented contract."""
