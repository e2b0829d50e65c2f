"""Exception types that the command line maps onto exit codes."""

__all__ = ["UsageError", "DataError", "NumericalError"]


class UsageError(Exception):
    """Bad invocation: unknown flags, malformed config, missing arguments."""


class DataError(Exception):
    """Malformed or inconsistent input data."""


class NumericalError(Exception):
    """A numerical routine failed (non-convergence, loss of definiteness)."""
