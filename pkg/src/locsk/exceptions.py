"""Exception hierarchy.

Two bases so the CLI can map errors onto exit codes: bad inputs or violated
preconditions exit 2, numerical failures exit 3.
"""


class LocskValidationError(ValueError):
    """Invalid input or violated precondition (CLI exit code 2)."""


class LocskNumericalError(RuntimeError):
    """A numerical procedure failed to meet its contract (CLI exit code 3)."""


class NotPositiveType(LocskValidationError):
    """Kernel is not of positive type (negative Fourier coefficient or q^2 < 0)."""


class TruncationError(LocskNumericalError):
    """Grid fit residual exceeds the configured tolerance."""


class TooLarge(LocskValidationError):
    """Box exceeds the exact-enumeration limit."""


class NoConvergence(LocskNumericalError):
    """Iterative solver exhausted its budget."""


class InvalidSchedule(LocskValidationError):
    """Inconsistent MCMC sweep/burn-in/thin schedule."""


class InvalidGrid(LocskValidationError):
    """Time grid is not strictly increasing from 0 to 1."""


class Degenerate(LocskValidationError):
    """Sample too small to summarize."""
