"""Exception types shared across the toolkit.

The CLI maps these onto exit codes: UsageError -> 1, InfeasibleError -> 2,
NumericalError -> 3.
"""


class UsageError(ValueError):
    """Malformed arguments, config schema violations, bad file formats."""


class InfeasibleError(ValueError):
    """Parameters that are structurally impossible or too large to verify."""


class NumericalError(RuntimeError):
    """A numerical invariant failed (rank collapse, non-convergence)."""
