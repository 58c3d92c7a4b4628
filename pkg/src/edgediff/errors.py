"""Shared exception types."""


class NumericError(RuntimeError):
    """Numerical routine failed (non-convergence, non-finite values)."""


class ImpossibleTransitionError(RuntimeError):
    """A (state, observation) pair has zero probability under the kernel."""


class ConstraintConflictError(ValueError):
    """Constraint sets that require and forbid the same edge."""
