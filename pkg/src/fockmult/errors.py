"""Exception hierarchy shared by all modules.

The CLI maps :class:`DomainError` to exit code 2 and :class:`NumericError`
(and subclasses) to exit code 3.
"""


class DomainError(ValueError):
    """An argument lies outside the documented domain of an operation."""


class NumericError(ArithmeticError):
    """A numerical procedure produced non-finite or untrustworthy output."""


class DecompositionError(NumericError):
    """The harmonic part of a Riesz decomposition failed its consistency check."""


class SolverError(NumericError):
    """A linear-algebra solve failed (singular or indefinite system)."""
