"""Exception hierarchy shared across the package.

The CLI maps these onto process exit codes, so library code should
raise the most specific class that applies.
"""


class DirfdrError(Exception):
    """Base class for all package-specific errors."""


class DomainError(DirfdrError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class DataError(DirfdrError, ValueError):
    """Input data failed validation (parsing, shapes, response ranges)."""


class NumericalError(DirfdrError, RuntimeError):
    """A solver failed to produce a usable result."""


class InfeasibleError(NumericalError):
    """A constrained program has an empty feasible set."""
