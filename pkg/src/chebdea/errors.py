"""Exception hierarchy shared across the package.

The CLI maps these onto exit codes: ConfigError -> 2, DataError -> 3,
NumericalError -> 4. Plain ValueError is reserved for programmer-facing
API misuse (bad shapes, bad indices).
"""


class ChebdeaError(Exception):
    """Base class for all package errors."""


class ConfigError(ChebdeaError):
    """Invalid run configuration (unknown variables, bad lags, duplicate labels)."""


class DataError(ChebdeaError):
    """Invalid or insufficient data (duplicates, non-numeric cells, domain violations)."""


class NumericalError(ChebdeaError):
    """Numerical failure (iteration limits, unexpected solver statuses)."""
