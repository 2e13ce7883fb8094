"""Exception taxonomy: validation (bad inputs), config (bad run files), solver (numerical failure)."""


class ValidationError(ValueError):
    """An argument violates a documented precondition."""


class ConfigError(ValueError):
    """A run configuration fails to parse or is semantically inconsistent."""


class SolverError(RuntimeError):
    """A linear solve or scheme step failed numerically."""
