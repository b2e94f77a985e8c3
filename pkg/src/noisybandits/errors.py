"""Exception types shared across the package."""


class BudgetExceededError(RuntimeError):
    """Exact independent-set search ran out of its node budget."""


class DegenerateGraphError(ValueError):
    """A loss-estimate denominator is exactly zero for some arm."""


class HorizonExceededError(RuntimeError):
    """An environment was stepped past its final round."""


class ProtocolViolationError(RuntimeError):
    """Policy step/ingest calls arrived out of protocol order."""


class ConfigError(ValueError):
    """A run configuration failed validation."""
