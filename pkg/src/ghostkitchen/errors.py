"""Exception hierarchy. Every error raised on purpose derives from GhostKitchenError."""

from __future__ import annotations

from collections.abc import Sequence
from pathlib import Path


class GhostKitchenError(Exception):
    """Base class for ghostkitchen errors."""


class ConfigError(GhostKitchenError):
    """Invalid configuration, unknown preset, or missing input file."""

    def __init__(self, message: str, *, source: str | Path | None = None) -> None:
        self.source = source
        prefix = f"{source}: " if source is not None else ""
        super().__init__(f"{prefix}{message}")


class UnknownLocationError(GhostKitchenError, LookupError):
    """Travel lookup for a location the provider does not know."""

    def __init__(self, location_id: int) -> None:
        self.location_id = location_id
        super().__init__(f"unknown location id {location_id}")


class PlanIntegrityError(GhostKitchenError):
    """A plan references an order that is not open."""

    def __init__(self, order_id: int) -> None:
        self.order_id = order_id
        super().__init__(f"plan references unknown order {order_id}")


class PlanViolationError(GhostKitchenError):
    """A decision breaks plan validity."""

    def __init__(self, violations: Sequence[str]) -> None:
        self.violations = tuple(violations)
        shown = "; ".join(self.violations[:5])
        more = len(self.violations) - 5
        suffix = f" (+{more} more)" if more > 0 else ""
        super().__init__(f"infeasible decision: {shown}{suffix}")


class IncompleteEpisodeError(GhostKitchenError):
    """Ledger requested for an episode that did not run to completion."""


class OracleCapError(GhostKitchenError):
    """Instance exceeds what the brute-force oracle will enumerate."""

    def __init__(self, what: str, size: int, limit: int) -> None:
        self.what = what
        self.size = size
        self.limit = limit
        super().__init__(f"{what}: {size} exceeds oracle cap {limit}")


class CheckpointError(GhostKitchenError):
    """Unreadable or mismatched value network checkpoint."""

    def __init__(self, path: Path, reason: str) -> None:
        self.path = path
        self.reason = reason
        super().__init__(f"{path}: {reason}")
