"""Exception hierarchy shared across the package."""

from __future__ import annotations


class DroneLabError(Exception):
    """Base class for all package errors."""


class ConfigError(DroneLabError, ValueError):
    """Invalid configuration (mission parameters, profiles, population specs)."""


class DomainError(DroneLabError, ValueError):
    """An argument is outside the operation's domain (off-ladder sigma, bad counts)."""


class ProtocolError(DroneLabError, RuntimeError):
    """An operation was requested in a state that forbids it (flying after a crash,
    acting on a finished mission, out-of-order session phases)."""


class StateError(DroneLabError, RuntimeError):
    """An aggregate was consumed before reaching the required state
    (e.g. valuing an unfinished mission)."""


class UnsupportedPolicyError(DroneLabError, TypeError):
    """The policy is randomized or history-dependent where a pure context-only
    deterministic policy is required."""


class DegenerateTableError(DomainError):
    """A contingency table has a zero margin, leaving the test statistic undefined."""


class SchemaError(DroneLabError, ValueError):
    """A session log failed structural validation."""
