"""Exception types shared across the package.

The CLI maps these onto process exit codes: configuration problems exit
with 1, infeasible primary protection with 2, validation failures with 3.
"""


class CogstabError(Exception):
    """Base class for all package-specific errors."""


class DomainError(CogstabError, ValueError):
    """A numerical kernel was called outside its mathematical domain."""


class ConfigError(CogstabError, ValueError):
    """A configuration file or object failed parsing or validation."""


class UnstableError(CogstabError):
    """A closed form was requested for an arrival rate at or above the
    service rate it presupposes; the quantity is undefined there."""


class InfeasiblePrimaryError(CogstabError):
    """No secondary transmission parameters can keep the primary queue
    stable at the requested arrival rate."""


class TooLargeError(CogstabError):
    """A subset-enumeration formula was requested beyond the node-count
    cap where the term count becomes intractable."""
