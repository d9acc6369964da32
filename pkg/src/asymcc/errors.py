"""Exception hierarchy shared by every asymcc module."""


class AsymCCError(Exception):
    """Base class for all asymcc errors."""


class DomainError(AsymCCError, ValueError):
    """An argument lies outside the domain of an operation."""


class ConfigError(DomainError):
    """A system configuration violates one or more invariants.

    ``violations`` holds one ``(field, message)`` pair per broken invariant.
    """

    def __init__(self, violations):
        self.violations = list(violations)
        msg = "; ".join(f"{field}: {message}" for field, message in self.violations)
        super().__init__(msg or "invalid configuration")


class FeasibilityError(AsymCCError):
    """A design violates the linear-decodability stream bound."""


class ScheduleSizeError(AsymCCError):
    """A schedule is too large to materialize under the configured cap."""


class SchedulingError(AsymCCError):
    """No valid subpacket assignment could be found."""


class SeedError(AsymCCError):
    """A seed failed to produce a usable channel realization."""
