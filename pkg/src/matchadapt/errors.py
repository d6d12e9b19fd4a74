"""Exception types shared across the package."""


class MatchAdaptError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(MatchAdaptError):
    """An instance description violates one or more structural invariants.

    Carries the full list of violations, not just the first one found.
    """

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class NotAcceptable(MatchAdaptError):
    """A rank lookup was attempted for an agent pair that is not mutually acceptable."""


class NotStable(MatchAdaptError):
    """A matching required to be stable is not."""


class NoStableMatching(MatchAdaptError):
    """The instance admits no stable matching."""


class RotationNotExposed(MatchAdaptError):
    """Attempted to eliminate a rotation that is not exposed in the given table."""


class NotClosedComplete(MatchAdaptError):
    """A rotation set required to be closed and complete is not."""


class SingularRotation(MatchAdaptError):
    """An operation requiring a nonsingular rotation was given a singular one."""


class ForcedForbiddenOverlap(MatchAdaptError):
    """The forced and forbidden pair sets intersect (trivial no-instance)."""


class WindowUnsatisfiable(MatchAdaptError):
    """A rank window excludes every stable partner of its agent."""


class InstanceTooLarge(MatchAdaptError):
    """The exhaustive oracle was invoked above its configured size cap."""


class ResourceExhausted(MatchAdaptError):
    """Rotation-poset exploration exceeded the configured table cap."""
