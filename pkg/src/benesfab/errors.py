"""Exception types shared across the package."""


class FabricError(Exception):
    """Base class for all benesfab errors."""


class InvalidSizeError(FabricError, ValueError):
    """Line count is not a power of two or is below the minimum."""


class InvalidBandWidthError(FabricError, ValueError):
    """Band width is not a power of two or is out of range."""


class UnsupportedBandWidthError(InvalidBandWidthError):
    """Band width exceeds n/4; callers must fall back to a full Benes."""


class NotKBoundedError(FabricError, ValueError):
    """Permutation moves some input farther than the declared bound."""


class SizeMismatchError(FabricError, ValueError):
    """Network and permutation sizes differ."""


class CorruptPlanError(FabricError):
    """A route plan is internally inconsistent (e.g. unused switch on a path)."""


class StructuralError(FabricError):
    """Plan/network/permutation do not belong together; distinct from a
    verification failure of a well-formed plan."""


class MatchingViolationError(FabricError):
    """No opposite-direction partner exists for a migrating input.  Firing
    means a guaranteed invariant broke; tests treat it as failure."""
