"""Exception types shared across the package."""


class PathfinderOpsError(Exception):
    """Base class for all domain errors raised by this package."""


class NonUniqueStationary(PathfinderOpsError):
    """The chain has more than one stationary distribution (reducible with
    multiple recurrent classes); refusing to pick one silently."""


class EmptyGrid(PathfinderOpsError):
    """A parameter grid required to be non-empty was empty."""


class EmptyCandidateSet(PathfinderOpsError):
    """A candidate list required to be non-empty was empty."""


class DuplicateId(PathfinderOpsError):
    """Two candidates share the same id."""


class NoTippingPoint(PathfinderOpsError):
    """The failure threshold is unreachable for any rejective-agent mixture."""


class DegenerateGradient(PathfinderOpsError):
    """The worst-case probability is numerically flat in alpha at the tipping
    point, so the implicit derivative is undefined."""


class InsufficientData(PathfinderOpsError):
    """The classified corpus cannot calibrate the chain (zero denominator)."""
