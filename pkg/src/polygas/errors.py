"""Exception types shared across the package."""


class PolygasError(Exception):
    """Base class for all package-specific errors."""


class NorthPoleError(PolygasError):
    """The north pole has no finite preimage under stereographic projection."""


class SpaceMismatch(PolygasError):
    """Operation mixing a planar and a spherical measure."""


class AsymmetricSupport(PolygasError):
    """Grid support is not closed under complex conjugation."""


class DegenerateLeading(PolygasError):
    """Sampled leading coefficient is exactly zero after a resample."""


class ConvergenceError(PolygasError):
    """Iterative root finding failed after the retry policy."""


class SingularGram(PolygasError):
    """Discretized moment matrix is numerically rank-deficient."""


class BadMixtureStructure(PolygasError):
    """Configuration violates the real/conjugate-pair layout."""
