"""Exception types raised by the library."""


class IgaError(Exception):
    """Base class for all library errors."""


class DomainError(IgaError, ValueError):
    """An argument lies outside the admissible domain (e.g. t outside [0, 1])."""


class GeometryError(IgaError):
    """A geometry map is degenerate, folded or otherwise unusable."""


class InversionError(GeometryError):
    """Newton point inversion failed to converge."""


class TopologyError(IgaError):
    """The patch layout violates the conforming-interface assumptions."""


class ConfigurationError(IgaError, ValueError):
    """Invalid user configuration (unknown names, bad degrees, ...)."""


class SolverError(IgaError):
    """Linear solve or eigenvalue estimation failed."""


class RateError(IgaError, ValueError):
    """A convergence rate is undefined for the given error sequence."""
