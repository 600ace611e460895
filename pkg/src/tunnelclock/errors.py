"""Exception hierarchy shared across the package."""


class TunnelclockError(Exception):
    """Base class for all package errors."""


class ValidationError(TunnelclockError, ValueError):
    """Bad configuration or argument values."""


class NumericsError(TunnelclockError):
    """The propagation produced non-finite amplitudes."""


class CollisionIncompleteError(TunnelclockError):
    """The boundary record does not span a full collision."""


class DegeneratePeakError(TunnelclockError):
    """A boundary-density maximum sits at the record edge or the series is flat."""


class InteractionOngoingError(TunnelclockError):
    """Transmission requested while the packet still overlaps a barrier boundary."""


class DivergenceError(TunnelclockError):
    """Semiclassical traversal time is singular at the requested energy."""
