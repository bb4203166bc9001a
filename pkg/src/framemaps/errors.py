"""Exception types raised by the frame-map routines."""


class FrameMapError(ValueError):
    """Base class for all domain errors."""


class ZeroPoint(FrameMapError):
    """Evaluation at a cone vertex, where the map is undefined."""


class NotOnFace(FrameMapError):
    pass


class MinDimension(FrameMapError):
    pass


class OutOfDomain(FrameMapError):
    pass


class DepthExceeded(FrameMapError):
    """The containing Whitney cube is finer than the configured depth cap."""


class OnStratum(FrameMapError):
    """Point lies (numerically) on a surface where the Jacobian jumps."""


class StencilCrossesStratum(FrameMapError):
    pass


class ExponentOutOfRange(FrameMapError):
    pass


class SingularSet(FrameMapError):
    pass


class IntegrandUnsupported(FrameMapError):
    pass
