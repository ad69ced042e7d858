"""Exception hierarchy.

``InputError`` subclasses signal bad user input or configuration (CLI exit
code 1).  ``GeometryError`` subclasses signal a numerically degenerate frame
that callers are expected to handle with a fallback.
"""


class TwistRetargetError(Exception):
    pass


class InputError(TwistRetargetError, ValueError):
    pass


class ConfigInvalid(InputError):
    pass


class TrajectoryInvalid(InputError):
    pass


class GeometryError(TwistRetargetError, ArithmeticError):
    pass


class DegenerateVector(GeometryError):
    pass


class NearPiRotation(GeometryError):
    pass


class NotARotation(GeometryError):
    pass


class DegenerateKeypoints(GeometryError):
    pass


class DegenerateTripod(GeometryError):
    pass


class ThumbOnAxis(DegenerateTripod):
    pass


class MetricsError(TwistRetargetError, ValueError):
    pass


class MisalignedSeries(MetricsError):
    pass


class EmptyMask(MetricsError):
    pass


class DegenerateSignal(MetricsError):
    pass
