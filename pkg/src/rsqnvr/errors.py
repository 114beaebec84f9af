"""Exception types raised across the package."""


class RsqnError(Exception):
    """Base class for every error raised by this package."""


class GeometryError(RsqnError):
    pass


class NonSquare(GeometryError):
    pass


class NotFinite(GeometryError):
    pass


class NotSPD(GeometryError):
    pass


class RankDeficient(GeometryError):
    pass


class OutOfDomain(GeometryError):
    pass


class NotHorizontal(GeometryError):
    pass


class NearSingular(GeometryError):
    pass


class ShapeMismatch(GeometryError):
    pass


class BasePointMismatch(GeometryError):
    pass


class LineSearchFailed(RsqnError):
    pass


class InfeasibleSampling(RsqnError):
    pass


class ConfigInvalid(RsqnError):
    pass


class ParseError(RsqnError):
    def __init__(self, message, line_number=None):
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)
        self.line_number = line_number
