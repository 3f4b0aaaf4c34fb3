"""Exception hierarchy shared by every module."""


class LabError(Exception):
    """Base class for all errors raised by snlslab."""


class InvalidParameterError(LabError, ValueError):
    pass


class TimeRangeError(LabError, ValueError):
    """Requested interval or time lies outside what a trajectory covers."""


class BoxTooSmallError(LabError):
    """Too much mass reached the edge of the periodic box."""


class ResolutionError(LabError):
    """A field or operation is not resolvable on the grid."""


class DegenerateFitError(LabError):
    pass


class UndefinedRatioError(LabError, ZeroDivisionError):
    pass


class BlowUpError(LabError):
    """Non-finite values or runaway mass drift during time stepping."""

    def __init__(self, message: str, time: float, path: int | None = None):
        super().__init__(f"{message} (t={time:.6g}" + (f", path={path})" if path is not None else ")"))
        self.time = time
        self.path = path


class ConfigError(LabError):
    """Malformed run configuration."""
