"""Exception hierarchy.

Every error raised by the library derives from :class:`VidmarkError` and
carries the process exit code the CLI maps it to.
"""


class VidmarkError(Exception):
    exit_code = 5


class FormatError(VidmarkError, ValueError):
    """Malformed Y4M / PNM / matrix / sidecar input."""

    exit_code = 2


class UnsupportedError(FormatError):
    pass


class TruncationError(FormatError):
    def __init__(self, message, frame_index=None):
        super().__init__(message)
        self.frame_index = frame_index


class DomainError(VidmarkError, ValueError):
    """Numeric precondition violated (non-finite entries, negative values, ...)."""

    exit_code = 2


class DimensionError(DomainError):
    pass


class ParameterError(VidmarkError, ValueError):
    exit_code = 2


class CapacityError(VidmarkError, ValueError):
    exit_code = 2

    def __init__(self, required, available, what="bits"):
        super().__init__(
            f"capacity exceeded: payload needs {required} {what}, "
            f"only {available} available"
        )
        self.required = required
        self.available = available


class FramingError(FormatError):
    pass


class SemiBlindError(VidmarkError):
    """The diagonal scheme was asked to extract without its reference sidecar."""

    exit_code = 2


class AuthenticationError(VidmarkError):
    exit_code = 3


class ExtractionFailedError(VidmarkError):
    exit_code = 3


class LockoutError(VidmarkError):
    exit_code = 4
