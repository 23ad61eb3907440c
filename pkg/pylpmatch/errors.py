class LpMatchError(Exception):
    """Base class for all pylpmatch errors."""

    pass


class InvalidArgumentError(LpMatchError, ValueError):
    """Raised when an argument violates an operation's preconditions."""

    pass


class RangeError(InvalidArgumentError):
    """Raised when a computation would leave the exactly representable range."""

    pass


class InstanceFormatError(LpMatchError):
    """Raised when a text or pattern file does not follow the instance format."""

    pass


class VerificationError(LpMatchError):
    """Raised when an approximation violates its error guarantee."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report
