"""Error taxonomy shared by every module in the package."""


class DivSwapError(Exception):
    """Base class for all errors raised by this package."""


class FormatError(DivSwapError):
    """A .dsfm payload is malformed: bad magic, wrong version, bad size."""


class ValidationError(DivSwapError):
    """Data violates a structural invariant (non-finite values, bad shape)."""


class ArgumentError(DivSwapError, ValueError):
    """A scalar argument is outside its documented range."""


class DimensionError(DivSwapError):
    """Two arguments have incompatible shapes, or a window does not fit."""


class ConsistencyError(DivSwapError):
    """Cross-object references do not line up (e.g. stale match indices)."""


class UsageError(DivSwapError):
    """Bad command-line invocation: unknown flags, conflicting options."""
