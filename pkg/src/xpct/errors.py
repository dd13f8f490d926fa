"""Exception types shared across the package."""


class XpctError(Exception):
    """Base class for all package-specific errors."""


class InvalidArgumentError(XpctError, ValueError):
    """A caller-supplied argument violates a precondition."""


class InvalidDataError(XpctError, ValueError):
    """Array data violates an invariant (non-finite, non-positive, ...)."""


class DatasetError(XpctError):
    """A dataset directory is missing, truncated, or inconsistent."""


class OptimizationFailure(XpctError, RuntimeError):
    """The optimizer hit a non-finite objective or gradient.

    Carries the objective trace accumulated up to the failure so the caller
    can inspect what happened.
    """

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace
