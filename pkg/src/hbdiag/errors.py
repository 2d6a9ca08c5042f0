"""Exception hierarchy shared by all hbdiag modules.

Every failure mode documented on the public operations maps to one of
these classes so callers (and the CLI) can react to the *kind* of
problem without parsing messages.
"""


class HeartbeatError(Exception):
    """Base class for all hbdiag errors."""


class LogParseError(HeartbeatError):
    """A heartbeat log line could not be parsed."""

    def __init__(self, message, line_no=None):
        if line_no is not None:
            message = f"line {line_no}: {message}"
        super().__init__(message)
        self.line_no = line_no


class ValidationError(HeartbeatError):
    """Data violates a structural invariant (ordering, density, ranges)."""


class EmptyInputError(HeartbeatError):
    """An operation received no data at all."""


class InsufficientDataError(HeartbeatError):
    """Not enough samples for the requested computation."""


class DegenerateTimingError(HeartbeatError):
    """A time window has zero elapsed duration."""


class ConditioningError(HeartbeatError):
    """A regression design matrix is numerically singular."""


class UndefinedRSquaredError(HeartbeatError):
    """R-squared is undefined because the response has zero variance."""


class NoOverlapError(HeartbeatError):
    """Two series have disjoint time domains and cannot be aligned."""


class DegenerateReferenceError(HeartbeatError):
    """The reference side of a ratio is zero or carries no information."""


class InfeasibleBandError(HeartbeatError):
    """A warping band is too narrow to connect the two sequence ends."""


class LengthMismatchError(HeartbeatError):
    """Two sequences that must have equal length do not."""


class MisuseError(HeartbeatError):
    """An operation was called with the wrong anomaly kind or lifecycle."""


class DegenerateInjectionError(HeartbeatError):
    """A fault injection would leave too little data to be meaningful."""


class ConfigurationError(HeartbeatError):
    """Run configuration is inconsistent (e.g. a thread has no reference)."""


class DegenerateBaselineError(HeartbeatError):
    """An overhead baseline measurement is non-positive."""


class FeatureError(HeartbeatError):
    """A feature computation failed; carries the feature name."""

    def __init__(self, feature, cause):
        super().__init__(f"feature '{feature}': {cause}")
        self.feature = feature
        self.cause = cause
