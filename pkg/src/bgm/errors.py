"""Exception hierarchy shared by every pipeline stage.

The CLI maps these onto exit codes: ConfigError means a bad or missing
configuration value, everything else under BgmError means invalid data.
I/O failures are left to the standard OSError family.
"""


class BgmError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(BgmError):
    """Input data violates a documented precondition."""


class ParseError(ValidationError):
    """A delimited file is malformed; the message carries the line number."""


class RatingRangeError(ValidationError):
    """A rating value falls outside the declared 1..k range."""


class DuplicateRatingError(ValidationError):
    """The same (user, item) pair appears more than once."""


class StructuralError(ValidationError):
    """A graph handed to tree construction is not connected."""


class ColdStartError(ValidationError):
    """The active user has no source-domain ratings to build features from."""


class TrainingError(ValidationError):
    """The training set is empty or smaller than the configured minimum."""


class DegenerateVarianceError(ValidationError):
    """Paired differences are identical and nonzero, so the t statistic is undefined."""


class ConfigError(BgmError):
    """A configuration field is missing or holds an unusable value."""
