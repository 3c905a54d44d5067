"""Exception hierarchy shared across the package.

The CLI maps these onto exit codes: malformed inputs exit 2, a degenerate
study (too many flagged replications) exits 3.
"""


class VenueRiskError(Exception):
    """Base class for all package errors."""


class InputError(VenueRiskError, ValueError):
    """Malformed or out-of-contract input data."""


class UndefinedRatioError(VenueRiskError):
    """A ratio was requested whose denominator is zero."""


class MissingShareError(VenueRiskError):
    """Positive venue exposure where the venue share is undefined."""


class UndefinedAUCError(VenueRiskError):
    """AUC requested for outcomes containing a single class."""


class DegenerateStudyError(VenueRiskError):
    """More than half of a study arm's replications were flagged."""
