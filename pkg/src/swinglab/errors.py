"""Exception types shared across the library.

Most errors double as ``ValueError`` so callers that only know the standard
library can still catch them idiomatically.
"""


class SwinglabError(Exception):
    """Base class for every error raised by swinglab."""


class MissingColumnError(SwinglabError, ValueError):
    """A required CSV column is absent from the header."""


class EmptyFileError(SwinglabError, ValueError):
    """A sensor CSV contains a header but no data rows, or nothing at all."""


class NonMonotoneTimeError(SwinglabError, ValueError):
    """Timestamps do not strictly increase."""


class AllMissingError(SwinglabError, ValueError):
    """A channel has no parseable values at all."""


class RecordingLoadError(SwinglabError):
    """Loading one manifest entry failed; carries the entry identity."""


class ManifestError(SwinglabError, ValueError):
    """A dataset manifest is internally inconsistent."""


class EmptySeriesError(SwinglabError, ValueError):
    """An operation that needs at least one sample received none."""


class DegenerateDataError(SwinglabError, ValueError):
    """Too few rows to estimate the quantity (e.g. covariance needs n >= 2)."""


class BadComponentCountError(SwinglabError, ValueError):
    """Requested component count is outside [1, n_features]."""


class DimensionMismatchError(SwinglabError, ValueError):
    """Input dimensionality disagrees with the fitted model."""


class BadRangeError(SwinglabError, ValueError):
    """A segment range [a, b) is empty or out of bounds."""


class TooShortError(SwinglabError, ValueError):
    """Signal too short for the requested number of segments."""


class NoSwingsError(SwinglabError, ValueError):
    """No swing-like activity found in a session."""


class SingleClassError(SwinglabError, ValueError):
    """A classification or ranking task received only one label value."""


class TooFewParticipantsError(SwinglabError, ValueError):
    """Not enough participants to build the requested split."""


class BadFoldCountError(SwinglabError, ValueError):
    """Fold count is outside [1, n_participants]."""


class LengthMismatchError(SwinglabError, ValueError):
    """Paired sequences have different lengths."""


class LabelRangeError(SwinglabError, ValueError):
    """A label falls outside the declared class range."""


class BadProfileError(SwinglabError, ValueError):
    """A synthetic swing profile fails its sanity checks."""
