"""Exception types raised across the toolkit."""


class RadsumError(Exception):
    """Base class for all radsum errors."""


class EmptyInput(RadsumError):
    """Raw report text is empty after trimming."""


class NoSections(RadsumError):
    """No section header was detected in a report."""


class InvalidLabelValue(RadsumError):
    """Disease metadata value outside {1, -1, 0, missing}."""


class InvalidN(RadsumError):
    """ROUGE-N order below 1."""


class EmptyScoreList(RadsumError):
    """Aggregation requested over zero scores."""


class InvalidEpochRange(RadsumError):
    """Shuffle start epoch outside [0, epochs]."""


class MissingImpression(RadsumError):
    """Report has no IMPRESSION section."""


class MissingField(RadsumError):
    """Strict rendering hit a report lacking a configured input field."""


class MissingFindings(RadsumError):
    """Report has no FINDINGS section."""


class InvalidRatio(RadsumError):
    """Train ratio outside the open interval (0, 1)."""


class CorpusTooSmall(RadsumError):
    """Fewer than two reports to split."""


class EmptyBatch(RadsumError):
    """Collation requested for an empty batch."""


class DegenerateVariance(RadsumError):
    """Correlation undefined: fewer than two strata or zero variance."""


class DimensionMismatch(RadsumError):
    """Vectors of unequal dimension."""


class LengthMismatch(RadsumError):
    """Distribution sequence and reference sequence differ in length."""


class UnknownReferenceWord(RadsumError):
    """Reference word absent from the embedding vocabulary."""
