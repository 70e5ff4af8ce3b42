"""Exception hierarchy for the dialectid toolkit.

Anything raised for a caller mistake (bad labels, malformed input rows,
violated preconditions) derives from :class:`ValidationError`, which the
command line maps to exit code 1.  Runtime failures that are not the
caller's fault (unreadable files, broken external prediction tables) map
to exit code 2; plain :class:`OSError` is used for filesystem problems.
"""

from __future__ import annotations


class DialectIdError(Exception):
    """Base class for all toolkit errors."""


class ValidationError(DialectIdError, ValueError):
    """A caller violated an input contract."""


class UnknownLabel(ValidationError):
    """A label string does not belong to the supported label set."""


class MalformedRow(ValidationError):
    """A data file row could not be parsed.

    Carries the 1-based row number so permissive loaders can report it.
    """

    def __init__(self, row_number: int, message: str):
        super().__init__(f"row {row_number}: {message}")
        self.row_number = row_number
        self.reason = message


class EmptyInput(ValidationError):
    """An operation that needs at least one sample received none."""


class EmptyText(ValidationError):
    """A sample text is empty or whitespace-only."""


class LabelOutsideSet(ValidationError):
    """A label fell outside the label set an operation was scoped to."""


class TrackMismatch(ValidationError):
    """A label is not a member of the requested track's label set."""


class InvalidNarrowing(ValidationError):
    """A track conversion was requested in an unsupported direction."""


class SingleClassInput(ValidationError):
    """Training data covers fewer than two classes."""


class UnknownSampleId(ValidationError):
    """An id-keyed model has no entry for the requested sample id."""


class LanguageMismatch(ValidationError):
    """Two models that must share a language do not."""


class NotThreeWay(ValidationError):
    """Track-2 adaptation requires a full three-label base model."""


class MissingLanguage(ValidationError):
    """A pipeline or grid is missing a classifier for some language."""


class EmptyHistory(ValidationError):
    """Checkpoint selection received an empty training history."""

class LengthMismatch(ValidationError):
    """Two parallel sequences differ in length."""


class UnsupportedFormat(ValidationError):
    """An output format name is not one of the supported formats."""


class UnknownModelId(ValidationError):
    """A model identifier is not present in the registry."""


class ConfigError(ValidationError):
    """A configuration value is out of range or inconsistent."""


class CliUsageError(ValidationError):
    """Bad command line arguments."""


class ExternalAdapterError(DialectIdError):
    """An external prediction table is missing, truncated, or inconsistent."""


class BatchPredictionError(DialectIdError):
    """One or more samples in a batch failed; carries per-sample detail.

    ``failures`` is a list of ``(index, sample_id, error)`` tuples in input
    order, so callers can see every failing sample in a single pass.
    """

    def __init__(self, failures: list[tuple[int, str, Exception]]):
        detail = "; ".join(
            f"#{index} id={sample_id!r}: {error}" for index, sample_id, error in failures
        )
        super().__init__(f"{len(failures)} sample(s) failed: {detail}")
        self.failures = failures
