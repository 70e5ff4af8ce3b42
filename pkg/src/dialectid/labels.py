"""Label taxonomy for multilingual dialect identification.

Three languages (English, Spanish, Portuguese), each with two national
varieties plus a "common" variety for text that is not markedly national.
The full nine-label set is track 1; dropping the three common labels
leaves the six-label national-only set, track 2.

A label renders as ``<language>-<variety>`` (``EN-US``) except for the
common variety, which renders as the bare language code (``EN``).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

from .errors import InvalidNarrowing, TrackMismatch, UnknownLabel


class LanguageCode(enum.Enum):
    EN = "EN"
    ES = "ES"
    PT = "PT"

    def __str__(self) -> str:
        return self.value


class Variety(enum.Enum):
    US = "US"
    GB = "GB"
    ES = "ES"
    AR = "AR"
    PT = "PT"
    BR = "BR"
    COMMON = "COMMON"

    def __str__(self) -> str:
        return self.value


# National varieties per language, in canonical order.
NATIONAL_VARIETIES: dict[LanguageCode, tuple[Variety, Variety]] = {
    LanguageCode.EN: (Variety.US, Variety.GB),
    LanguageCode.ES: (Variety.ES, Variety.AR),
    LanguageCode.PT: (Variety.PT, Variety.BR),
}


@dataclass(frozen=True, order=False)
class DialectLabel:
    """A (language, variety) pair; the atomic prediction target."""

    language: LanguageCode
    variety: Variety

    def __post_init__(self) -> None:
        allowed = NATIONAL_VARIETIES[self.language] + (Variety.COMMON,)
        if self.variety not in allowed:
            raise UnknownLabel(
                f"variety {self.variety.value} does not occur with language "
                f"{self.language.value}"
            )

    @property
    def is_common(self) -> bool:
        return self.variety is Variety.COMMON

    @property
    def canonical(self) -> str:
        if self.is_common:
            return self.language.value
        return f"{self.language.value}-{self.variety.value}"

    def __str__(self) -> str:
        return self.canonical

    def __repr__(self) -> str:
        return f"DialectLabel({self.canonical})"


def _build_track1() -> tuple[DialectLabel, ...]:
    out: list[DialectLabel] = []
    for language in LanguageCode:
        for variety in NATIONAL_VARIETIES[language]:
            out.append(DialectLabel(language, variety))
        out.append(DialectLabel(language, Variety.COMMON))
    return tuple(out)


#: Canonical nine-label order: national pair then common, per language,
#: languages in EN, ES, PT order.  All tabular output follows this order.
TRACK1_LABELS: tuple[DialectLabel, ...] = _build_track1()

#: Canonical six-label order: track 1 with the common labels removed.
TRACK2_LABELS: tuple[DialectLabel, ...] = tuple(
    label for label in TRACK1_LABELS if not label.is_common
)

_CANONICAL: dict[str, DialectLabel] = {label.canonical: label for label in TRACK1_LABELS}

_TRACK1_INDEX: dict[DialectLabel, int] = {
    label: i for i, label in enumerate(TRACK1_LABELS)
}


class Track(enum.Enum):
    """Which label set an experiment runs against."""

    TRACK1 = 1
    TRACK2 = 2

    @property
    def label_set(self) -> tuple[DialectLabel, ...]:
        return TRACK1_LABELS if self is Track.TRACK1 else TRACK2_LABELS

    def labels_for(self, language: LanguageCode) -> tuple[DialectLabel, ...]:
        """Canonical per-language label subset for this track."""
        return tuple(label for label in self.label_set if label.language is language)

    def check_member(self, label: DialectLabel) -> DialectLabel:
        if label not in self.label_set:
            raise TrackMismatch(f"label {label} is not in the track {self.value} label set")
        return label

    def __str__(self) -> str:
        return f"track{self.value}"


def parse_label(raw: str) -> DialectLabel:
    """Parse a label string such as ``EN-US``, ``pt-br``, or ``ES``.

    Case-insensitive, surrounding whitespace ignored.  Raises
    :class:`UnknownLabel` for anything outside the nine-label set.
    """
    if not isinstance(raw, str):
        raise UnknownLabel(f"label must be a string, got {type(raw).__name__}")
    key = raw.strip().upper()
    label = _CANONICAL.get(key)
    if label is None:
        raise UnknownLabel(f"unknown label {raw!r}; expected one of "
                           + ", ".join(sorted(_CANONICAL)))
    return label


def parse_language(raw: str) -> LanguageCode:
    key = raw.strip().upper()
    try:
        return LanguageCode(key)
    except ValueError:
        raise UnknownLabel(
            f"unknown language {raw!r}; expected one of EN, ES, PT"
        ) from None


def canonical_index(label: DialectLabel) -> int:
    """Position of a label in the canonical nine-label order."""
    return _TRACK1_INDEX[label]


def sort_canonical(labels) -> list[DialectLabel]:
    return sorted(labels, key=canonical_index)


def narrow_to_national(label: DialectLabel) -> DialectLabel:
    """Identity on national labels; common labels cannot be narrowed."""
    if label.is_common:
        raise InvalidNarrowing(
            f"label {label} has no national counterpart; common-variety "
            "samples are dropped, not converted, when moving to track 2"
        )
    return label
