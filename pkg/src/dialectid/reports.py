"""Evaluation reports and their serialized forms.

One report type per question:

* :class:`EvalReport`: how good is a set of predictions against gold
  labels (macro-F1, per-class metrics, confusion matrix);
* :class:`ComparisonReport`: adapted three-way models versus natively
  fine-tuned two-way models, language by language;
* :class:`StatsReport`: per-class counts of a dataset's splits;
* grid-search tables (lists of :class:`~dialectid.pipeline.ComboResult`).

Every report renders to JSON (exact floats, machine-facing), CSV
(human-facing tables, scores as percentages with two decimals), or a
figure file.  Serialization is deterministic: fixed key order, fixed
float formatting rules, no timestamps unless the caller supplies one in
metadata.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .corpus import ClassStats, Sample, SplitDataset, class_stats
from .dialect import AdaptationMode, DialectModel, adapt_to_track2, evaluate_dialect
from .errors import (
    EmptyInput,
    LanguageMismatch,
    TrackMismatch,
    UnsupportedFormat,
    ValidationError,
)
from .labels import DialectLabel, Track, parse_label
from .metrics import ConfusionMatrix, PerClassMetrics, confusion, per_class_metrics
from .pipeline import ComboResult

FORMATS = ("json", "csv", "plot")


def percent(value: float) -> str:
    """Render a [0, 1] score the way result tables print it."""
    return f"{100.0 * value:.2f}%"


def _check_format(fmt: str) -> str:
    if fmt not in FORMATS:
        raise UnsupportedFormat(
            f"unknown format {fmt!r}; expected one of {', '.join(FORMATS)}"
        )
    return fmt


def _write_json(path: Path, payload: object) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    text = json.dumps(payload, indent=2, ensure_ascii=False) + "\n"
    path.write_text(text, encoding="utf-8")
    return path


def _write_rows(path: Path, rows: Sequence[Sequence[object]]) -> Path:
    import csv

    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerows(rows)
    return path


@dataclass
class EvalReport:
    """Scores of one prediction set against gold labels."""

    track: Track
    macro_f1: float
    per_class: dict[DialectLabel, PerClassMetrics]
    confusion: ConfusionMatrix
    metadata: dict = field(default_factory=dict)

    @property
    def n_samples(self) -> int:
        return int(self.confusion.counts.sum())

    def to_dict(self) -> dict:
        return {
            "report": "evaluation",
            "track": self.track.value,
            "n_samples": self.n_samples,
            "macro_f1": self.macro_f1,
            "per_class": [
                {
                    "label": label.canonical,
                    "precision": m.precision,
                    "recall": m.recall,
                    "f1": m.f1,
                    "support": m.support,
                }
                for label, m in self.per_class.items()
            ],
            "confusion": {
                "labels": [label.canonical for label in self.confusion.labels],
                "counts": self.confusion.to_rows(),
                "row_normalized": [
                    [float(v) for v in row] for row in self.confusion.row_normalized()
                ],
            },
            "metadata": self.metadata,
        }

    @classmethod
    def from_dict(cls, payload: Mapping) -> "EvalReport":
        track = Track(payload["track"])
        labels = tuple(parse_label(raw) for raw in payload["confusion"]["labels"])
        per_class = {
            parse_label(entry["label"]): PerClassMetrics(
                precision=entry["precision"],
                recall=entry["recall"],
                f1=entry["f1"],
                support=entry["support"],
            )
            for entry in payload["per_class"]
        }
        matrix = ConfusionMatrix(
            labels=labels,
            counts=np.asarray(payload["confusion"]["counts"], dtype=np.int64),
        )
        return cls(
            track=track,
            macro_f1=payload["macro_f1"],
            per_class=per_class,
            confusion=matrix,
            metadata=dict(payload.get("metadata", {})),
        )


def evaluate_predictions(
    gold: Sequence[DialectLabel],
    predicted: Sequence[DialectLabel],
    track: Track,
    metadata: dict | None = None,
) -> EvalReport:
    """Score predictions against gold labels over a track's label set."""
    label_set = track.label_set
    per_class = per_class_metrics(gold, predicted, label_set)
    matrix = confusion(gold, predicted, label_set)
    score = sum(m.f1 for m in per_class.values()) / len(per_class)
    return EvalReport(
        track=track,
        macro_f1=score,
        per_class=per_class,
        confusion=matrix,
        metadata=dict(metadata or {}),
    )


@dataclass(frozen=True)
class ComparisonRow:
    language: str
    base_model: str
    finetuned_model: str
    adapted_f1: float
    finetuned_f1: float

    @property
    def delta(self) -> float:
        return self.finetuned_f1 - self.adapted_f1


@dataclass
class ComparisonReport:
    """Adapted three-way models against natively trained two-way models."""

    mode: AdaptationMode
    rows: list[ComparisonRow]
    metadata: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "report": "comparison",
            "mode": self.mode.value,
            "rows": [
                {
                    "language": row.language,
                    "base_model": row.base_model,
                    "finetuned_model": row.finetuned_model,
                    "adapted_f1": row.adapted_f1,
                    "finetuned_f1": row.finetuned_f1,
                    "delta": row.delta,
                }
                for row in self.rows
            ],
            "metadata": self.metadata,
        }

    @classmethod
    def from_dict(cls, payload: Mapping) -> "ComparisonReport":
        return cls(
            mode=AdaptationMode(payload["mode"]),
            rows=[
                ComparisonRow(
                    language=entry["language"],
                    base_model=entry["base_model"],
                    finetuned_model=entry["finetuned_model"],
                    adapted_f1=entry["adapted_f1"],
                    finetuned_f1=entry["finetuned_f1"],
                )
                for entry in payload["rows"]
            ],
            metadata=dict(payload.get("metadata", {})),
        )


def compare_adapted_vs_finetuned(
    pairs: Sequence[tuple[DialectModel, DialectModel]],
    validation: Sequence[Sample],
    mode: AdaptationMode = AdaptationMode.RENORMALIZE,
    metadata: dict | None = None,
) -> ComparisonReport:
    """Evaluate each (three-way, two-way) model pair on the two-way task.

    The three-way model is adapted with ``mode``; both models are then
    scored on the validation samples of their language.  Validation
    samples must carry national (two-way task) labels.
    """
    if not pairs:
        raise EmptyInput("need at least one model pair to compare")
    if not validation:
        raise EmptyInput("comparison needs a non-empty validation split")
    for sample in validation:
        if sample.gold is None:
            raise ValidationError(f"sample {sample.id!r} is unlabeled")
        if sample.gold.is_common:
            raise TrackMismatch(
                f"sample {sample.id!r} carries the common label {sample.gold}; "
                "the two-way comparison needs national labels only"
            )

    rows: list[ComparisonRow] = []
    for base, finetuned in pairs:
        if base.language is not finetuned.language:
            raise LanguageMismatch(
                f"pair mixes {base.language.value} ({base.name!r}) with "
                f"{finetuned.language.value} ({finetuned.name!r})"
            )
        if finetuned.track is not Track.TRACK2:
            raise TrackMismatch(
                f"model {finetuned.name!r} answers {finetuned.track}; the "
                "fine-tuned side must be a national-labels model"
            )
        subset = [s for s in validation if s.gold.language is base.language]
        if not subset:
            raise EmptyInput(
                f"validation split has no {base.language.value} samples"
            )
        adapted = adapt_to_track2(base, mode)
        rows.append(
            ComparisonRow(
                language=base.language.value,
                base_model=base.name,
                finetuned_model=finetuned.name,
                adapted_f1=evaluate_dialect(adapted, subset),
                finetuned_f1=evaluate_dialect(finetuned, subset),
            )
        )
    return ComparisonReport(mode=mode, rows=rows, metadata=dict(metadata or {}))


def _stats_entry(stats: ClassStats) -> dict:
    return {
        "total": stats.total,
        "counts": {
            label.canonical: count for label, count in stats.counts.items()
        },
        "largest": {
            "label": stats.largest[0].canonical,
            "count": stats.largest[1],
        },
        "smallest": {
            "label": stats.smallest[0].canonical,
            "count": stats.smallest[1],
        },
        "imbalance_ratio": stats.imbalance_ratio,
    }


@dataclass
class StatsReport:
    """Per-class counts for each available split of a dataset.

    ``combined`` pools train and validation, the slice whose class
    balance drives training decisions (test counts stay out of it).
    """

    track: Track
    splits: dict[str, ClassStats]
    combined: ClassStats | None = None

    def to_dict(self) -> dict:
        payload = {
            "report": "stats",
            "track": self.track.value,
            "splits": {
                name: _stats_entry(stats) for name, stats in self.splits.items()
            },
        }
        if self.combined is not None:
            payload["train_plus_validation"] = _stats_entry(self.combined)
        return payload

    @classmethod
    def from_dict(cls, payload: Mapping) -> "StatsReport":
        track = Track(payload["track"])

        def entry_stats(entry: Mapping) -> ClassStats:
            return ClassStats(
                track=track,
                counts={
                    parse_label(raw): int(count)
                    for raw, count in entry["counts"].items()
                },
            )

        combined_entry = payload.get("train_plus_validation")
        return cls(
            track=track,
            splits={
                name: entry_stats(entry)
                for name, entry in payload["splits"].items()
            },
            combined=entry_stats(combined_entry) if combined_entry else None,
        )


def dataset_stats(dataset: SplitDataset) -> StatsReport:
    """Class statistics for every non-empty split."""
    splits = {
        name: class_stats(split, dataset.track)
        for name, split in dataset.splits().items()
        if split
    }
    if not splits:
        raise EmptyInput("dataset has no populated splits")
    combined = None
    if dataset.train and dataset.validation:
        combined = class_stats(dataset.train + dataset.validation, dataset.track)
    return StatsReport(track=dataset.track, splits=splits, combined=combined)


def grid_to_dict(results: Sequence[ComboResult], candidates: int = 3) -> dict:
    """Grid-search results as one JSON-ready table, rank included."""
    return {
        "report": "grid",
        "n_combinations": len(results),
        "rows": [
            {
                "rank": rank,
                "combination": {
                    language.value: name
                    for language, name in result.combination.items()
                },
                "validation_macro_f1": result.validation_macro_f1,
                "test_macro_f1": result.test_macro_f1,
                "submission_candidate": rank <= candidates,
            }
            for rank, result in enumerate(results, start=1)
        ],
    }


def _eval_csv(report: EvalReport, path: Path) -> list[Path]:
    rows: list[list[object]] = [
        ["label", "precision", "recall", "f1", "support"]
    ]
    for label, m in report.per_class.items():
        rows.append(
            [label.canonical, percent(m.precision), percent(m.recall),
             percent(m.f1), m.support]
        )
    rows.append(["macro", "", "", percent(report.macro_f1), report.n_samples])
    written = [_write_rows(path, rows)]

    labels = [label.canonical for label in report.confusion.labels]
    counts_rows: list[list[object]] = [["gold\\predicted"] + labels]
    for label, row in zip(labels, report.confusion.to_rows()):
        counts_rows.append([label] + row)
    written.append(_write_rows(path.with_name(path.stem + "_confusion.csv"), counts_rows))

    norm_rows: list[list[object]] = [["gold\\predicted"] + labels]
    for label, row in zip(labels, report.confusion.row_normalized()):
        norm_rows.append([label] + [f"{v:.4f}" for v in row])
    written.append(
        _write_rows(path.with_name(path.stem + "_confusion_normalized.csv"), norm_rows)
    )
    return written


def _comparison_csv(report: ComparisonReport, path: Path) -> list[Path]:
    rows: list[list[object]] = [
        ["language", "base_model", "finetuned_model", "adapted_f1",
         "finetuned_f1", "delta"]
    ]
    for row in report.rows:
        rows.append(
            [row.language, row.base_model, row.finetuned_model,
             percent(row.adapted_f1), percent(row.finetuned_f1),
             percent(row.delta)]
        )
    return [_write_rows(path, rows)]


def _stats_csv(report: StatsReport, path: Path) -> list[Path]:
    rows: list[list[object]] = [["split", "label", "count"]]
    sections = dict(report.splits)
    if report.combined is not None:
        sections["train+validation"] = report.combined
    for name, stats in sections.items():
        for label, count in stats.counts.items():
            rows.append([name, label.canonical, count])
    return [_write_rows(path, rows)]


def _grid_csv(results: Sequence[ComboResult], path: Path) -> list[Path]:
    rows: list[list[object]] = [
        ["rank", "en_model", "es_model", "pt_model", "validation_macro_f1",
         "test_macro_f1", "submission_candidate"]
    ]
    for rank, result in enumerate(results, start=1):
        rows.append(
            [
                rank,
                *result.key,
                percent(result.validation_macro_f1),
                percent(result.test_macro_f1) if result.test_macro_f1 is not None else "",
                "yes" if rank <= 3 else "no",
            ]
        )
    return [_write_rows(path, rows)]


def render_report(
    report: EvalReport | ComparisonReport | StatsReport | Sequence[ComboResult],
    fmt: str,
    out: str | Path,
) -> list[Path]:
    """Write a report to ``out`` in the requested format.

    Returns every file written (CSV rendering of an evaluation report
    produces the per-class table plus two confusion-matrix files; plots
    produce one figure).  The format name must be ``json``, ``csv``, or
    ``plot``.
    """
    from . import plotting

    fmt = _check_format(fmt)
    out = Path(out)

    if isinstance(report, EvalReport):
        if fmt == "json":
            return [_write_json(out, report.to_dict())]
        if fmt == "csv":
            return _eval_csv(report, out)
        labels = [label.canonical for label in report.confusion.labels]
        return [
            plotting.confusion_heatmap(
                report.confusion.row_normalized(), labels, out,
                title=f"Row-normalized confusion ({report.track})",
            )
        ]

    if isinstance(report, ComparisonReport):
        if fmt == "json":
            return [_write_json(out, report.to_dict())]
        if fmt == "csv":
            return _comparison_csv(report, out)
        return [
            plotting.comparison_bars(
                [row.language for row in report.rows],
                [row.adapted_f1 for row in report.rows],
                [row.finetuned_f1 for row in report.rows],
                out,
                mode=report.mode.value,
            )
        ]

    if isinstance(report, StatsReport):
        if fmt == "json":
            return [_write_json(out, report.to_dict())]
        if fmt == "csv":
            return _stats_csv(report, out)
        labels = [label.canonical for label in report.track.label_set]
        series = {
            name: [stats.counts[label] for label in report.track.label_set]
            for name, stats in report.splits.items()
        }
        return [plotting.class_distribution(labels, series, out)]

    if isinstance(report, Sequence) and all(
        isinstance(item, ComboResult) for item in report
    ):
        results = list(report)
        if fmt == "json":
            return [_write_json(out, grid_to_dict(results))]
        if fmt == "csv":
            return _grid_csv(results, out)
        names = [" / ".join(result.key) for result in results]
        return [
            plotting.grid_bars(
                names, [r.validation_macro_f1 for r in results], out
            )
        ]

    raise ValidationError(f"cannot render object of type {type(report).__name__}")


def load_report(path: str | Path):
    """Read back a JSON report, detecting its type from the payload."""
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    kind = payload.get("report")
    if kind == "evaluation":
        return EvalReport.from_dict(payload)
    if kind == "comparison":
        return ComparisonReport.from_dict(payload)
    if kind == "stats":
        return StatsReport.from_dict(payload)
    if kind == "grid":
        results = [
            ComboResult(
                combination={
                    parse_language_key(language): name
                    for language, name in entry["combination"].items()
                },
                validation_macro_f1=entry["validation_macro_f1"],
                test_macro_f1=entry.get("test_macro_f1"),
            )
            for entry in payload["rows"]
        ]
        return results
    raise ValidationError(f"{path} is not a recognized report file")


def parse_language_key(raw: str):
    from .labels import parse_language

    return parse_language(raw)
