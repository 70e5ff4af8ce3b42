"""Model persistence and the on-disk run workspace.

A workspace root holds one ``registry.json`` mapping model identifiers
to checkpoint files, plus one directory per run::

    <root>/
      registry.json
      runs/<run-id>/
        config.json
        checkpoints/   saved model weights (.npz + .json sidecar)
        history/       per-epoch training histories (.json)
        reports/       evaluation output (json/csv/figures)
        predictions/   prediction csv files

Only reproducible models are persisted: the built-in n-gram models
(weights plus vectorizer settings), external replay models (a pointer
to the selected epoch's prediction file), and restrictions of either to
the national-label task (a pointer to the base model plus the mode).
Oracle routers are rebuilt from data at use time and never stored.
"""

from __future__ import annotations

import json
import os
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Mapping

import numpy as np

from .dialect import (
    AdaptationMode,
    CheckpointRecord,
    DialectModel,
    ExternalDialectModel,
    NgramDialectModel,
    adapt_to_track2,
    read_prediction_table,
)
from .errors import ConfigError, UnknownModelId, ValidationError
from .features import HashedNgramVectorizer
from .labels import LanguageCode, Track, parse_language
from .lid import ExternalLid, LidEpochRecord, LidModel, NgramLidModel

RUN_SUBDIRS = ("checkpoints", "history", "reports", "predictions")


def create_run_dir(root: str | Path, run_id: str, force: bool = False) -> Path:
    """Create ``<root>/runs/<run-id>`` with the standard subdirectories.

    Refuses to reuse an existing run directory unless ``force`` is set,
    so two invocations cannot silently interleave their artifacts.
    """
    run_dir = Path(root) / "runs" / run_id
    if run_dir.exists() and not force:
        raise ConfigError(
            f"run directory {run_dir} already exists; pass force to reuse it"
        )
    for sub in RUN_SUBDIRS:
        (run_dir / sub).mkdir(parents=True, exist_ok=True)
    return run_dir


class _RegistryLock:
    """Exclusive advisory lock via an O_EXCL sentinel file."""

    def __init__(self, path: Path, timeout: float = 10.0):
        self.path = path
        self.timeout = timeout
        self._fd: int | None = None

    def __enter__(self) -> "_RegistryLock":
        deadline = time.monotonic() + self.timeout
        while True:
            try:
                self._fd = os.open(self.path, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
                return self
            except FileExistsError:
                if time.monotonic() >= deadline:
                    raise OSError(
                        f"could not acquire registry lock {self.path}; remove "
                        "it if a previous run crashed"
                    ) from None
                time.sleep(0.05)

    def __exit__(self, *exc_info) -> None:
        if self._fd is not None:
            os.close(self._fd)
            self.path.unlink(missing_ok=True)


@dataclass
class RegistryEntry:
    """One persisted model: where it lives and how to rebuild it."""

    model_id: str
    role: str  # "lid" or "dialect"
    kind: str  # "ngram", "external", or "restricted"
    language: str | None = None
    track: int | None = None
    checkpoint: str | None = None  # relative to the workspace root
    history: str | None = None
    selected_epoch: int | None = None
    config_hash: str | None = None
    run_id: str | None = None
    extra: dict = field(default_factory=dict)


class ModelRegistry:
    """JSON-backed map from model identifiers to registry entries."""

    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.path = self.root / "registry.json"
        self.entries: dict[str, RegistryEntry] = {}
        if self.path.exists():
            payload = json.loads(self.path.read_text(encoding="utf-8"))
            for raw in payload.get("models", []):
                entry = RegistryEntry(**raw)
                self.entries[entry.model_id] = entry

    def save(self) -> None:
        self.root.mkdir(parents=True, exist_ok=True)
        payload = {
            "models": [
                asdict(self.entries[model_id]) for model_id in sorted(self.entries)
            ]
        }
        with _RegistryLock(self.path.with_suffix(".lock")):
            self.path.write_text(
                json.dumps(payload, indent=2, ensure_ascii=False) + "\n",
                encoding="utf-8",
            )

    def add(self, entry: RegistryEntry, replace: bool = False) -> None:
        if entry.model_id in self.entries and not replace:
            raise ValidationError(
                f"model id {entry.model_id!r} is already registered; pass "
                "force to replace it"
            )
        self.entries[entry.model_id] = entry

    def get(self, model_id: str) -> RegistryEntry:
        entry = self.entries.get(model_id)
        if entry is None:
            known = ", ".join(sorted(self.entries)) or "(registry is empty)"
            raise UnknownModelId(f"no model {model_id!r}; known: {known}")
        return entry

    def ids(self) -> list[str]:
        return sorted(self.entries)

    def _resolve(self, relative: str | None) -> Path:
        if not relative:
            raise ValidationError("registry entry has no checkpoint path")
        return self.root / relative

    def load_lid(self, model_id: str) -> LidModel:
        entry = self.get(model_id)
        if entry.role != "lid":
            raise ValidationError(f"model {model_id!r} is not a language router")
        if entry.kind == "ngram":
            return load_ngram_lid(self._resolve(entry.checkpoint))
        if entry.kind == "external":
            return ExternalLid.load(self._resolve(entry.checkpoint))
        raise ValidationError(f"cannot load router of kind {entry.kind!r}")

    def load_dialect(self, model_id: str) -> DialectModel:
        entry = self.get(model_id)
        if entry.role != "dialect":
            raise ValidationError(f"model {model_id!r} is not a dialect model")
        if entry.kind == "ngram":
            return load_ngram_dialect(self._resolve(entry.checkpoint), name=entry.model_id)
        if entry.kind == "external":
            language = parse_language(entry.language or "")
            track = Track(entry.track)
            table = read_prediction_table(
                self._resolve(entry.checkpoint), len(track.labels_for(language))
            )
            return ExternalDialectModel(
                language=language,
                track=track,
                table=table,
                name=entry.model_id,
                epoch=entry.selected_epoch,
            )
        if entry.kind == "restricted":
            base = self.load_dialect(entry.extra["base_model"])
            return adapt_to_track2(base, AdaptationMode(entry.extra["mode"]))
        raise ValidationError(f"cannot load dialect model of kind {entry.kind!r}")


def save_ngram_lid(model: NgramLidModel, path: str | Path) -> Path:
    """Write router weights as .npz with a .json settings sidecar."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    np.savez(path, weights=model.weights)
    meta = {
        "model": "lid-ngram",
        "vectorizer": model.vectorizer.config(),
    }
    path.with_suffix(".json").write_text(
        json.dumps(meta, indent=2) + "\n", encoding="utf-8"
    )
    return path


def load_ngram_lid(path: str | Path) -> NgramLidModel:
    path = Path(path)
    meta = json.loads(path.with_suffix(".json").read_text(encoding="utf-8"))
    if meta.get("model") != "lid-ngram":
        raise ValidationError(f"{path} does not hold a router checkpoint")
    with np.load(path) as data:
        weights = data["weights"]
    return NgramLidModel(
        HashedNgramVectorizer.from_config(meta["vectorizer"]), weights
    )


def save_ngram_dialect(model: NgramDialectModel, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    np.savez(path, weights=model.weights)
    meta = {
        "model": "dialect-ngram",
        "language": model.language.value,
        "track": model.track.value,
        "vectorizer": model.vectorizer.config(),
    }
    path.with_suffix(".json").write_text(
        json.dumps(meta, indent=2) + "\n", encoding="utf-8"
    )
    return path


def load_ngram_dialect(path: str | Path, name: str = "") -> NgramDialectModel:
    path = Path(path)
    meta = json.loads(path.with_suffix(".json").read_text(encoding="utf-8"))
    if meta.get("model") != "dialect-ngram":
        raise ValidationError(f"{path} does not hold a dialect checkpoint")
    with np.load(path) as data:
        weights = data["weights"]
    return NgramDialectModel(
        language=parse_language(meta["language"]),
        track=Track(meta["track"]),
        vectorizer=HashedNgramVectorizer.from_config(meta["vectorizer"]),
        weights=weights,
        name=name,
    )


def write_dialect_history(history: list[CheckpointRecord], path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = {
        "epochs": [
            {
                "epoch": record.epoch,
                "loss": record.loss,
                "train_macro_f1": record.train_macro_f1,
                "validation_macro_f1": record.validation_macro_f1,
            }
            for record in history
        ]
    }
    path.write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
    return path


def read_dialect_history(path: str | Path) -> list[CheckpointRecord]:
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    return [
        CheckpointRecord(
            epoch=entry["epoch"],
            validation_macro_f1=entry["validation_macro_f1"],
            train_macro_f1=entry.get("train_macro_f1"),
            loss=entry.get("loss"),
        )
        for entry in payload["epochs"]
    ]


def write_lid_history(history: tuple[LidEpochRecord, ...], path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = {
        "epochs": [
            {
                "epoch": record.epoch,
                "loss": record.loss,
                "train_accuracy": record.train_accuracy,
                "validation_accuracy": record.validation_accuracy,
            }
            for record in history
        ]
    }
    path.write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
    return path


def config_hash(payload: Mapping) -> str:
    """Stable short hash of a JSON-compatible configuration mapping."""
    import hashlib

    canonical = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:12]
