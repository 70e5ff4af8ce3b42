"""Figure rendering for reports. All figures go straight to files."""

from __future__ import annotations

from pathlib import Path
from typing import Mapping, Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def _finish(fig, out: str | Path) -> Path:
    out = Path(out)
    out.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out, dpi=150, bbox_inches="tight")
    plt.close(fig)
    return out


def confusion_heatmap(
    normalized: np.ndarray,
    labels: Sequence[str],
    out: str | Path,
    title: str = "Row-normalized confusion",
) -> Path:
    normalized = np.asarray(normalized, dtype=float)
    n = len(labels)
    fig, ax = plt.subplots(figsize=(1.1 * n + 2.5, 1.0 * n + 2.0))
    # Discrete color steps make small off-diagonal mass visible.
    image = ax.imshow(normalized, cmap=plt.get_cmap("Blues", 10), vmin=0.0, vmax=1.0)
    ax.set_xticks(range(n), labels, rotation=45, ha="right")
    ax.set_yticks(range(n), labels)
    ax.set_xlabel("predicted")
    ax.set_ylabel("gold")
    ax.set_title(title)
    for i in range(n):
        for j in range(n):
            value = normalized[i, j]
            ax.text(
                j, i, f"{value:.2f}",
                ha="center", va="center", fontsize=8,
                color="white" if value > 0.5 else "black",
            )
    fig.colorbar(image, ax=ax, fraction=0.046, pad=0.04)
    return _finish(fig, out)


def class_distribution(
    labels: Sequence[str],
    series: Mapping[str, Sequence[int]],
    out: str | Path,
) -> Path:
    fig, ax = plt.subplots(figsize=(max(6.0, 0.9 * len(labels)), 4.0))
    positions = np.arange(len(labels))
    width = 0.8 / max(1, len(series))
    for offset, (name, counts) in enumerate(series.items()):
        ax.bar(positions + offset * width, counts, width, label=name)
    ax.set_xticks(positions + 0.4 - width / 2, labels, rotation=45, ha="right")
    ax.set_ylabel("samples")
    ax.set_title("Class distribution")
    ax.legend()
    return _finish(fig, out)


def comparison_bars(
    languages: Sequence[str],
    adapted: Sequence[float],
    finetuned: Sequence[float],
    out: str | Path,
    mode: str = "renormalize",
) -> Path:
    fig, ax = plt.subplots(figsize=(max(5.0, 1.6 * len(languages)), 4.0))
    positions = np.arange(len(languages))
    ax.bar(positions - 0.18, adapted, 0.36, label=f"adapted ({mode})")
    ax.bar(positions + 0.18, finetuned, 0.36, label="fine-tuned 2-way")
    ax.set_xticks(positions, languages)
    ax.set_ylim(0.0, 1.0)
    ax.set_ylabel("macro-F1")
    ax.set_title("Two-way task: adapted vs fine-tuned")
    ax.legend()
    for x, value in list(zip(positions - 0.18, adapted)) + list(
        zip(positions + 0.18, finetuned)
    ):
        ax.text(x, value + 0.01, f"{100 * value:.1f}", ha="center", fontsize=8)
    return _finish(fig, out)


def grid_bars(names: Sequence[str], scores: Sequence[float], out: str | Path) -> Path:
    fig, ax = plt.subplots(figsize=(7.0, 0.45 * len(names) + 1.5))
    positions = np.arange(len(names))
    ax.barh(positions, scores)
    ax.set_yticks(positions, names, fontsize=8)
    ax.invert_yaxis()  # best combination on top
    ax.set_xlabel("validation macro-F1")
    ax.set_title("Model combinations")
    for y, value in zip(positions, scores):
        ax.text(value + 0.005, y, f"{100 * value:.2f}", va="center", fontsize=8)
    return _finish(fig, out)


def training_curves(
    histories: Mapping[str, Sequence[tuple[int, float | None, float]]],
    out: str | Path,
) -> Path:
    """Per-model validation curves: (epoch, train F1 or None, val F1)."""
    fig, ax = plt.subplots(figsize=(7.0, 4.0))
    for name, records in histories.items():
        epochs = [r[0] for r in records]
        ax.plot(epochs, [r[2] for r in records], marker="o", label=f"{name} val")
        if all(r[1] is not None for r in records):
            ax.plot(
                epochs, [r[1] for r in records],
                linestyle="--", alpha=0.6, label=f"{name} train",
            )
    ax.set_xlabel("epoch")
    ax.set_ylabel("macro-F1")
    ax.set_title("Training curves")
    ax.legend(fontsize=8)
    return _finish(fig, out)
