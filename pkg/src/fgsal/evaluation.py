"""Benchmark metrics: mean absolute error and 256-threshold precision/recall."""
import csv
from dataclasses import dataclass
import json

import numpy as np
from PIL import Image

from .errors import DimensionMismatch, EmptyGroundTruth

THRESHOLDS = np.arange(256)


@dataclass(frozen=True)
class PrCurve:
    thresholds: np.ndarray
    precision: np.ndarray
    recall: np.ndarray


@dataclass(frozen=True)
class ImageMetrics:
    name: str
    mae: float
    pr: PrCurve | None = None


@dataclass(frozen=True)
class DatasetReport:
    images: list
    mean_mae: float
    pr: PrCurve | None


def load_mask(path):
    """Read a ground-truth mask; gray levels of 128 and above are foreground."""
    with Image.open(path) as im:
        return (np.asarray(im.convert("L")) >= 128).astype(np.uint8)


def load_saliency(path):
    with Image.open(path) as im:
        return np.asarray(im.convert("L"), dtype=np.float64) / 255.0


def _check(s, g):
    s = np.asarray(s, dtype=np.float64)
    g = np.asarray(g)
    if s.shape != g.shape:
        raise DimensionMismatch(f"saliency map {s.shape} vs ground truth {g.shape}")
    return s, g.astype(bool)


def mae(s, g):
    """Mean absolute difference between a ``[0, 1]`` map and a binary mask."""
    s, g = _check(s, g)
    return float(np.mean(np.abs(s - g)))


def pr_curve(s, g):
    """Precision and recall of ``255 * s > t`` for every threshold ``t`` in 0..255.

    Precision is defined as 1 where nothing is selected.

    Raises
    ------
    EmptyGroundTruth
        If the mask has no foreground pixel.
    """
    s, g = _check(s, g)
    n_pos = int(g.sum())
    if n_pos == 0:
        raise EmptyGroundTruth("ground-truth mask has no foreground pixels")
    scaled = 255.0 * s
    all_sorted = np.sort(scaled, axis=None)
    pos_sorted = np.sort(scaled[g])
    selected = all_sorted.size - np.searchsorted(all_sorted, THRESHOLDS, side="right")
    hits = pos_sorted.size - np.searchsorted(pos_sorted, THRESHOLDS, side="right")
    with np.errstate(invalid="ignore", divide="ignore"):
        precision = np.where(selected > 0, hits / np.maximum(selected, 1), 1.0)
    recall = hits / n_pos
    return PrCurve(THRESHOLDS.copy(), precision, recall)


def evaluate_image(name, s, g):
    try:
        pr = pr_curve(s, g)
    except EmptyGroundTruth:
        pr = None
    return ImageMetrics(name, mae(s, g), pr)


def aggregate(results):
    """Average per-image metrics; PR curves are averaged per threshold."""
    results = list(results)
    if not results:
        raise ValueError("no per-image results to aggregate")
    curves = [r.pr for r in results if r.pr is not None]
    pr = None
    if curves:
        pr = PrCurve(THRESHOLDS.copy(),
                     np.mean([c.precision for c in curves], axis=0),
                     np.mean([c.recall for c in curves], axis=0))
    return DatasetReport(results, float(np.mean([r.mae for r in results])), pr)


def write_metrics_json(report, path):
    payload = {
        "images": [{"name": r.name, "mae": r.mae} for r in report.images],
        "mean_mae": report.mean_mae,
        "count": len(report.images),
    }
    with open(path, "w") as f:
        json.dump(payload, f, indent=2)
        f.write("\n")


def write_pr_csv(curve, path):
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["threshold", "precision", "recall"])
        for t, p, r in zip(curve.thresholds, curve.precision, curve.recall):
            writer.writerow([int(t), repr(float(p)), repr(float(r))])
