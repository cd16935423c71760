"""Segmentation scores: F-measure, pseudo-F, IoU, Dice, and blank-page false positives.

Metrics that are undefined for an input (an empty ground-truth plane for
F/pF/IoU, a non-empty one for the false-positive rate) return ``None``.
Summaries average only the defined values.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .raster import LabelStack
from .skeleton import skeletonize

log = logging.getLogger(__name__)

METRIC_NAMES = ("f_measure", "pf_measure", "iou", "dice", "fp_percent")


class MetricError(ValueError):
    pass


@dataclass(frozen=True)
class PredictionStack:
    """Per-class probability planes, shape (C, H, W), values in [0, 1]."""

    classes: tuple[str, ...]
    planes: np.ndarray

    def __post_init__(self):
        planes = np.asarray(self.planes, dtype=np.float64)
        if planes.ndim != 3 or planes.shape[0] != len(self.classes):
            raise MetricError(f"planes shape {planes.shape} does not match {len(self.classes)} classes")
        if planes.size and (np.isnan(planes).any() or planes.min() < 0.0 or planes.max() > 1.0):
            raise MetricError("probabilities must lie in [0, 1]")
        object.__setattr__(self, "classes", tuple(self.classes))
        object.__setattr__(self, "planes", planes)

    @property
    def shape(self) -> tuple[int, int]:
        return self.planes.shape[1:]

    def plane(self, cls: str) -> np.ndarray:
        return self.planes[self.classes.index(cls)]


def _pair(pred: np.ndarray, gt: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    pred, gt = np.asarray(pred), np.asarray(gt)
    if pred.shape != gt.shape:
        raise MetricError(f"prediction {pred.shape} and ground truth {gt.shape} differ in size")
    return pred != 0, gt != 0


def binarize(pred: PredictionStack, threshold: float = 0.5) -> LabelStack:
    """Round probabilities to {0, 1}; exactly ``threshold`` rounds up."""
    return LabelStack(pred.classes, (pred.planes >= threshold).astype(np.uint8))


def confusion(pred: np.ndarray, gt: np.ndarray) -> tuple[int, int, int]:
    """(TP, FP, FN) for two binary planes."""
    p, g = _pair(pred, gt)
    tp = int(np.count_nonzero(p & g))
    return tp, int(np.count_nonzero(p)) - tp, int(np.count_nonzero(g)) - tp


def f_measure(pred: np.ndarray, gt: np.ndarray) -> float | None:
    tp, fp, fn = confusion(pred, gt)
    if tp + fn == 0:
        return None
    if tp == 0:
        return 0.0
    precision = tp / (tp + fp)
    recall = tp / (tp + fn)
    return 2 * precision * recall / (precision + recall)


def pf_measure(pred: np.ndarray, gt: np.ndarray, skeleton: np.ndarray | None = None) -> float | None:
    """F-measure with recall taken against the skeleton of the ground truth."""
    p, g = _pair(pred, gt)
    if not g.any():
        return None
    skel = skeletonize(g) != 0 if skeleton is None else np.asarray(skeleton) != 0
    tp = int(np.count_nonzero(p & g))
    if tp == 0:
        return 0.0
    precision = tp / int(np.count_nonzero(p))
    pseudo_recall = int(np.count_nonzero(p & skel)) / int(np.count_nonzero(skel))
    if precision + pseudo_recall == 0:
        return 0.0
    return 2 * precision * pseudo_recall / (precision + pseudo_recall)


def iou(pred: np.ndarray, gt: np.ndarray) -> float | None:
    tp, fp, fn = confusion(pred, gt)
    if tp + fn == 0:
        return None
    return tp / (tp + fp + fn)


def dice_coefficient(pred: np.ndarray, gt: np.ndarray) -> float | None:
    """2 sum(p*y) / (sum(p^2) + sum(y^2)) on raw probabilities."""
    p = np.asarray(pred, dtype=np.float64)
    y = np.asarray(gt, dtype=np.float64)
    if p.shape != y.shape:
        raise MetricError(f"prediction {p.shape} and ground truth {y.shape} differ in size")
    denom = float(np.sum(p * p) + np.sum(y * y))
    if denom == 0.0:
        return None
    return 2.0 * float(np.sum(p * y)) / denom


def dice_per_class(pred: PredictionStack, gt: LabelStack) -> dict[str, float | None]:
    if pred.classes != gt.classes:
        raise MetricError(f"class order differs: {pred.classes} vs {gt.classes}")
    if pred.shape != gt.shape:
        raise MetricError(f"prediction {pred.shape} and ground truth {gt.shape} differ in size")
    return {c: dice_coefficient(p, y) for c, p, y in zip(gt.classes, pred.planes, gt.planes)}


def dice_loss(pred: PredictionStack, gt: LabelStack) -> float:
    """One minus the mean per-class Dice; undefined classes are left out of the mean."""
    per_class = dice_per_class(pred, gt)
    defined = [v for v in per_class.values() if v is not None]
    skipped = [c for c, v in per_class.items() if v is None]
    if not defined:
        raise MetricError("Dice is undefined for every class")
    if skipped:
        log.info("dice_loss: classes without prediction or ground truth excluded: %s", ", ".join(skipped))
    return 1.0 - sum(defined) / len(defined)


def fp_percent(pred: np.ndarray, gt: np.ndarray) -> float | None:
    """Percent of pixels predicted positive on a page whose ground truth is empty."""
    p, g = _pair(pred, gt)
    if g.any():
        return None
    return 100.0 * int(np.count_nonzero(p)) / p.size


def image_metrics(pred: np.ndarray, gt: np.ndarray) -> dict[str, float | None]:
    """All five scores for one binary plane pair."""
    p, g = _pair(pred, gt)
    if not g.any():
        return {"f_measure": None, "pf_measure": None, "iou": None, "dice": None, "fp_percent": fp_percent(p, g)}
    return {
        "f_measure": f_measure(p, g),
        "pf_measure": pf_measure(p, g),
        "iou": iou(p, g),
        "dice": dice_coefficient(p, g),
        "fp_percent": None,
    }


def _mean(values) -> float | None:
    vals = [v for v in values if v is not None]
    return sum(vals) / len(vals) if vals else None


@dataclass
class MetricsReport:
    classes: tuple[str, ...]
    image_ids: list[str]
    per_image: dict[str, list[dict[str, float | None]]] = field(default_factory=dict)

    def mean(self, cls: str, metric: str) -> float | None:
        return _mean(row[metric] for row in self.per_image[cls])

    def summary(self) -> dict[str, dict[str, float | None]]:
        return {c: {f"mean_{m}": self.mean(c, m) for m in METRIC_NAMES} for c in self.classes}

    def to_dict(self) -> dict:
        out = {}
        for c in self.classes:
            rows = [{"image": i, **row} for i, row in zip(self.image_ids, self.per_image[c])]
            out[c] = {"per_image": rows, **{f"mean_{m}": self.mean(c, m) for m in METRIC_NAMES}}
        return out

    def write(self, path: str | Path) -> None:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n")


def evaluate_images(
    preds: Sequence[PredictionStack | LabelStack],
    gts: Sequence[LabelStack],
    image_ids: Sequence[str] | None = None,
) -> MetricsReport:
    """Score each image separately and average per class over images (unweighted)."""
    if len(preds) != len(gts):
        raise MetricError(f"{len(preds)} predictions for {len(gts)} ground-truth images")
    if not gts:
        raise MetricError("nothing to evaluate")
    ids = list(image_ids) if image_ids is not None else [str(i) for i in range(len(gts))]
    classes = gts[0].classes
    report = MetricsReport(classes, ids, {c: [] for c in classes})
    for k, (pred, gt) in enumerate(zip(preds, gts)):
        if gt.classes != classes or pred.classes != classes:
            raise MetricError(f"image {ids[k]}: class order differs from {classes}")
        if pred.shape != gt.shape:
            raise MetricError(f"image {ids[k]}: prediction {pred.shape} and ground truth {gt.shape} differ in size")
        binary = binarize(pred) if isinstance(pred, PredictionStack) else pred
        for c, p, g in zip(classes, binary.planes, gt.planes):
            report.per_image[c].append(image_metrics(p, g))
    return report
