"""Overlap and boundary metrics for binary lesion masks.

Overlap scores (IoU, precision, recall, F1) are computed from confusion
counts. Boundary scores are the Hausdorff family over foreground point
sets: directed and symmetric Hausdorff, and the robust percentile variant
(HD95 by default). Brute force over all point pairs is the contract here;
the kernel backend only accelerates it.

Degenerate-input conventions (fixed so behavior is testable):
  - both masks empty: iou = precision = recall = 1, boundary distance 0
  - exactly one point set empty: boundary distance falls back to
    ``empty_distance`` (slice-level code passes the raster diagonal, the
    largest possible pixel distance, so a fully missed lesion is maximally
    penalized while log aggregation stays finite)
"""

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from . import _kernels
from .raster import ConfusionCounts, Mask, confusion, foreground_points

__all__ = [
    "MetricsRecord",
    "AggregateMetrics",
    "iou",
    "precision",
    "recall",
    "f1",
    "directed_hausdorff",
    "hausdorff",
    "hd_percentile",
    "hd95",
    "aggregate_h",
    "z_transform",
    "slice_metrics",
    "aggregate_metrics",
]

Z_EPSILON = 1e-4  # gap offset keeping the log argument positive at the optimum


@dataclass(frozen=True)
class MetricsRecord:
    """Per-slice evaluation record."""

    iou: float
    precision: float
    recall: float
    f1: float
    hd95: float

    def __post_init__(self):
        for name in ("iou", "precision", "recall", "f1", "hd95"):
            v = float(getattr(self, name))
            if not math.isfinite(v):
                raise ValueError(f"{name} must be finite, got {v!r}")
            if name != "hd95" and not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {v!r}")
            if name == "hd95" and v < 0.0:
                raise ValueError(f"hd95 must be non-negative, got {v!r}")
            object.__setattr__(self, name, v)


@dataclass(frozen=True)
class AggregateMetrics:
    """Dataset-level record: micro-averaged overlap scores plus the boundary sum."""

    iou: float
    precision: float
    recall: float
    f1: float
    h: float


def iou(c: ConfusionCounts) -> float:
    """Intersection over union, tp / (tp + fp + fn); 1.0 when both masks are empty."""
    denom = c.tp + c.fp + c.fn
    if denom == 0:
        return 1.0
    return c.tp / denom


def precision(c: ConfusionCounts) -> float:
    """tp / (tp + fp); empty prediction scores 1.0 against an empty truth, else 0.0."""
    denom = c.tp + c.fp
    if denom == 0:
        return 1.0 if c.fn == 0 else 0.0
    return c.tp / denom


def recall(c: ConfusionCounts) -> float:
    """tp / (tp + fn); empty truth scores 1.0 against an empty prediction, else 0.0."""
    denom = c.tp + c.fn
    if denom == 0:
        return 1.0 if c.fp == 0 else 0.0
    return c.tp / denom


def f1(p: float, r: float) -> float:
    """Harmonic mean 2pr / (p + r); 0.0 when p + r = 0."""
    if p + r == 0.0:
        return 0.0
    return 2.0 * p * r / (p + r)


def _as_points(points) -> np.ndarray:
    arr = np.asarray(points, dtype=np.float64)
    if arr.size == 0:
        return np.zeros((0, 2), dtype=np.float64)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError(f"point set must have shape (n, 2), got {arr.shape}")
    return np.ascontiguousarray(arr)


def directed_hausdorff(a, b, empty_distance: float = 0.0) -> float:
    """Greatest distance from any point of a to its nearest point of b.

    An empty a gives 0.0 (nothing is far from b); an empty b with a
    nonempty a gives ``empty_distance``.
    """
    a, b = _as_points(a), _as_points(b)
    if len(a) == 0:
        return 0.0
    if len(b) == 0:
        return float(empty_distance)
    return float(_kernels.min_distances(a, b).max())


def hausdorff(a, b, empty_distance: float = 0.0) -> float:
    """Symmetric Hausdorff distance: max of the two directed distances."""
    a, b = _as_points(a), _as_points(b)
    if len(a) == 0 and len(b) == 0:
        return 0.0
    if len(a) == 0 or len(b) == 0:
        return float(empty_distance)
    return max(
        float(_kernels.min_distances(a, b).max()),
        float(_kernels.min_distances(b, a).max()),
    )


def _nearest_rank(dists: np.ndarray, percentile: float) -> float:
    # 1-based rank ceil(q*m) into the ascending sort, clamped to [1, m]
    m = len(dists)
    k = min(max(math.ceil(percentile * m), 1), m)
    return float(np.sort(dists)[k - 1])


def hd_percentile(a, b, percentile: float = 0.95, empty_distance: float = 0.0) -> float:
    """Percentile Hausdorff distance, robust to a few outlier points.

    For each direction, the nearest-neighbor distance of every source point
    is collected and sorted ascending, and the nearest-rank percentile
    (1-based index ceil(q*m), no interpolation) is taken; the result is the
    max of the two directed percentiles. percentile=1.0 recovers the plain
    symmetric Hausdorff distance.
    """
    if not 0.0 <= percentile <= 1.0:
        raise ValueError(f"percentile must lie in [0, 1], got {percentile}")
    a, b = _as_points(a), _as_points(b)
    if len(a) == 0 and len(b) == 0:
        return 0.0
    if len(a) == 0 or len(b) == 0:
        return float(empty_distance)
    return max(
        _nearest_rank(_kernels.min_distances(a, b), percentile),
        _nearest_rank(_kernels.min_distances(b, a), percentile),
    )


def hd95(a, b, empty_distance: float = 0.0) -> float:
    """95th-percentile Hausdorff distance (see hd_percentile)."""
    return hd_percentile(a, b, 0.95, empty_distance)


def aggregate_h(hd95_values: Iterable[float]) -> float:
    """Dataset boundary score: sum over slices of log10(HD95 + 1).

    Additive over concatenation, 0 for perfect boundaries, and finite for
    any finite input.
    """
    total = 0.0
    for v in hd95_values:
        v = float(v)
        if not math.isfinite(v) or v < 0.0:
            raise ValueError(f"hd95 values must be finite and non-negative, got {v!r}")
        total += math.log10(v + 1.0)
    return total


def z_transform(iou_value: float, max_iou: float) -> float:
    """Spread tiny IoU gaps for visualization: log base 9/10 of |iou - max - 1e-4|.

    Strictly decreasing in the gap to the maximum; at the maximum itself the
    value is log_{0.9}(1e-4), about 87.4176. max_iou must be the true
    maximum of the enumeration, so the log argument stays positive.
    """
    if iou_value > max_iou:
        raise ValueError(f"iou_value {iou_value} exceeds max_iou {max_iou}")
    return math.log(abs(iou_value - max_iou - Z_EPSILON)) / math.log(0.9)


def slice_metrics(prediction: Mask, truth: Mask, percentile: float = 0.95) -> MetricsRecord:
    """All per-slice scores of a predicted mask against an annotation.

    The boundary metric is computed between foreground point sets; when
    exactly one mask is empty it falls back to the raster diagonal.
    """
    c = confusion(prediction, truth)
    p = precision(c)
    r = recall(c)
    diagonal = math.hypot(truth.height - 1, truth.width - 1)
    hd = hd_percentile(
        foreground_points(prediction),
        foreground_points(truth),
        percentile,
        empty_distance=diagonal,
    )
    return MetricsRecord(iou=iou(c), precision=p, recall=r, f1=f1(p, r), hd95=hd)


def aggregate_metrics(
    counts: Iterable[ConfusionCounts], hd95_values: Iterable[float]
) -> AggregateMetrics:
    """Micro-averaged overlap scores (pooled counts) plus the boundary sum."""
    pooled = ConfusionCounts(0, 0, 0, 0)
    for c in counts:
        pooled = pooled + c
    p = precision(pooled)
    r = recall(pooled)
    return AggregateMetrics(
        iou=iou(pooled), precision=p, recall=r, f1=f1(p, r), h=aggregate_h(hd95_values)
    )
