"""Core raster types: probability maps, binary masks, confusion counts.

Rasters are dense, row-major, immutable 2-D arrays. Pixel coordinates are
(row, col) with row 0 at the top; all distance computations downstream use
this frame with unit pixel spacing.
"""

from dataclasses import dataclass

import numpy as np

__all__ = [
    "ShapeError",
    "ProbMap",
    "Mask",
    "ConfusionCounts",
    "binarize",
    "confusion",
    "foreground_points",
]


class ShapeError(ValueError):
    """Raised when rasters of mismatched dimensions are combined."""


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class ProbMap:
    """One model's per-pixel foreground probability raster.

    Stored as a read-only float32 array of shape (height, width); every
    value must be finite and in [0, 1]. float32 is the storage precision
    of the on-disk format, so in-memory maps round-trip bit-exactly.
    """

    pixels: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.pixels, dtype=np.float32)
        if arr.ndim != 2 or arr.size == 0:
            raise ValueError(f"probability map must be a non-empty 2-D raster, got shape {arr.shape}")
        if not np.isfinite(arr).all():
            raise ValueError("probability map contains non-finite values")
        if (arr < 0.0).any() or (arr > 1.0).any():
            raise ValueError("probability map values must lie in [0, 1]")
        object.__setattr__(self, "pixels", _freeze(arr))

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    def __eq__(self, other) -> bool:
        if not isinstance(other, ProbMap):
            return NotImplemented
        return self.pixels.shape == other.pixels.shape and np.array_equal(self.pixels, other.pixels)


@dataclass(frozen=True, eq=False)
class Mask:
    """Binary foreground mask: a prediction or a ground-truth annotation.

    Stored as a read-only bool array of shape (height, width).
    """

    pixels: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.pixels)
        if arr.dtype != np.bool_:
            if not np.isin(arr, (0, 1)).all():
                raise ValueError("mask values must be boolean or 0/1")
            arr = arr.astype(np.bool_)
        if arr.ndim != 2 or arr.size == 0:
            raise ValueError(f"mask must be a non-empty 2-D raster, got shape {arr.shape}")
        object.__setattr__(self, "pixels", _freeze(arr))

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    def foreground_count(self) -> int:
        return int(np.count_nonzero(self.pixels))

    def __eq__(self, other) -> bool:
        if not isinstance(other, Mask):
            return NotImplemented
        return self.pixels.shape == other.pixels.shape and np.array_equal(self.pixels, other.pixels)


@dataclass(frozen=True)
class ConfusionCounts:
    """Pixel tallies of a prediction against an annotation."""

    tp: int
    fp: int
    fn: int
    tn: int

    def __post_init__(self):
        for name in ("tp", "fp", "fn", "tn"):
            v = getattr(self, name)
            if not isinstance(v, (int, np.integer)) or v < 0:
                raise ValueError(f"{name} must be a non-negative integer, got {v!r}")

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn

    def __add__(self, other: "ConfusionCounts") -> "ConfusionCounts":
        return ConfusionCounts(
            self.tp + other.tp, self.fp + other.fp, self.fn + other.fn, self.tn + other.tn
        )


def binarize(probmap: ProbMap, threshold: float = 0.5) -> Mask:
    """Threshold a probability map: a pixel is foreground iff value >= threshold.

    The comparison is >= (not >) so behavior at exactly 0.5 is deterministic.
    """
    if not 0.0 <= threshold <= 1.0:
        raise ValueError(f"threshold must lie in [0, 1], got {threshold}")
    return Mask(probmap.pixels >= np.float64(threshold))


def confusion(prediction: Mask, truth: Mask) -> ConfusionCounts:
    """Count TP/FP/FN/TN pixels of a prediction against an annotation."""
    if prediction.pixels.shape != truth.pixels.shape:
        raise ShapeError(
            f"prediction is {prediction.height}x{prediction.width} but "
            f"truth is {truth.height}x{truth.width}"
        )
    p, t = prediction.pixels, truth.pixels
    tp = int(np.count_nonzero(p & t))
    fp = int(np.count_nonzero(p & ~t))
    fn = int(np.count_nonzero(~p & t))
    tn = p.size - tp - fp - fn
    return ConfusionCounts(tp, fp, fn, tn)


def foreground_points(mask: Mask) -> np.ndarray:
    """Foreground pixel coordinates as an (n, 2) int64 array of (row, col).

    Rows come out in row-major scan order, so the result is deterministic.
    """
    return np.argwhere(mask.pixels).astype(np.int64, copy=False)
