"""Pure-numpy kernel implementations.

Fallback used when the compiled extension is unavailable. Both backends
must agree bit-for-bit, so the arithmetic here mirrors the native code
exactly: squared distances minimized before the final sqrt, weighted sums
accumulated in float64 in model order, fused values clipped and rounded
to float32 before thresholding.
"""

import numpy as np

# Bounds the m*n pairwise-distance scratch block to ~32 MB.
_CHUNK = 4096


def min_distances(src: np.ndarray, dst: np.ndarray) -> np.ndarray:
    """Euclidean distance from each src point to its nearest dst point.

    src: (m, 2) float64, dst: (n, 2) float64 with n >= 1. Returns (m,) float64.
    """
    m = src.shape[0]
    out = np.empty(m, dtype=np.float64)
    dr = dst[:, 0]
    dc = dst[:, 1]
    for start in range(0, m, _CHUNK):
        block = src[start : start + _CHUNK]
        d2 = (block[:, 0, None] - dr) ** 2 + (block[:, 1, None] - dc) ** 2
        out[start : start + _CHUNK] = d2.min(axis=1)
    return np.sqrt(out, out=out)


def fuse_maps(stack: np.ndarray, numerators: np.ndarray, denominator: int) -> np.ndarray:
    """Per-pixel convex combination of N float32 maps with exact grid weights.

    stack: (N, H, W) float32; numerators: (N,) int64 summing to denominator.
    Returns (H, W) float32 clipped to [0, 1].
    """
    acc = np.zeros(stack.shape[1:], dtype=np.float64)
    for k in range(stack.shape[0]):
        acc += float(numerators[k]) * stack[k].astype(np.float64)
    acc /= float(denominator)
    np.clip(acc, 0.0, 1.0, out=acc)
    return acc.astype(np.float32)


def fused_counts(
    stack: np.ndarray,
    numerators: np.ndarray,
    denominator: int,
    threshold: float,
    truth: np.ndarray,
) -> tuple[int, int, int, int]:
    """Confusion counts of the thresholded fusion against a truth mask.

    truth is a (H, W) uint8 array with 0/1 values. Equivalent to fuse_maps
    + (>= threshold) + pixel tallies, without the caller having to keep the
    fused raster.
    """
    fused = fuse_maps(stack, numerators, denominator)
    pred = fused >= np.float64(threshold)
    tr = truth != 0
    tp = int(np.count_nonzero(pred & tr))
    fp = int(np.count_nonzero(pred & ~tr))
    fn = int(np.count_nonzero(~pred & tr))
    tn = tr.size - tp - fp - fn
    return tp, fp, fn, tn
