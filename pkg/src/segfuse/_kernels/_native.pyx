# Compiled kernels for the hot inner loops: nearest-point distances and
# fused-threshold confusion counting. Must stay bit-identical to the
# pure-numpy fallback in _pure.py: float64 accumulation in model order,
# clip to [0, 1], round to float32, then threshold.

import numpy as np

cimport numpy as cnp
from libc.math cimport sqrt

cnp.import_array()


def min_distances(const double[:, ::1] src, const double[:, ::1] dst):
    """Euclidean distance from each src point to its nearest dst point."""
    cdef Py_ssize_t m = src.shape[0]
    cdef Py_ssize_t n = dst.shape[0]
    out_arr = np.empty(m, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef Py_ssize_t i, j
    cdef double r, c, dr, dc, d2, best
    for i in range(m):
        r = src[i, 0]
        c = src[i, 1]
        best = (r - dst[0, 0]) ** 2 + (c - dst[0, 1]) ** 2
        for j in range(1, n):
            dr = r - dst[j, 0]
            dc = c - dst[j, 1]
            d2 = dr * dr + dc * dc
            if d2 < best:
                best = d2
        out[i] = sqrt(best)
    return out_arr


def fuse_maps(const float[:, :, ::1] stack, const long long[::1] numerators, long long denominator):
    """Per-pixel convex combination of N float32 maps with exact grid weights."""
    cdef Py_ssize_t n_models = stack.shape[0]
    cdef Py_ssize_t h = stack.shape[1]
    cdef Py_ssize_t w = stack.shape[2]
    out_arr = np.empty((h, w), dtype=np.float32)
    cdef float[:, ::1] out = out_arr
    cdef double[::1] acc = np.empty(w, dtype=np.float64)
    cdef double d = <double> denominator
    cdef double nk, a
    cdef Py_ssize_t k, r, c
    # row-buffered accumulation: contiguous inner loops, and per pixel the
    # model terms still add in index order so results match _pure bit-for-bit
    for r in range(h):
        for c in range(w):
            acc[c] = 0.0
        for k in range(n_models):
            nk = <double> numerators[k]
            for c in range(w):
                acc[c] += nk * (<double> stack[k, r, c])
        for c in range(w):
            a = acc[c] / d
            if a < 0.0:
                a = 0.0
            elif a > 1.0:
                a = 1.0
            out[r, c] = <float> a
    return out_arr


def fused_counts(
    const float[:, :, ::1] stack,
    const long long[::1] numerators,
    long long denominator,
    double threshold,
    const cnp.uint8_t[:, ::1] truth,
):
    """Confusion counts of the thresholded fusion against a truth mask."""
    cdef Py_ssize_t n_models = stack.shape[0]
    cdef Py_ssize_t h = stack.shape[1]
    cdef Py_ssize_t w = stack.shape[2]
    cdef double[::1] acc = np.empty(w, dtype=np.float64)
    cdef double d = <double> denominator
    cdef double nk, a
    cdef Py_ssize_t k, r, c
    cdef float val
    cdef long long fg, tr
    cdef long long tp = 0, fp = 0, fn = 0
    for r in range(h):
        for c in range(w):
            acc[c] = 0.0
        for k in range(n_models):
            nk = <double> numerators[k]
            for c in range(w):
                acc[c] += nk * (<double> stack[k, r, c])
        for c in range(w):
            a = acc[c] / d
            if a < 0.0:
                a = 0.0
            elif a > 1.0:
                a = 1.0
            val = <float> a
            fg = (<double> val) >= threshold
            tr = truth[r, c] != 0
            tp += fg & tr
            fp += fg & (tr ^ 1)
            fn += (fg ^ 1) & tr
    return int(tp), int(fp), int(fn), int(h * w - tp - fp - fn)
