"""Weighted fusion of model probability maps and exhaustive weight search.

Weights live on an exact integer grid: each vector is a tuple of
non-negative numerators over a common denominator (default 10, i.e. step
0.1), summing exactly to the denominator. Keeping the grid integral makes
the simplex constraint exact and fusion free of accumulation drift, and
one-hot vectors reproduce the selected map bit-for-bit.

The optimizer is a traversal: it enumerates every grid vector, scores each
by IoU of the thresholded fusion against the annotations, and returns the
complete (vector, objective) table with a deterministic argmax.
"""

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from . import _kernels, metrics
from .raster import Mask, ProbMap, ShapeError

__all__ = [
    "WeightVector",
    "GridSearchResult",
    "HeatmapMatrix",
    "REFERENCE_WEIGHTS",
    "REFERENCE_MODEL_ORDER",
    "format_weight",
    "parse_weights",
    "fuse",
    "enumerate_simplex",
    "grid_search",
    "heatmap",
]


@dataclass(frozen=True)
class WeightVector:
    """Fusion weights as exact numerators over a common denominator."""

    numerators: tuple
    denominator: int

    def __post_init__(self):
        nums = tuple(int(n) for n in self.numerators)
        if any(isinstance(n, bool) or n != v for n, v in zip(nums, self.numerators)):
            raise ValueError("numerators must be integers")
        if len(nums) == 0:
            raise ValueError("weight vector must not be empty")
        if any(n < 0 for n in nums):
            raise ValueError(f"numerators must be non-negative, got {nums}")
        if not isinstance(self.denominator, (int, np.integer)) or self.denominator < 1:
            raise ValueError(f"denominator must be a positive integer, got {self.denominator}")
        if sum(nums) != self.denominator:
            raise ValueError(
                f"numerators {nums} sum to {sum(nums)}, expected denominator {self.denominator}"
            )
        object.__setattr__(self, "numerators", nums)
        object.__setattr__(self, "denominator", int(self.denominator))

    def __len__(self) -> int:
        return len(self.numerators)

    @property
    def weights(self) -> tuple:
        """Weights as floats (for display; fusion uses the exact numerators)."""
        return tuple(n / self.denominator for n in self.numerators)

    @classmethod
    def one_hot(cls, index: int, n_models: int, denominator: int = 10) -> "WeightVector":
        nums = [0] * n_models
        nums[index] = denominator
        return cls(tuple(nums), denominator)

    def __str__(self) -> str:
        return ",".join(format_weight(n, self.denominator) for n in self.numerators)


# Reference four-model configuration: model order PAN, FPN, Unet, DeepLabv3+
# with weights 0.2, 0.1, 0.6, 0.1. Shipped as a documented preset; actual
# optima depend on the models being fused.
REFERENCE_MODEL_ORDER = ("PAN", "FPN", "Unet", "DeepLabv3+")
REFERENCE_WEIGHTS = WeightVector((2, 1, 6, 1), 10)


def format_weight(numerator: int, denominator: int) -> str:
    """Exact text form of numerator/denominator.

    Grids whose step has a terminating decimal (denominator 2^a * 5^b * 10^c)
    print as fixed-width decimals ("0.2", "0.25"); anything else falls back
    to the exact fraction ("1/3") so no precision is lost.
    """
    d = denominator
    twos = fives = 0
    while d % 2 == 0:
        d //= 2
        twos += 1
    while d % 5 == 0:
        d //= 5
        fives += 1
    if d != 1:
        return f"{numerator}/{denominator}"
    digits = max(twos, fives)
    if digits == 0:
        return str(numerator // denominator)
    scaled = numerator * 10**digits // denominator
    return f"{scaled // 10**digits}.{scaled % 10**digits:0{digits}d}"


def parse_weights(text, denominator: int = 10) -> WeightVector:
    """Parse comma-separated exact weights ("0.2,0.1,0.6,0.1" or "1/3,...").

    Values are validated as exact rationals: they must be non-negative, sum
    to exactly 1, and land on the 1/denominator grid. Accepts a string or a
    sequence of tokens.
    """
    tokens = [t.strip() for t in text.split(",")] if isinstance(text, str) else [str(t) for t in text]
    try:
        fracs = [Fraction(t) for t in tokens]
    except (ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"malformed weight list {text!r}: {exc}") from None
    if any(f < 0 for f in fracs):
        raise ValueError(f"weights must be non-negative, got {text!r}")
    total = sum(fracs)
    if total != 1:
        raise ValueError(f"weights must sum to exactly 1, got {text!r} (sum {total})")
    numerators = []
    for tok, f in zip(tokens, fracs):
        scaled = f * denominator
        if scaled.denominator != 1:
            raise ValueError(f"weight {tok} does not lie on the 1/{denominator} grid")
        numerators.append(int(scaled))
    return WeightVector(tuple(numerators), denominator)


def _compositions(total: int, parts: int):
    if parts == 1:
        yield (total,)
        return
    for head in range(total + 1):
        for rest in _compositions(total - head, parts - 1):
            yield (head,) + rest


def enumerate_simplex(n_models: int, denominator: int) -> list:
    """Every way to split the denominator into n_models non-negative numerators.

    Lexicographically ordered, each vector exactly once; the count is
    C(denominator + n_models - 1, n_models - 1).
    """
    if not isinstance(n_models, (int, np.integer)) or n_models < 2:
        raise ValueError(f"n_models must be an integer >= 2, got {n_models}")
    if not isinstance(denominator, (int, np.integer)) or denominator < 1:
        raise ValueError(f"denominator must be a positive integer, got {denominator}")
    return [WeightVector(c, denominator) for c in _compositions(int(denominator), int(n_models))]


def _check_slice(truth: Mask, maps: Sequence[ProbMap], n_models: int, index: int):
    if len(maps) != n_models:
        raise ShapeError(f"slice {index} has {len(maps)} maps, expected {n_models}")
    for k, m in enumerate(maps):
        if m.pixels.shape != truth.pixels.shape:
            raise ShapeError(
                f"slice {index} model {k}: map is {m.height}x{m.width} but "
                f"truth is {truth.height}x{truth.width}"
            )


def _stack(maps: Sequence[ProbMap]) -> np.ndarray:
    return np.ascontiguousarray(np.stack([m.pixels for m in maps]))


def fuse(maps: Sequence[ProbMap], weights: WeightVector) -> ProbMap:
    """Per-pixel convex combination of the maps under the given weights."""
    maps = list(maps)
    if len(maps) < 2:
        raise ValueError(f"fusion needs at least 2 maps, got {len(maps)}")
    if len(weights) != len(maps):
        raise ShapeError(f"{len(weights)} weights for {len(maps)} maps")
    shape = maps[0].pixels.shape
    for k, m in enumerate(maps):
        if m.pixels.shape != shape:
            raise ShapeError(
                f"map 0 is {maps[0].height}x{maps[0].width} but map {k} is {m.height}x{m.width}"
            )
    fused = _kernels.fuse_maps(
        _stack(maps), np.asarray(weights.numerators, dtype=np.int64), weights.denominator
    )
    return ProbMap(fused)


@dataclass(frozen=True)
class GridSearchResult:
    """Complete enumeration table plus its deterministic argmax.

    Ties on the objective resolve to the lexicographically smallest
    numerator tuple, so results are reproducible run to run.
    """

    best: WeightVector
    best_objective: float
    table: tuple

    def __post_init__(self):
        if not self.table:
            raise ValueError("grid search table must not be empty")
        top = max(obj for _, obj in self.table)
        if self.best_objective != top:
            raise ValueError(f"best_objective {self.best_objective} != table maximum {top}")
        winner = min(w.numerators for w, obj in self.table if obj == top)
        if self.best.numerators != winner:
            raise ValueError(f"best {self.best.numerators} is not the tie-broken argmax {winner}")
        object.__setattr__(self, "table", tuple(self.table))


def grid_search(
    slices: Sequence,
    denominator: int = 10,
    threshold: float = 0.5,
    objective: str = "micro",
) -> GridSearchResult:
    """Score every weight vector on the grid and return table plus argmax.

    slices is a sequence of (truth Mask, [ProbMap] * N) pairs. The objective
    is IoU of the thresholded fusion: "micro" pools TP/FP/FN over all slices
    before the ratio, "macro" averages per-slice IoU. Evaluation order never
    affects the result; the table comes back in enumeration order.
    """
    slices = list(slices)
    if not slices:
        raise ValueError("grid search needs at least one slice")
    if objective not in ("micro", "macro"):
        raise ValueError(f"objective must be 'micro' or 'macro', got {objective!r}")
    if not 0.0 <= threshold <= 1.0:
        raise ValueError(f"threshold must lie in [0, 1], got {threshold}")
    n_models = len(slices[0][1])
    if n_models < 2:
        raise ValueError(f"grid search needs at least 2 models, got {n_models}")
    prepared = []
    for i, (truth, maps) in enumerate(slices):
        _check_slice(truth, maps, n_models, i)
        prepared.append((_stack(maps), np.ascontiguousarray(truth.pixels).view(np.uint8)))

    table = []
    best = None
    best_obj = -math.inf
    for w in enumerate_simplex(n_models, denominator):
        nums = np.asarray(w.numerators, dtype=np.int64)
        if objective == "micro":
            tp = fp = fn = 0
            for stack, truth_u8 in prepared:
                dtp, dfp, dfn, _ = _kernels.fused_counts(
                    stack, nums, w.denominator, threshold, truth_u8
                )
                tp += dtp
                fp += dfp
                fn += dfn
            obj = 1.0 if tp + fp + fn == 0 else tp / (tp + fp + fn)
        else:
            total = 0.0
            for stack, truth_u8 in prepared:
                tp, fp, fn, _ = _kernels.fused_counts(
                    stack, nums, w.denominator, threshold, truth_u8
                )
                total += 1.0 if tp + fp + fn == 0 else tp / (tp + fp + fn)
            obj = total / len(prepared)
        table.append((w, obj))
        if obj > best_obj:
            best, best_obj = w, obj
    return GridSearchResult(best=best, best_objective=best_obj, table=tuple(table))


@dataclass(frozen=True, eq=False)
class HeatmapMatrix:
    """One visualization panel: Z values over two free numerators.

    With one weight held fixed, the first two non-fixed weights span the
    columns and rows and the last one is implied by the simplex constraint.
    Cells outside the simplex (fixed + col + row > denominator) are NaN.
    """

    fixed_index: int
    fixed_numerator: int
    denominator: int
    cells: np.ndarray
    argmax_cell: tuple
    argmax_z: float

    def __post_init__(self):
        cells = np.asarray(self.cells, dtype=np.float64)
        d = self.denominator
        if cells.shape != (d + 1, d + 1):
            raise ValueError(f"cells must be {(d + 1, d + 1)}, got {cells.shape}")
        rows, cols = np.indices(cells.shape)
        valid = self.fixed_numerator + rows + cols <= d
        if not (np.isnan(cells) == ~valid).all():
            raise ValueError("cell presence must match the simplex constraint")
        cells.flags.writeable = False
        object.__setattr__(self, "cells", cells)


def heatmap(result: GridSearchResult, fixed_index: int = 0, fixed_numerator: int = 0) -> HeatmapMatrix:
    """Z panel of a grid-search table with one weight numerator held fixed.

    Z rescales each objective's gap to the global table maximum (see
    metrics.z_transform), so near-ties become visually separable. Requires
    a four-model table: one fixed weight, two free axes, one implied.
    """
    n_models = len(result.best)
    denominator = result.best.denominator
    if n_models != 4:
        raise ValueError(f"heatmap panels need a 4-model table, got {n_models} models")
    if not 0 <= fixed_index < n_models:
        raise ValueError(f"fixed_index must lie in [0, {n_models - 1}], got {fixed_index}")
    if not 0 <= fixed_numerator <= denominator:
        raise ValueError(
            f"fixed_numerator must lie in [0, {denominator}], got {fixed_numerator}"
        )
    free = [i for i in range(n_models) if i != fixed_index]
    col_axis, row_axis = free[0], free[1]
    cells = np.full((denominator + 1, denominator + 1), np.nan)
    best_cell = None
    best_obj = -math.inf
    for w, obj in result.table:
        if w.numerators[fixed_index] != fixed_numerator:
            continue
        col = w.numerators[col_axis]
        row = w.numerators[row_axis]
        cells[row, col] = metrics.z_transform(obj, result.best_objective)
        if obj > best_obj:
            best_obj = obj
            best_cell = (col, row)
    return HeatmapMatrix(
        fixed_index=fixed_index,
        fixed_numerator=fixed_numerator,
        denominator=denominator,
        cells=cells,
        argmax_cell=best_cell,
        argmax_z=metrics.z_transform(best_obj, result.best_objective),
    )
