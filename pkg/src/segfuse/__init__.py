"""segfuse: fusion and evaluation toolkit for binary segmentation ensembles.

Overlap and boundary metrics for lesion masks, weighted convex fusion of
model probability maps on an exact weight grid, exhaustive grid search
over the weight simplex, and byte-stable raster/CSV formats.
"""

from ._kernels import BACKEND as KERNEL_BACKEND
from .ensemble import (
    GridSearchResult,
    HeatmapMatrix,
    REFERENCE_MODEL_ORDER,
    REFERENCE_WEIGHTS,
    WeightVector,
    enumerate_simplex,
    fuse,
    grid_search,
    heatmap,
    parse_weights,
)
from .metrics import (
    AggregateMetrics,
    MetricsRecord,
    aggregate_h,
    aggregate_metrics,
    directed_hausdorff,
    f1,
    hausdorff,
    hd95,
    hd_percentile,
    iou,
    precision,
    recall,
    slice_metrics,
    z_transform,
)
from .raster import (
    ConfusionCounts,
    Mask,
    ProbMap,
    ShapeError,
    binarize,
    confusion,
    foreground_points,
)
from .synth import ModelProfile, SplitMix64, SynthConfig, generate

__version__ = "0.1.0"

__all__ = [
    "KERNEL_BACKEND",
    "__version__",
    "ProbMap",
    "Mask",
    "ConfusionCounts",
    "ShapeError",
    "binarize",
    "confusion",
    "foreground_points",
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
    "WeightVector",
    "GridSearchResult",
    "HeatmapMatrix",
    "REFERENCE_WEIGHTS",
    "REFERENCE_MODEL_ORDER",
    "parse_weights",
    "enumerate_simplex",
    "fuse",
    "grid_search",
    "heatmap",
    "ModelProfile",
    "SynthConfig",
    "SplitMix64",
    "generate",
]
