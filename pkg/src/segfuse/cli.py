"""Command-line pipeline: fixture generation, fusion, weight search, evaluation.

Exit codes: 0 success, 1 computation-domain error (bad weights, thresholds,
shape mismatches), 2 I/O or parse error (missing or malformed files).
"""

import argparse
import os
import sys
from pathlib import Path

from . import __version__, ensemble, io, metrics, synth
from .raster import binarize, confusion

_OUTDIR_ENV = "SEGFUSE_OUTDIR"


def _outdir(args) -> Path:
    out = Path(args.outdir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _parse_weight_flag(args):
    # validated before any file is touched, so bad weights never do I/O
    if args.weights is None:
        return None
    return ensemble.parse_weights(args.weights, args.denominator)


def _resolve_weights(weights, args, n_models: int) -> ensemble.WeightVector:
    if weights is not None:
        if len(weights) != n_models:
            raise ValueError(
                f"{len(weights)} weights given but the manifest has {n_models} models"
            )
        return weights
    if n_models == 4:
        return ensemble.parse_weights(
            ",".join(ensemble.format_weight(n, 10) for n in ensemble.REFERENCE_WEIGHTS.numerators),
            args.denominator,
        )
    raise ValueError("--weights is required unless the manifest has exactly 4 models")


def cmd_synth(args) -> int:
    out = _outdir(args)
    if args.model_names:
        names = [n.strip() for n in args.model_names.split(",")]
    elif args.models == 4:
        names = list(ensemble.REFERENCE_MODEL_ORDER)
    else:
        names = [f"model_{k + 1}" for k in range(args.models)]
    if len(names) != args.models:
        raise ValueError(f"{len(names)} model names for {args.models} models")
    if args.profile:
        if len(args.profile) != args.models:
            raise ValueError(f"{len(args.profile)} --profile flags for {args.models} models")
        profiles = []
        for text in args.profile:
            parts = [p.strip() for p in text.split(",")]
            if len(parts) != 3:
                raise ValueError(f"--profile must be MISS,CLUTTER,SIGMA, got {text!r}")
            profiles.append(
                synth.ModelProfile(float(parts[0]), float(parts[1]), float(parts[2]))
            )
        profiles = tuple(profiles)
    else:
        profiles = ()
    config = synth.SynthConfig(
        seed=args.seed,
        width=args.width,
        height=args.height,
        n_slices=args.slices,
        n_models=args.models,
        blob_count_range=tuple(args.blob_count),
        blob_radius_range=tuple(args.blob_radius),
        profiles=profiles,
    )
    slices = synth.generate(config)
    digits = max(3, len(str(len(slices) - 1)))
    entries = []
    for i, (truth, maps) in enumerate(slices):
        slice_id = f"slice_{i:0{digits}d}"
        truth_name = f"{slice_id}_truth.pgm"
        io.write_mask(truth, out / truth_name)
        model_files = []
        for name, probmap in zip(names, maps):
            map_name = f"{slice_id}_{name}.pfm"
            io.write_probmap(probmap, out / map_name)
            model_files.append(map_name)
        entries.append(io.ManifestEntry(slice_id, truth_name, tuple(model_files)))
    manifest = io.Manifest(model_names=tuple(names), entries=tuple(entries), base_dir=out)
    io.write_manifest(manifest, out / "manifest.csv")
    print(f"wrote {len(slices)} slices x {args.models} models -> {out / 'manifest.csv'}")
    return 0


def cmd_fuse(args) -> int:
    given = _parse_weight_flag(args)
    out = _outdir(args)
    manifest = io.read_manifest(args.manifest)
    weights = _resolve_weights(given, args, manifest.n_models)
    for slice_id, _, maps in io.load_slices(manifest):
        fused = ensemble.fuse(maps, weights)
        io.write_probmap(fused, out / f"{slice_id}_fused.pfm")
        io.write_mask(binarize(fused, args.threshold), out / f"{slice_id}_mask.pgm")
    print(f"fused {len(manifest.entries)} slices with weights {weights} -> {out}")
    return 0


def cmd_optimize(args) -> int:
    out = _outdir(args)
    manifest = io.read_manifest(args.manifest)
    slices = [(truth, maps) for _, truth, maps in io.load_slices(manifest)]
    result = ensemble.grid_search(
        slices, denominator=args.denominator, threshold=args.threshold, objective=args.objective
    )
    io.write_grid_table(result, out / "grid.csv")
    with open(out / "best_weights.txt", "w", encoding="utf-8") as f:
        for i, n in enumerate(result.best.numerators):
            f.write(f"w_{i + 1}={ensemble.format_weight(n, result.best.denominator)}\n")
        f.write(f"denominator={result.best.denominator}\n")
        f.write(f"objective={result.best_objective!r}\n")
        f.write(f"objective_mode={args.objective}\n")
    print(
        f"searched {len(result.table)} weight vectors: best {result.best} "
        f"({args.objective} iou {result.best_objective:.4f}) -> {out / 'grid.csv'}"
    )
    return 0


def cmd_evaluate(args) -> int:
    given = _parse_weight_flag(args)
    out = _outdir(args)
    manifest = io.read_manifest(args.manifest)
    weights = _resolve_weights(given, args, manifest.n_models)
    rows = []
    counts = []
    for slice_id, truth, maps in io.load_slices(manifest):
        prediction = binarize(ensemble.fuse(maps, weights), args.threshold)
        rows.append((slice_id, metrics.slice_metrics(prediction, truth, args.percentile)))
        counts.append(confusion(prediction, truth))
    aggregate = metrics.aggregate_metrics(counts, [rec.hd95 for _, rec in rows])
    io.write_report(rows, aggregate, out / "report.csv")
    print(
        f"evaluated {len(rows)} slices with weights {weights}: "
        f"iou={aggregate.iou:.4f} f1={aggregate.f1:.4f} h={aggregate.h:.4f} "
        f"-> {out / 'report.csv'}"
    )
    return 0


def cmd_heatmap(args) -> int:
    out = _outdir(args)
    result = io.read_grid_table(args.table)
    denominator = result.best.denominator
    if args.fixed_numerator is not None:
        numerators = [args.fixed_numerator]
    else:
        numerators = list(range(denominator + 1))
    digits = len(str(denominator))
    summary = []
    for numerator in numerators:
        matrix = ensemble.heatmap(result, args.fixed_index, numerator)
        name = f"heatmap_w{args.fixed_index + 1}_{numerator:0{digits}d}.csv"
        io.write_heatmap(matrix, out / name)
        summary.append(matrix)
    if args.fixed_numerator is None:
        free = [i for i in range(4) if i != args.fixed_index]
        with open(out / "heatmap_summary.csv", "w", encoding="utf-8", newline="") as f:
            f.write(",".join(f"w_{i + 1}" for i in range(4)) + ",z\n")
            for matrix in summary:
                col, row = matrix.argmax_cell
                nums = [0] * 4
                nums[args.fixed_index] = matrix.fixed_numerator
                nums[free[0]] = col
                nums[free[1]] = row
                nums[free[2]] = denominator - matrix.fixed_numerator - col - row
                cells = [ensemble.format_weight(n, denominator) for n in nums]
                f.write(",".join(cells) + f",{matrix.argmax_z!r}\n")
    print(f"wrote {len(summary)} heatmap panel(s) -> {out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="segfuse",
        description="Fuse segmentation probability maps, search fusion weights, evaluate masks.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_outdir(p):
        p.add_argument(
            "--outdir",
            default=os.environ.get(_OUTDIR_ENV, "."),
            help=f"output directory (default: ${_OUTDIR_ENV} or '.')",
        )

    p = sub.add_parser("synth", help="generate a seeded synthetic fixture set + manifest")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--width", type=int, default=64)
    p.add_argument("--height", type=int, default=64)
    p.add_argument("--slices", type=int, default=5)
    p.add_argument("--models", type=int, default=4)
    p.add_argument("--blob-count", type=int, nargs=2, default=[1, 3], metavar=("LO", "HI"))
    p.add_argument("--blob-radius", type=float, nargs=2, default=[3.0, 8.0], metavar=("LO", "HI"))
    p.add_argument(
        "--profile",
        action="append",
        metavar="MISS,CLUTTER,SIGMA",
        help="per-model error profile, repeat once per model (default: no noise)",
    )
    p.add_argument("--model-names", help="comma-separated column names for the manifest")
    add_outdir(p)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("fuse", help="write fused probability map + thresholded mask per slice")
    p.add_argument("--manifest", required=True)
    p.add_argument("--weights", help="comma-separated exact weights, e.g. 0.2,0.1,0.6,0.1")
    p.add_argument("--threshold", type=float, default=0.5)
    p.add_argument("--denominator", type=int, default=10)
    add_outdir(p)
    p.set_defaults(func=cmd_fuse)

    p = sub.add_parser("optimize", help="exhaustive weight-grid search maximizing fused IoU")
    p.add_argument("--manifest", required=True)
    p.add_argument("--denominator", type=int, default=10)
    p.add_argument("--threshold", type=float, default=0.5)
    p.add_argument("--objective", choices=("micro", "macro"), default="micro")
    add_outdir(p)
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("evaluate", help="per-slice + aggregate metric report for given weights")
    p.add_argument("--manifest", required=True)
    p.add_argument("--weights", help="comma-separated exact weights (default: 0.2,0.1,0.6,0.1 for 4 models)")
    p.add_argument("--threshold", type=float, default=0.5)
    p.add_argument("--denominator", type=int, default=10)
    p.add_argument("--percentile", type=float, default=0.95, help="boundary-distance percentile")
    add_outdir(p)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("heatmap", help="Z panels and summary from a grid table")
    p.add_argument("--table", required=True, help="grid.csv written by optimize")
    p.add_argument("--fixed-index", type=int, default=0, help="0-based weight to hold fixed (0 = w_1)")
    p.add_argument("--fixed-numerator", type=int, default=None, help="emit a single panel instead of the sweep")
    add_outdir(p)
    p.set_defaults(func=cmd_heatmap)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (io.FormatError, io.ManifestError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
