"""Acceptance suite: one test per criterion, each printing a pass/fail line.

Run with ``pytest -s tests/test_acceptance.py`` to see the per-criterion
lines. Every tolerance is pinned here; nothing is deferred to calibration.
"""

import functools
import itertools
import math
import time

import mpmath
import numpy as np

import oracles
from segfuse import (
    Mask,
    ModelProfile,
    ProbMap,
    SynthConfig,
    WeightVector,
    aggregate_h,
    binarize,
    confusion,
    enumerate_simplex,
    f1,
    fuse,
    generate,
    grid_search,
    hausdorff,
    hd95,
    iou,
    precision,
    recall,
    slice_metrics,
    z_transform,
)
from segfuse.cli import main as cli_main
from segfuse.io import (
    read_grid_table,
    read_manifest,
    read_mask,
    read_probmap,
    write_grid_table,
    write_manifest,
    write_mask,
    write_probmap,
    write_report,
)
from segfuse.metrics import AggregateMetrics

_MODULE_T0 = time.perf_counter()


def criterion(name):
    def decorate(fn):
        @functools.wraps(fn)
        def wrapper(*args, **kwargs):
            try:
                fn(*args, **kwargs)
            except BaseException:
                print(f"[FAIL] {name}")
                raise
            print(f"[PASS] {name}")

        return wrapper

    return decorate


def _random_mask_pair(rng):
    h = int(rng.integers(1, 9))
    w = int(rng.integers(1, 9))
    densities = (0.0, 0.05, 0.1, 0.3, 0.5, 0.9, 1.0)
    a = rng.random((h, w)) < rng.choice(densities)
    b = rng.random((h, w)) < rng.choice(densities)
    return Mask(a), Mask(b)


@criterion("metric oracle suite (10k random pairs, exact counts, 1e-9 distances, <10s)")
def test_metric_oracle_suite():
    rng = np.random.default_rng(1)
    t0 = time.perf_counter()
    for _ in range(10_000):
        pred, truth = _random_mask_pair(rng)
        c = confusion(pred, truth)
        tp, fp, fn, tn = oracles.naive_confusion(pred.pixels.tolist(), truth.pixels.tolist())
        assert (c.tp, c.fp, c.fn, c.tn) == (tp, fp, fn, tn)
        assert iou(c) == oracles.naive_iou(tp, fp, fn)
        assert precision(c) == oracles.naive_precision(tp, fp, fn)
        assert recall(c) == oracles.naive_recall(tp, fp, fn)
        p, r = oracles.naive_precision(tp, fp, fn), oracles.naive_recall(tp, fp, fn)
        assert f1(precision(c), recall(c)) == oracles.naive_f1(p, r)
        a = [tuple(pt) for pt in np.argwhere(pred.pixels)]
        b = [tuple(pt) for pt in np.argwhere(truth.pixels)]
        diag = math.hypot(pred.height - 1, pred.width - 1)
        assert abs(hausdorff(a, b, diag) - oracles.brute_hausdorff(a, b, diag)) < 1e-9
        assert abs(hd95(a, b, diag) - oracles.brute_hd_percentile(a, b, 0.95, diag)) < 1e-9
    elapsed = time.perf_counter() - t0
    assert elapsed < 10.0, f"oracle suite took {elapsed:.1f}s"


@criterion("equation identities (f1 count form, symmetry, percentile bound, log sum)")
def test_equation_identities():
    rng = np.random.default_rng(2)
    for _ in range(2_000):
        pred, truth = _random_mask_pair(rng)
        c = confusion(pred, truth)
        if 2 * c.tp + c.fp + c.fn > 0:
            assert abs(f1(precision(c), recall(c)) - 2 * c.tp / (2 * c.tp + c.fp + c.fn)) < 1e-12
        a = [tuple(pt) for pt in np.argwhere(pred.pixels)]
        b = [tuple(pt) for pt in np.argwhere(truth.pixels)]
        assert hausdorff(a, b, 5.0) == hausdorff(b, a, 5.0)
        assert hd95(a, b, 5.0) <= hausdorff(a, b, 5.0)
    assert abs(aggregate_h([9.0, 99.0, 0.0]) - 3.0) < 1e-12
    with mpmath.workdps(50):
        exact = mpmath.log10(mpmath.mpf(10)) + mpmath.log10(mpmath.mpf(100)) + mpmath.log10(1)
        assert exact == 3


@criterion("gap rescale closed form (log_{0.9} 1e-4 = 87.4176 within 1e-3)")
def test_z_closed_form():
    z = z_transform(0.5, 0.5)
    with mpmath.workdps(50):
        reference = mpmath.log(mpmath.mpf("1e-4")) / mpmath.log(mpmath.mpf(9) / mpmath.mpf(10))
    assert abs(z - float(reference)) < 1e-9
    assert abs(z - 87.4176) < 1e-3


@criterion("simplex enumeration (286 vectors, lex order, no duplicates, <1s)")
def test_simplex_enumeration():
    t0 = time.perf_counter()
    vectors = enumerate_simplex(4, 10)
    elapsed = time.perf_counter() - t0
    tuples = [w.numerators for w in vectors]
    assert len(tuples) == oracles.composition_count(4, 10) == 286
    assert tuples == oracles.all_weight_tuples(4, 10)
    assert tuples == sorted(tuples)
    assert len(set(tuples)) == len(tuples)
    assert all(sum(t) == 10 for t in tuples)
    assert elapsed < 1.0, f"enumeration took {elapsed:.3f}s"


def _acceptance_fixture(seed, n_slices=5, side=16):
    config = SynthConfig(
        seed=seed,
        width=side,
        height=side,
        n_slices=n_slices,
        n_models=4,
        blob_count_range=(1, 3),
        blob_radius_range=(2.0, 5.0),
        profiles=(
            ModelProfile(0.5, 0.0, 0.9),
            ModelProfile(0.0, 0.6, 0.7),
            ModelProfile(0.15, 0.15, 1.2),
            ModelProfile(0.25, 0.25, 1.4),
        ),
    )
    return generate(config)


def _straight_line_micro(slices, denominator, threshold):
    """Independent reimplementation of the whole grid search, no shared code."""
    rows = []
    for nums in sorted(
        t
        for t in itertools.product(range(denominator + 1), repeat=4)
        if sum(t) == denominator
    ):
        tp = fp = fn = 0
        for truth, maps in slices:
            acc = np.zeros(truth.pixels.shape, dtype=np.float64)
            for k in range(4):
                acc = acc + nums[k] * maps[k].pixels.astype(np.float64)
            fused = np.clip(acc / denominator, 0.0, 1.0).astype(np.float32)
            pred = fused >= threshold
            t_ = truth.pixels
            tp += int(np.sum(pred & t_))
            fp += int(np.sum(pred & ~t_))
            fn += int(np.sum(~pred & t_))
        rows.append((nums, 1.0 if tp + fp + fn == 0 else tp / (tp + fp + fn)))
    return rows


@criterion("grid-search oracle (286 objectives within 1e-12, same argmax, <5s)")
def test_grid_search_matches_straight_line_oracle():
    slices = _acceptance_fixture(seed=31)
    t0 = time.perf_counter()
    result = grid_search(slices, denominator=10, threshold=0.5, objective="micro")
    expected = _straight_line_micro(slices, 10, 0.5)
    elapsed = time.perf_counter() - t0
    assert len(result.table) == len(expected) == 286
    for (w, obj), (nums, ref) in zip(result.table, expected):
        assert w.numerators == nums
        assert abs(obj - ref) < 1e-12
    best_obj = max(obj for _, obj in expected)
    assert result.best.numerators == min(nums for nums, obj in expected if obj == best_obj)
    assert elapsed < 5.0, f"grid-search oracle took {elapsed:.1f}s"


@criterion("argmax dominance (ensemble never loses to a single model)")
def test_argmax_dominance():
    for seed in (7, 8, 9):
        slices = _acceptance_fixture(seed=seed, n_slices=3)
        result = grid_search(slices, denominator=10)
        lookup = {w.numerators: obj for w, obj in result.table}
        for k in range(4):
            one_hot = WeightVector.one_hot(k, 4, 10).numerators
            assert result.best_objective >= lookup[one_hot]


@criterion("fusion identities (one-hot bit-exact, fixed point, permutation)")
def test_fusion_identities():
    rng = np.random.default_rng(3)
    for _ in range(25):
        maps = [
            ProbMap(rng.random((6, 7)).astype(np.float32)) for _ in range(4)
        ]
        for k in range(4):
            fused = fuse(maps, WeightVector.one_hot(k, 4, 10))
            assert fused.pixels.tobytes() == maps[k].pixels.tobytes()
        same = [maps[0]] * 4
        for w in enumerate_simplex(4, 10)[::29]:
            assert fuse(same, w).pixels.tobytes() == maps[0].pixels.tobytes()
        perm = list(rng.permutation(4))
        nums = tuple(int(n) for n in rng.multinomial(10, [0.25] * 4))
        w = WeightVector(nums, 10)
        wp = WeightVector(tuple(nums[i] for i in perm), 10)
        assert (
            fuse([maps[i] for i in perm], wp).pixels.tobytes()
            == fuse(maps, w).pixels.tobytes()
        )


@criterion("io round trips (pgm/pfm/manifest/grid bit-exact, report formatting)")
def test_io_round_trips(tmp_path):
    rng = np.random.default_rng(4)
    for i in range(200):
        mask = Mask(rng.random((int(rng.integers(1, 12)), int(rng.integers(1, 12)))) < 0.5)
        write_mask(mask, tmp_path / "m.pgm")
        assert read_mask(tmp_path / "m.pgm") == mask
        probmap = ProbMap(
            rng.random((int(rng.integers(1, 12)), int(rng.integers(1, 12)))).astype(np.float32)
        )
        write_probmap(probmap, tmp_path / "p.pfm")
        assert read_probmap(tmp_path / "p.pfm").pixels.tobytes() == probmap.pixels.tobytes()
    # manifest round trip over a real fixture tree
    slices = _acceptance_fixture(seed=5, n_slices=2, side=8)
    import segfuse.io as sio

    entries = []
    for i, (truth, maps) in enumerate(slices):
        write_mask(truth, tmp_path / f"s{i}_t.pgm")
        for k, m in enumerate(maps):
            write_probmap(m, tmp_path / f"s{i}_m{k}.pfm")
        entries.append(
            sio.ManifestEntry(f"s{i}", f"s{i}_t.pgm", tuple(f"s{i}_m{k}.pfm" for k in range(4)))
        )
    manifest = sio.Manifest(("a", "b", "c", "d"), tuple(entries))
    write_manifest(manifest, tmp_path / "manifest.csv")
    assert read_manifest(tmp_path / "manifest.csv") == manifest
    # grid table round trip
    result = grid_search(slices, denominator=4)
    write_grid_table(result, tmp_path / "grid.csv")
    assert read_grid_table(tmp_path / "grid.csv") == result
    # documented aggregate formatting example, byte-exact
    aggregate = AggregateMetrics(iou=0.7279, precision=0.8, recall=0.8, f1=0.8065, h=92.4604)
    write_report([], aggregate, tmp_path / "report.csv")
    last = (tmp_path / "report.csv").read_text().splitlines()[-1]
    assert last == "AGGREGATE,0.7279,0.8000,0.8000,0.8065,92.4604"
    write_report([], aggregate, tmp_path / "report2.csv")
    assert (tmp_path / "report.csv").read_bytes() == (tmp_path / "report2.csv").read_bytes()


def _run_pipeline(base):
    fix = base / "fix"
    argv = [
        "synth", "--seed", "2024", "--width", "20", "--height", "16", "--slices", "3",
        "--models", "4",
        "--profile", "0.4,0.0,0.8", "--profile", "0.0,0.5,0.6",
        "--profile", "0.2,0.2,1.0", "--profile", "0.3,0.3,1.3",
        "--outdir", str(fix),
    ]
    assert cli_main(argv) == 0
    assert cli_main(["optimize", "--manifest", str(fix / "manifest.csv"), "--outdir", str(base / "opt")]) == 0
    best = dict(
        line.split("=", 1)
        for line in (base / "opt" / "best_weights.txt").read_text().splitlines()
    )
    weights = ",".join(best[f"w_{i}"] for i in range(1, 5))
    assert cli_main([
        "evaluate", "--manifest", str(fix / "manifest.csv"),
        "--weights", weights, "--outdir", str(base / "eval"),
    ]) == 0
    assert cli_main([
        "heatmap", "--table", str(base / "opt" / "grid.csv"), "--outdir", str(base / "heat"),
    ]) == 0


@criterion("end-to-end determinism (synth->optimize->evaluate byte-identical)")
def test_end_to_end_determinism(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    _run_pipeline(a)
    _run_pipeline(b)
    files_a = sorted(p.relative_to(a) for p in a.rglob("*") if p.is_file())
    files_b = sorted(p.relative_to(b) for p in b.rglob("*") if p.is_file())
    assert files_a == files_b and files_a
    for rel in files_a:
        assert (a / rel).read_bytes() == (b / rel).read_bytes(), rel


@criterion("acceptance module wall clock (<60s)")
def test_module_runtime_budget():
    elapsed = time.perf_counter() - _MODULE_T0
    assert elapsed < 60.0, f"acceptance module took {elapsed:.1f}s"
