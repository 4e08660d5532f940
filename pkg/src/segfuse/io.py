"""Bit-exact file formats: PGM masks, PFM probability maps, CSV manifests and reports.

Masks are binary PGM (magic ``P5``, maxval 255): pixel 0 is background,
255 is foreground, anything else is rejected. Probability maps are
grayscale PFM (magic ``Pf``) with a negative scale line denoting
little-endian 32-bit floats. PFM stores rows bottom-to-top on disk; the
reader flips into the in-memory top-to-bottom convention and the writer
flips back, so a vertical flip can never slip in silently.

Readers reject malformed input with errors naming the byte offset; they
never truncate silently. Writers are deterministic byte-for-byte.
"""

import csv
import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Iterable

import numpy as np

from .ensemble import GridSearchResult, HeatmapMatrix, WeightVector, format_weight
from .metrics import AggregateMetrics
from .raster import Mask, ProbMap

__all__ = [
    "FormatError",
    "ManifestError",
    "Manifest",
    "ManifestEntry",
    "read_mask",
    "write_mask",
    "read_probmap",
    "write_probmap",
    "read_manifest",
    "write_manifest",
    "load_slices",
    "write_report",
    "write_grid_table",
    "read_grid_table",
    "write_heatmap",
]

_WS = b" \t\r\n"


class FormatError(ValueError):
    """Malformed raster or table file; carries the file path and byte offset."""

    def __init__(self, message: str, path=None, offset: int | None = None):
        self.path = str(path) if path is not None else None
        self.offset = offset
        prefix = f"{self.path}: " if self.path is not None else ""
        if offset is not None:
            prefix += f"byte {offset}: "
        super().__init__(prefix + message)


class ManifestError(ValueError):
    """Structurally invalid manifest or a manifest referencing missing files."""


class _Scanner:
    """Cursor over header bytes tracking offsets for error reporting."""

    def __init__(self, data: bytes, path):
        self.data = data
        self.pos = 0
        self.path = path

    def fail(self, message: str, offset: int | None = None):
        raise FormatError(message, self.path, self.pos if offset is None else offset)

    def skip_space(self):
        d = self.data
        while self.pos < len(d):
            b = d[self.pos]
            if b in _WS:
                self.pos += 1
            elif b == ord("#"):
                while self.pos < len(d) and d[self.pos] != ord("\n"):
                    self.pos += 1
            else:
                break

    def token(self, what: str) -> tuple[bytes, int]:
        self.skip_space()
        d = self.data
        start = self.pos
        while self.pos < len(d) and d[self.pos] not in _WS and d[self.pos] != ord("#"):
            self.pos += 1
        if self.pos == start:
            self.fail(f"missing {what} in header", start)
        return d[start : self.pos], start

    def int_token(self, what: str) -> tuple[int, int]:
        raw, start = self.token(what)
        try:
            return int(raw.decode("ascii")), start
        except (UnicodeDecodeError, ValueError):
            raise FormatError(f"malformed {what} {raw!r}", self.path, start) from None

    def payload_start(self) -> int:
        # exactly one whitespace byte separates the header from the raster
        if self.pos >= len(self.data) or self.data[self.pos] not in _WS:
            self.fail("expected a single whitespace byte before the pixel payload")
        self.pos += 1
        return self.pos


def _check_dims(sc: _Scanner, width: int, woff: int, height: int, hoff: int):
    if width < 1:
        sc.fail(f"width must be positive, got {width}", woff)
    if height < 1:
        sc.fail(f"height must be positive, got {height}", hoff)


def read_mask(path) -> Mask:
    """Parse a binary P5 PGM with maxval 255 and only 0/255 pixels."""
    data = Path(path).read_bytes()
    sc = _Scanner(data, path)
    if data[:2] != b"P5":
        sc.fail(f"bad magic {data[:2]!r}, expected b'P5'", 0)
    sc.pos = 2
    width, woff = sc.int_token("width")
    height, hoff = sc.int_token("height")
    _check_dims(sc, width, woff, height, hoff)
    maxval, moff = sc.int_token("maxval")
    if maxval != 255:
        sc.fail(f"unsupported maxval {maxval}, expected 255", moff)
    start = sc.payload_start()
    expected = width * height
    if len(data) - start < expected:
        sc.fail(
            f"truncated pixel payload: expected {expected} bytes, found {len(data) - start}",
            len(data),
        )
    if len(data) - start > expected:
        sc.fail("unexpected trailing bytes after pixel payload", start + expected)
    arr = np.frombuffer(data, dtype=np.uint8, count=expected, offset=start).reshape(height, width)
    bad = np.flatnonzero((arr != 0) & (arr != 255))
    if bad.size:
        i = int(bad[0])
        sc.fail(f"invalid pixel value {int(arr.flat[i])}, expected 0 or 255", start + i)
    return Mask(arr == 255)


def write_mask(mask: Mask, path):
    header = f"P5\n{mask.width} {mask.height}\n255\n".encode("ascii")
    payload = np.where(mask.pixels, np.uint8(255), np.uint8(0)).tobytes()
    Path(path).write_bytes(header + payload)


def read_probmap(path) -> ProbMap:
    """Parse a grayscale little-endian Pf PFM with samples in [0, 1]."""
    data = Path(path).read_bytes()
    sc = _Scanner(data, path)
    if data[:2] == b"PF":
        sc.fail("color PFM (magic 'PF') is unsupported, expected grayscale 'Pf'", 0)
    if data[:2] != b"Pf":
        sc.fail(f"bad magic {data[:2]!r}, expected b'Pf'", 0)
    sc.pos = 2
    width, woff = sc.int_token("width")
    height, hoff = sc.int_token("height")
    _check_dims(sc, width, woff, height, hoff)
    raw, soff = sc.token("scale")
    try:
        scale = float(raw)
    except ValueError:
        raise FormatError(f"malformed scale {raw!r}", path, soff) from None
    if scale > 0:
        sc.fail("big-endian PFM (positive scale) is unsupported", soff)
    if not scale < 0:
        sc.fail(f"scale must be a negative real, got {raw.decode('ascii', 'replace')}", soff)
    start = sc.payload_start()
    expected = width * height * 4
    if len(data) - start < expected:
        sc.fail(
            f"truncated sample payload: expected {expected} bytes, found {len(data) - start}",
            len(data),
        )
    if len(data) - start > expected:
        sc.fail("unexpected trailing bytes after sample payload", start + expected)
    samples = np.frombuffer(data, dtype="<f4", count=width * height, offset=start)
    arr = np.ascontiguousarray(samples.reshape(height, width)[::-1])  # disk is bottom-to-top
    bad = np.flatnonzero(~(np.isfinite(arr) & (arr >= 0.0) & (arr <= 1.0)))
    if bad.size:
        r, c = divmod(int(bad[0]), width)
        file_index = (height - 1 - r) * width + c
        sc.fail(
            f"sample {arr[r, c]!r} at pixel (row {r}, col {c}) outside [0, 1]",
            start + 4 * file_index,
        )
    return ProbMap(arr)


def write_probmap(probmap: ProbMap, path):
    header = f"Pf\n{probmap.width} {probmap.height}\n-1.0\n".encode("ascii")
    payload = probmap.pixels[::-1].astype("<f4").tobytes()
    Path(path).write_bytes(header + payload)


@dataclass(frozen=True)
class ManifestEntry:
    slice_id: str
    truth: str
    model_paths: tuple


@dataclass(frozen=True)
class Manifest:
    """Binding of slice ids to a truth mask file and one map file per model."""

    model_names: tuple
    entries: tuple
    base_dir: Path = field(default=Path("."), compare=False)

    @property
    def n_models(self) -> int:
        return len(self.model_names)

    def truth_path(self, entry: ManifestEntry) -> Path:
        return self.base_dir / entry.truth

    def model_path(self, entry: ManifestEntry, k: int) -> Path:
        return self.base_dir / entry.model_paths[k]


def read_manifest(path) -> Manifest:
    """Parse a manifest CSV and verify every referenced file exists.

    Header is ``slice_id,truth,<model>...``; paths are resolved against the
    manifest's directory.
    """
    path = Path(path)
    with open(path, newline="", encoding="utf-8") as f:
        rows = list(csv.reader(f))
    if not rows:
        raise ManifestError(f"{path}: empty manifest")
    header = rows[0]
    if len(header) < 3 or header[0] != "slice_id" or header[1] != "truth":
        raise ManifestError(
            f"{path}: bad header {header!r}, expected slice_id,truth,<model>,..."
        )
    model_names = tuple(header[2:])
    if any(not name for name in model_names):
        raise ManifestError(f"{path}: empty model name in header")
    entries = []
    seen = set()
    for i, row in enumerate(rows[1:], start=2):
        if len(row) != len(header):
            raise ManifestError(
                f"{path}: row {i}: expected {len(header)} fields, found {len(row)}"
            )
        slice_id = row[0]
        if not slice_id:
            raise ManifestError(f"{path}: row {i}: empty slice_id")
        if slice_id in seen:
            raise ManifestError(f"{path}: row {i}: duplicate slice_id {slice_id!r}")
        seen.add(slice_id)
        entries.append(ManifestEntry(slice_id, row[1], tuple(row[2:])))
    manifest = Manifest(model_names=model_names, entries=tuple(entries), base_dir=path.parent)
    for entry in manifest.entries:
        for p in (manifest.truth_path(entry), *(manifest.base_dir / m for m in entry.model_paths)):
            if not p.is_file():
                raise ManifestError(
                    f"{path}: missing file {p} (slice {entry.slice_id!r})"
                )
    return manifest


def write_manifest(manifest: Manifest, path):
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["slice_id", "truth", *manifest.model_names])
        for entry in manifest.entries:
            writer.writerow([entry.slice_id, entry.truth, *entry.model_paths])


def load_slices(manifest: Manifest) -> list:
    """Read every slice of a manifest as (slice_id, truth Mask, [ProbMap])."""
    out = []
    for entry in manifest.entries:
        truth = read_mask(manifest.truth_path(entry))
        maps = [read_probmap(manifest.model_path(entry, k)) for k in range(manifest.n_models)]
        out.append((entry.slice_id, truth, maps))
    return out


def _f4(x: float) -> str:
    return f"{x:.4f}"


def write_report(rows: Iterable, aggregate: AggregateMetrics, path):
    """Per-slice metric rows plus a final AGGREGATE row, 4 decimal places.

    rows holds (slice_id, MetricsRecord) pairs. The aggregate row carries
    the pooled-count overlap scores and the boundary sum in the hd95 column.
    """
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["id", "iou", "precision", "recall", "f1", "hd95"])
        for slice_id, rec in rows:
            writer.writerow(
                [slice_id, _f4(rec.iou), _f4(rec.precision), _f4(rec.recall), _f4(rec.f1), _f4(rec.hd95)]
            )
        writer.writerow(
            [
                "AGGREGATE",
                _f4(aggregate.iou),
                _f4(aggregate.precision),
                _f4(aggregate.recall),
                _f4(aggregate.f1),
                _f4(aggregate.h),
            ]
        )


def write_grid_table(result: GridSearchResult, path):
    """Full enumeration table: exact weights, full-precision objective, best flag.

    Objectives are written with round-trip precision so tools reading the
    table (heatmap panels in particular) see exactly the computed values.
    """
    n = len(result.best)
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow([f"w_{i + 1}" for i in range(n)] + ["objective", "best"])
        for w, obj in result.table:
            writer.writerow(
                [format_weight(nu, w.denominator) for nu in w.numerators]
                + [repr(obj), "1" if w == result.best else ""]
            )


def read_grid_table(path) -> GridSearchResult:
    """Parse a grid table back into a result, verifying full simplex coverage."""
    path = Path(path)
    with open(path, newline="", encoding="utf-8") as f:
        rows = list(csv.reader(f))
    if not rows:
        raise FormatError("empty grid table", path)
    header = rows[0]
    n = len(header) - 2
    if n < 2 or header != [f"w_{i + 1}" for i in range(n)] + ["objective", "best"]:
        raise FormatError(f"bad header {header!r}", path)
    parsed = []
    denominator = 1
    for i, row in enumerate(rows[1:], start=2):
        if len(row) != len(header):
            raise FormatError(f"row {i}: expected {len(header)} fields, found {len(row)}", path)
        try:
            fracs = [Fraction(cell) for cell in row[:n]]
            obj = float(row[n])
        except (ValueError, ZeroDivisionError) as exc:
            raise FormatError(f"row {i}: {exc}", path) from None
        if any(f < 0 for f in fracs):
            raise FormatError(f"row {i}: negative weight", path)
        if sum(fracs) != 1:
            raise FormatError(f"row {i}: weights sum to {sum(fracs)}, expected 1", path)
        if row[n + 1] not in ("", "1"):
            raise FormatError(f"row {i}: bad best flag {row[n + 1]!r}", path)
        for f_ in fracs:
            denominator = math.lcm(denominator, f_.denominator)
        parsed.append((fracs, obj, row[n + 1] == "1"))
    entries = []
    best = None
    for fracs, obj, flagged in parsed:
        w = WeightVector(tuple(int(f_ * denominator) for f_ in fracs), denominator)
        entries.append((w, obj))
        if flagged:
            if best is not None:
                raise FormatError("multiple rows flagged best", path)
            best = (w, obj)
    if best is None:
        raise FormatError("no row flagged best", path)
    numerator_set = {w.numerators for w, _ in entries}
    if len(numerator_set) != len(entries):
        raise FormatError("duplicate weight vectors", path)
    expected = math.comb(denominator + n - 1, n - 1)
    if len(entries) != expected:
        raise FormatError(
            f"table holds {len(entries)} vectors but the 1/{denominator} grid has {expected}",
            path,
        )
    entries.sort(key=lambda item: item[0].numerators)
    try:
        return GridSearchResult(best=best[0], best_objective=best[1], table=tuple(entries))
    except ValueError as exc:
        raise FormatError(str(exc), path) from None


def write_heatmap(matrix: HeatmapMatrix, path):
    """CSV panel of Z values; metadata line records the fixed axis and argmax.

    Row r and column c hold the cell with second and first free numerator
    r and c; cells violating the simplex constraint are left empty.
    """
    lines = [
        f"# fixed_index={matrix.fixed_index},fixed_numerator={matrix.fixed_numerator},"
        f"denominator={matrix.denominator},argmax_col={matrix.argmax_cell[0]},"
        f"argmax_row={matrix.argmax_cell[1]},argmax_z={matrix.argmax_z!r}"
    ]
    for row in matrix.cells:
        lines.append(",".join("" if math.isnan(v) else repr(float(v)) for v in row))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
