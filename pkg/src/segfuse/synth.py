"""Seeded synthetic fixtures: lesion-like truth masks plus corrupted model maps.

Stands in for trained segmentation models in tests and demos. Truth masks
are unions of filled axis-aligned ellipses ("blobs"); each model's
probability map is the truth corrupted by that model's error profile:

  - miss_rate: each truth blob is dropped independently with this
    probability (models relying on local features lose whole small lesions)
  - clutter_rate: spurious blobs appear (models pooling global context
    leave unrelated structures in)
  - blur_sigma: boundaries are softened into [0, 1] probabilities by a
    truncated Gaussian kernel of radius ceil(3*sigma), zero-padded at the
    raster edge, clamped to [0, 1]

Randomness comes from SplitMix64, a tiny named 64-bit generator implemented
here, not from the platform RNG, so a seed produces identical fixtures on
any platform or language. Draw order per slice is fixed: the truth stream
draws blob count then (cy, cx, ry, rx) per blob; each model's stream draws
one miss decision per truth blob, then per truth blob one clutter decision
followed, on success, by the clutter blob's (cy, cx, ry, rx).
"""

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .raster import Mask, ProbMap

__all__ = ["ModelProfile", "SynthConfig", "SplitMix64", "generate"]

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def _mix64(x: int) -> int:
    x &= _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


class SplitMix64:
    """SplitMix64 stream: 64-bit additive counter with an avalanche finalizer."""

    def __init__(self, seed: int):
        self._state = seed & _MASK64

    def next_u64(self) -> int:
        self._state = (self._state + _GOLDEN) & _MASK64
        return _mix64(self._state)

    def uniform(self, lo: float = 0.0, hi: float = 1.0) -> float:
        """Uniform float in [lo, hi) using the top 53 bits."""
        return lo + (hi - lo) * ((self.next_u64() >> 11) * 2.0**-53)

    def randint(self, lo: int, hi: int) -> int:
        """Uniform integer in [lo, hi], both ends inclusive."""
        return lo + int(self.uniform() * (hi - lo + 1))


def _substream(seed: int, *indices: int) -> int:
    """Derive an independent stream seed from (seed, index...)."""
    s = seed & _MASK64
    for ix in indices:
        s = _mix64(s ^ _mix64(((ix + 1) * _GOLDEN) & _MASK64))
    return s


@dataclass(frozen=True)
class ModelProfile:
    """Error profile of one simulated model."""

    miss_rate: float = 0.0
    clutter_rate: float = 0.0
    blur_sigma: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.miss_rate <= 1.0:
            raise ValueError(f"miss_rate must lie in [0, 1], got {self.miss_rate}")
        if not 0.0 <= self.clutter_rate <= 1.0:
            raise ValueError(f"clutter_rate must lie in [0, 1], got {self.clutter_rate}")
        if not self.blur_sigma >= 0.0:
            raise ValueError(f"blur_sigma must be non-negative, got {self.blur_sigma}")


@dataclass(frozen=True)
class SynthConfig:
    seed: int
    width: int = 64
    height: int = 64
    n_slices: int = 5
    n_models: int = 4
    blob_count_range: tuple = (1, 3)
    blob_radius_range: tuple = (3.0, 8.0)
    profiles: tuple = ()

    def __post_init__(self):
        if not isinstance(self.seed, (int, np.integer)) or not 0 <= self.seed <= _MASK64:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {self.seed!r}")
        if self.width < 1 or self.height < 1:
            raise ValueError(f"raster dimensions must be positive, got {self.width}x{self.height}")
        if self.n_slices < 1:
            raise ValueError(f"n_slices must be positive, got {self.n_slices}")
        if self.n_models < 2:
            raise ValueError(f"n_models must be >= 2, got {self.n_models}")
        lo, hi = self.blob_count_range
        if not (isinstance(lo, (int, np.integer)) and isinstance(hi, (int, np.integer))):
            raise ValueError("blob_count_range must be integers")
        if not 0 <= lo <= hi:
            raise ValueError(f"blob_count_range must satisfy 0 <= lo <= hi, got {lo, hi}")
        rlo, rhi = self.blob_radius_range
        if not 0.0 < rlo <= rhi:
            raise ValueError(f"blob_radius_range must satisfy 0 < lo <= hi, got {rlo, rhi}")
        if rhi > max(self.width, self.height):
            raise ValueError(f"blob radius {rhi} exceeds the raster extent")
        profiles = tuple(self.profiles)
        if not profiles:
            profiles = tuple(ModelProfile() for _ in range(self.n_models))
        if len(profiles) != self.n_models:
            raise ValueError(f"{len(profiles)} profiles for {self.n_models} models")
        if not all(isinstance(p, ModelProfile) for p in profiles):
            raise ValueError("profiles must be ModelProfile instances")
        object.__setattr__(self, "profiles", profiles)
        object.__setattr__(self, "blob_count_range", (int(lo), int(hi)))
        object.__setattr__(self, "blob_radius_range", (float(rlo), float(rhi)))


def _draw_blob(rng: SplitMix64, config: SynthConfig) -> tuple:
    cy = rng.uniform(0.0, config.height - 1.0)
    cx = rng.uniform(0.0, config.width - 1.0)
    rlo, rhi = config.blob_radius_range
    ry = rng.uniform(rlo, rhi)
    rx = rng.uniform(rlo, rhi)
    return cy, cx, ry, rx


def _fill(shape: tuple, blobs: Sequence) -> np.ndarray:
    out = np.zeros(shape, dtype=bool)
    rows = np.arange(shape[0], dtype=np.float64)[:, None]
    cols = np.arange(shape[1], dtype=np.float64)[None, :]
    for cy, cx, ry, rx in blobs:
        out |= ((rows - cy) / ry) ** 2 + ((cols - cx) / rx) ** 2 <= 1.0
    return out


def _gaussian_kernel(sigma: float) -> np.ndarray:
    radius = math.ceil(3.0 * sigma)
    xs = np.arange(-radius, radius + 1, dtype=np.float64)
    kernel = np.exp(-(xs**2) / (2.0 * sigma * sigma))
    return kernel / kernel.sum()


def _blur(values: np.ndarray, sigma: float) -> np.ndarray:
    if sigma == 0.0:
        return values
    kernel = _gaussian_kernel(sigma)
    radius = len(kernel) // 2
    for axis in (0, 1):
        pad = [(0, 0), (0, 0)]
        pad[axis] = (radius, radius)
        padded = np.pad(values, pad)
        acc = np.zeros_like(values)
        # sequential taps keep the accumulation order fixed
        for t, kv in enumerate(kernel):
            if axis == 0:
                acc += kv * padded[t : t + values.shape[0], :]
            else:
                acc += kv * padded[:, t : t + values.shape[1]]
        values = acc
    return np.clip(values, 0.0, 1.0)


def generate(config: SynthConfig) -> list:
    """Produce n_slices of (truth Mask, [ProbMap per model]).

    A pure function of the config: the same seed yields bit-identical
    output. Slice i uses substream (seed, i, 0) for the truth and
    (seed, i, k+1) for model k, so slices are independent.
    """
    shape = (config.height, config.width)
    out = []
    for i in range(config.n_slices):
        truth_rng = SplitMix64(_substream(config.seed, i, 0))
        n_blobs = truth_rng.randint(*config.blob_count_range)
        blobs = [_draw_blob(truth_rng, config) for _ in range(n_blobs)]
        truth = _fill(shape, blobs)
        maps = []
        for k, profile in enumerate(config.profiles):
            rng = SplitMix64(_substream(config.seed, i, k + 1))
            kept = [b for b in blobs if rng.uniform() >= profile.miss_rate]
            clutter = []
            for _ in blobs:
                if rng.uniform() < profile.clutter_rate:
                    clutter.append(_draw_blob(rng, config))
            values = _fill(shape, kept + clutter).astype(np.float64)
            values = _blur(values, profile.blur_sigma)
            maps.append(ProbMap(values.astype(np.float32)))
        out.append((Mask(truth), maps))
    return out
