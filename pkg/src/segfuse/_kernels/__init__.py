"""Numerical kernels with a compiled core and a pure-numpy fallback.

The compiled extension (``segfuse._kernels._native``) is preferred when it
imports; otherwise the numpy implementation in ``_pure`` is used. Set
``SEGFUSE_KERNELS=python`` or ``SEGFUSE_KERNELS=native`` to force a backend
(forcing ``native`` raises if the extension is missing). Both backends are
bit-identical; ``benchmarks/bench_kernels.py`` compares their speed.
"""

import os

from . import _pure


def load_backend(choice: str = "auto"):
    """Return (module, name) for the requested kernel backend."""
    if choice not in ("auto", "native", "python"):
        raise ValueError(f"unknown kernel backend {choice!r}")
    if choice == "python":
        return _pure, "python"
    try:
        from . import _native
    except ImportError:
        if choice == "native":
            raise
        return _pure, "python"
    return _native, "native"


_impl, BACKEND = load_backend(os.environ.get("SEGFUSE_KERNELS", "auto").strip().lower() or "auto")

min_distances = _impl.min_distances
fuse_maps = _impl.fuse_maps
fused_counts = _impl.fused_counts

__all__ = ["BACKEND", "load_backend", "min_distances", "fuse_maps", "fused_counts"]
