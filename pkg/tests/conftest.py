import numpy as np
import pytest
from hypothesis import strategies as st

from segfuse import Mask, ProbMap


def mask_from_rows(*rows):
    """Build a Mask from strings, '#' foreground and '.' background."""
    return Mask(np.array([[ch == "#" for ch in row] for row in rows]))


def random_mask(rng, height, width, density):
    return Mask(rng.random((height, width)) < density)


def random_probmap(rng, height, width):
    return ProbMap(rng.random((height, width)).astype(np.float32))


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)


@st.composite
def mask_arrays(draw, max_side=8):
    h = draw(st.integers(1, max_side))
    w = draw(st.integers(1, max_side))
    bits = draw(st.lists(st.booleans(), min_size=h * w, max_size=h * w))
    return np.array(bits, dtype=bool).reshape(h, w)


@st.composite
def mask_pairs(draw, max_side=8):
    h = draw(st.integers(1, max_side))
    w = draw(st.integers(1, max_side))
    a = draw(st.lists(st.booleans(), min_size=h * w, max_size=h * w))
    b = draw(st.lists(st.booleans(), min_size=h * w, max_size=h * w))
    return (
        Mask(np.array(a, dtype=bool).reshape(h, w)),
        Mask(np.array(b, dtype=bool).reshape(h, w)),
    )


@st.composite
def probmap_arrays(draw, max_side=6):
    h = draw(st.integers(1, max_side))
    w = draw(st.integers(1, max_side))
    vals = draw(
        st.lists(
            st.floats(0.0, 1.0, width=32, allow_nan=False),
            min_size=h * w,
            max_size=h * w,
        )
    )
    return np.array(vals, dtype=np.float32).reshape(h, w)


@st.composite
def point_sets(draw, max_points=12):
    n = draw(st.integers(0, max_points))
    coord = st.integers(-20, 20)
    return [(draw(coord), draw(coord)) for _ in range(n)]
