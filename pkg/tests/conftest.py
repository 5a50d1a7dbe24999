import numpy as np
import pytest
from hypothesis import strategies as st

from translab import HypothesisClass


@st.composite
def small_classes(draw, max_m=5, max_k=3, max_h=12):
    """Small explicit classes, with duplicates allowed in the drawn table."""
    m = draw(st.integers(1, max_m))
    k = draw(st.integers(2, max_k))
    n = draw(st.integers(1, max_h))
    rows = draw(st.lists(st.lists(st.integers(0, k - 1), min_size=m, max_size=m), min_size=n, max_size=n))
    return HypothesisClass(np.array(rows), k)


@st.composite
def binary_classes(draw, max_m=5, max_h=12):
    return draw(small_classes(max_m=max_m, max_k=2, max_h=max_h))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
