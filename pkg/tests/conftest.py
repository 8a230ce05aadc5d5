import itertools

import numpy as np
import pytest
from hypothesis import settings, strategies as st

from treegroups.tree import Portrait, num_labels

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


@st.composite
def portraits(draw, degrees=(2, 3, 4), max_depth=3, depth=None):
    d = draw(st.sampled_from(degrees))
    n = draw(st.integers(0, max_depth if d < 4 else 2)) if depth is None else depth
    perms = list(itertools.permutations(range(d)))
    labels = draw(st.lists(st.sampled_from(perms), min_size=num_labels(d, n), max_size=num_labels(d, n)))
    return Portrait(d, n, tuple(labels))


@st.composite
def portrait_pairs(draw, degrees=(2, 3, 4), max_depth=3):
    g = draw(portraits(degrees, max_depth))
    h = draw(portraits((g.degree,), depth=g.depth))
    return g, h


def random_portraits(rng, d, n, count):
    perms = np.array(list(itertools.permutations(range(d))))
    picks = rng.integers(0, len(perms), size=(count, num_labels(d, n)))
    return [Portrait(d, n, tuple(tuple(int(a) for a in perms[i]) for i in row)) for row in picks]


@pytest.fixture
def rng():
    return np.random.default_rng(0x5EED)
