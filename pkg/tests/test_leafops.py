import numpy as np
from hypothesis import given

from treegroups import leafops as lo
from treegroups.tree import canonical_key, compose, invert, section, truncate, level_vertices, vertex_index

from conftest import portrait_pairs, portraits, random_portraits


def rows_of(*gs):
    g = gs[0]
    return lo.as_rows(list(gs), g.degree, g.depth)


@given(portrait_pairs(max_depth=3))
def test_row_ops_match_portrait_ops(pair):
    g, h = pair
    d, n = g.degree, g.depth
    a, b = rows_of(g), rows_of(h)
    assert lo.row_to_portrait(lo.compose_rows(a, b)[0], d, n) == compose(g, h)
    assert lo.row_to_portrait(lo.invert_rows(a)[0], d, n) == invert(g)
    for m in range(n + 1):
        assert lo.row_to_portrait(lo.truncate_rows(a, d, n, m)[0], d, m) == truncate(g, m)


@given(portraits(max_depth=3))
def test_row_sections_match(g):
    d, n = g.degree, g.depth
    a = rows_of(g)
    for k in range(n + 1):
        for v in level_vertices(d, k):
            got = lo.section_rows(a, d, n, k, vertex_index(v, d), n - k)
            assert lo.row_to_portrait(got[0], d, n - k) == section(g, v)


@given(portraits(max_depth=3))
def test_labels_round_trip(g):
    d, n = g.degree, g.depth
    a = rows_of(g)
    assert np.array_equal(lo.rows_from_labels(lo.labels_from_rows(a, d, n), d, n), a)


def test_key_order_matches_canonical_keys(rng):
    for d, n in ((2, 3), (3, 2), (4, 2)):
        gs = random_portraits(rng, d, n, 300)
        order = lo.key_order(lo.as_rows(gs, d, n), d, n)
        keys = [canonical_key(gs[i]) for i in order]
        assert keys == sorted(keys)


def test_unique_rows_drops_duplicates(rng):
    gs = random_portraits(rng, 2, 2, 50)
    a = lo.as_rows(gs + gs, 2, 2)
    uniq, _ = lo.unique_rows(a)
    assert uniq.shape[0] == len({canonical_key(g) for g in gs})
