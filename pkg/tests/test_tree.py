import math

import pytest
from hypothesis import given, strategies as st

from treegroups.tree import (
    Portrait,
    PortraitParseError,
    ShapeError,
    TreeRangeError,
    apply_vertex,
    canonical_key,
    compose,
    fixed_count,
    format_portrait,
    invert,
    level_vertices,
    parse_portrait,
    perm_mul,
    perm_rank,
    perm_unrank,
    portrait_from_key,
    section,
    truncate,
)

from conftest import portrait_pairs, portraits


def test_perm_product_applies_left_factor_first():
    p, q = (1, 0, 2), (0, 2, 1)
    # 0 -p-> 1 -q-> 2
    assert perm_mul(p, q)[0] == 2


def test_rank_unrank_round_trip():
    for d in (2, 3, 4):
        ranks = [perm_rank(perm_unrank(r, d)) for r in range(math.factorial(d))]
        assert ranks == list(range(math.factorial(d)))


def test_root_swap_composition():
    a = parse_portrait("10", degree=2, depth=2)
    b = parse_portrait("e[10,e]", degree=2, depth=2)
    ab = compose(a, b)
    # a moves 0x to 1x, then b only acts below vertex 0
    assert apply_vertex(ab, (0, 0)) == (1, 0)
    assert apply_vertex(ab, (1, 0)) == (0, 1)
    assert ab.label(()) == (1, 0)
    assert ab.label((1,)) == (1, 0)


def test_section_and_truncate_examples():
    g = parse_portrait("10[01,10]", degree=2)
    assert g.depth == 2
    assert section(g, (1,)).labels == ((1, 0),)
    assert truncate(g, 1).labels == ((1, 0),)
    assert section(g, ()) == g


def test_fixed_count_of_identity_and_root_swap():
    e = Portrait.identity(3, 2)
    assert [fixed_count(e, k) for k in range(3)] == [1, 3, 9]
    swap = parse_portrait("102", degree=3, depth=2)
    assert fixed_count(swap, 1) == 1
    assert fixed_count(swap, 2) == 3


def test_format_round_trip_examples():
    for text in ("10", "10[e,10]", "e[10,e]", "120[e,201,e]"):
        g = parse_portrait(text)
        assert format_portrait(g) == text
    assert format_portrait(parse_portrait("e", degree=2)) == "e"
    with pytest.raises(PortraitParseError):
        parse_portrait("e[e,e]")


def test_parse_errors():
    with pytest.raises(PortraitParseError):
        parse_portrait("10[e,")
    with pytest.raises(PortraitParseError):
        parse_portrait("10]")
    with pytest.raises(ValueError):
        Portrait(2, 1, ((0, 0),))


def test_shape_and_range_errors():
    a = Portrait.identity(2, 2)
    b = Portrait.identity(3, 2)
    with pytest.raises(ShapeError):
        compose(a, b)
    with pytest.raises(TreeRangeError):
        section(a, (0, 1, 1))
    with pytest.raises(TreeRangeError):
        truncate(a, 3)


def test_level_vertices_lexicographic():
    assert level_vertices(2, 2) == [(0, 0), (0, 1), (1, 0), (1, 1)]


@given(portrait_pairs())
def test_section_cocycle(pair):
    g, h = pair
    gh = compose(g, h)
    for k in range(g.depth + 1):
        for v in level_vertices(g.degree, k):
            assert section(gh, v) == compose(section(g, v), section(h, apply_vertex(g, v)))


@given(portraits())
def test_inverse_law(g):
    e = Portrait.identity(g.degree, g.depth)
    assert compose(g, invert(g)) == e
    assert compose(invert(g), g) == e


@given(portrait_pairs())
def test_action_is_a_right_action(pair):
    g, h = pair
    gh = compose(g, h)
    for v in level_vertices(g.degree, g.depth):
        assert apply_vertex(gh, v) == apply_vertex(h, apply_vertex(g, v))


@given(portraits())
def test_key_round_trip(g):
    assert portrait_from_key(canonical_key(g), g.degree, g.depth) == g


@given(portraits())
def test_text_round_trip(g):
    assert parse_portrait(format_portrait(g), degree=g.degree, depth=g.depth) == g


@given(portrait_pairs())
def test_key_injective(pair):
    g, h = pair
    assert (canonical_key(g) == canonical_key(h)) == (g == h)


@given(portraits(), st.data())
def test_truncation_is_a_homomorphism(g, data):
    h = data.draw(portraits((g.degree,), depth=g.depth))
    m = data.draw(st.integers(0, g.depth))
    assert truncate(compose(g, h), m) == compose(truncate(g, m), truncate(h, m))
