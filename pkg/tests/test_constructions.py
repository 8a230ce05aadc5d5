import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from treegroups.constructions import (
    AffineMap,
    GSSpec,
    PatternSet,
    affine_group,
    affine_model,
    affine_pattern,
    all_taus,
    finite_type_check,
    g_tau,
    gh_group,
    gs_group,
    is_closed,
    lemma_group,
    lemma_order,
    lemma_sampler,
    pattern_group,
    pattern_order,
    units,
    windows_in_pattern,
)
from treegroups.engine import enumerate_closure, full_group, is_normal_subgroup, stabilizer
from treegroups.errors import PreconditionError, SamplerError
from treegroups.tree import parse_portrait

from conftest import portraits


@pytest.mark.parametrize("d,orders", [(2, [2, 4, 16, 256]), (3, [3, 9, 243])])
def test_gs_orders_closed_form_and_enumerated(d, orders):
    spec = GSSpec(d)
    for n, want in enumerate(orders, start=1):
        assert spec.order(n) == want
        assert enumerate_closure(spec.generators(n), n, degree=d).order == want


def test_gs_rejects_non_cycle():
    with pytest.raises(ValueError):
        GSSpec(4, (1, 0, 3, 2))


def test_gs_group_labels_are_sibling_constant():
    G = gs_group(GSSpec(3), 3)
    for g in G.elements[::7]:
        for k in (1, 2):
            labels = g.level_labels(k)
            for p in range(0, len(labels), 3):
                assert len(set(labels[p:p + 3])) == 1


def test_pattern_orders():
    assert pattern_order(PatternSet.full(2), 3) == 128
    assert pattern_order(PatternSet.trivial(2), 3) == 1
    assert pattern_group(PatternSet.full(2), 3).same_elements(full_group(2, 3))


@pytest.mark.parametrize("n", [3, 4])
def test_pattern_group_of_gs_windows(n):
    P = PatternSet.from_portraits(GSSpec(2).generators(2))
    G = gs_group(GSSpec(2), n)
    assert pattern_order(P, n) == G.order
    assert pattern_group(P, n).same_elements(G)
    assert windows_in_pattern(G, P)


@settings(max_examples=20)
@given(st.lists(portraits(degrees=(2,), depth=2), min_size=1, max_size=3))
def test_pattern_group_windows_lie_in_pattern(gens):
    P = PatternSet.from_portraits(gens)
    G = pattern_group(P, 3)
    assert G.order == pattern_order(P, 3)
    assert windows_in_pattern(G, P)
    assert is_closed(G)


def test_finite_type_verdicts():
    L = lemma_group(2, 4)
    assert not finite_type_check(L.H, 1).holds
    assert finite_type_check(L.H, 2).holds
    assert not finite_type_check(L.G, 2).holds
    assert finite_type_check(L.G, 3).holds
    assert finite_type_check(full_group(2, 3), 1).holds


def test_g_tau_labels():
    g = g_tau(3, (1, 0, 2), 2)
    assert g.label(()) == (0, 1, 2)
    assert g.label((0,)) == (1, 2, 0)
    assert g.label((1,)) == (0, 1, 2)
    assert g.label((2,)) == (2, 0, 1)
    assert len(list(all_taus(3))) == 27


@pytest.mark.parametrize("n,order", [(2, 8), (3, 32), (4, 512), (5, 131072)])
def test_lemma_orders_d2(n, order):
    L = lemma_group(2, n)
    assert L.G.order == order == lemma_order(2, n)
    assert L.H.order == GSSpec(2).order(n)
    assert all(L.checks.values())


@pytest.mark.parametrize("d,order", [(2, 8), (3, 81), (4, 1024)])
def test_lemma_depth2_order(d, order):
    assert lemma_group(d, 2).G.order == order == lemma_order(d, 2)


def test_lemma_d3_structure():
    L = lemma_group(3, 3)
    assert (L.G.order, L.H.order) == (59049, 243)
    assert L.G.truncate(2).order == 81
    assert not L.checks["H normal in G"]
    st2 = stabilizer(L.G, "level", 2)
    assert st2.order == 729
    assert not st2.issubset(L.H)
    with pytest.raises(ValueError):
        lemma_order(3, 3)
    with pytest.raises(SamplerError):
        lemma_sampler(3, 3)


def test_lemma_d3_conjugation_leaves_h():
    # conjugating the root cycle by g_tau gives a level-1 label triple outside H
    L = lemma_group(3, 2)
    assert not is_normal_subgroup(L.G, L.H)


def test_gh_of_lemma_d2_is_g():
    L = lemma_group(2, 4)
    GH = gh_group(L.G, L.H)
    assert GH.same_elements(L.G)
    assert gh_group(L.G, L.G).same_elements(L.G)


def test_gh_requires_normality():
    G = affine_model(3, 2, "G")
    H = affine_model(3, 2, "H")
    with pytest.raises(PreconditionError):
        gh_group(G, H)
    GH = gh_group(G, H, require_normal=False)
    assert GH.order == 162
    assert H.issubset(GH) and GH.issubset(G)


def test_gh_of_trivial_subgroup_is_sibling_constant():
    # sections at all vertices agree with the root: the diagonal copies
    G = full_group(2, 2)
    triv = enumerate_closure([parse_portrait("e", degree=2, depth=2)], 2, degree=2)
    GH = gh_group(G, triv)
    assert is_closed(GH)
    for g in GH.elements:
        assert g.label((0,)) == g.label((1,)) == g.label(())


def test_affine_maps():
    assert units(6) == [1, 5]
    assert len(affine_group(5)) == 20
    m = AffineMap(2, 1, 5)
    assert m.perm == (1, 3, 0, 2, 4)
    assert m.fixed_points == (4,)
    assert not m.is_translation
    assert AffineMap(1, 2, 5).fixed_points == ()
    with pytest.raises(ValueError):
        AffineMap(2, 0, 4)


def test_affine_model_orders():
    assert len(affine_pattern(3, "G")) == 6
    assert affine_model(3, 2, "G").order == 1296
    assert affine_model(3, 2, "H").order == 81
    assert affine_model(5, 1, "G").order == 20
