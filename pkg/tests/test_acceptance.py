"""One test per acceptance criterion; each prints a PASS/FAIL line.

Run ``pytest tests/test_acceptance.py -v`` (the lines are printed even with
output capture on).
"""

import math
import time
from fractions import Fraction

import numpy as np
import pytest

from treegroups.constructions import (
    GSSpec, affine_model, gh_group, gs_group, lemma_group, lemma_sampler, section_filter,
)
from treegroups.errors import PreconditionError
from treegroups.engine import enumerate_closure, full_group, is_level_transitive, stabilizer
from treegroups.spectra import (
    affine_bad_count,
    bad_cosets,
    burnside_means,
    euler_formulas,
    fpp_report,
    hdim_ratio,
    martingale_criterion,
    monodromy_bound,
    sampler_gof,
    theorem_shadow,
)
from treegroups.specs import AffineSpec
from treegroups.tree import (
    apply_vertex,
    canonical_key,
    compose,
    invert,
    level_vertices,
    portrait_from_key,
    section,
    Portrait,
)

from conftest import random_portraits

_LEMMA = {}


def lemma(d, n):
    if (d, n) not in _LEMMA:
        _LEMMA[d, n] = lemma_group(d, n)
    return _LEMMA[d, n]


@pytest.fixture
def verdict(capsys):
    """Print one line per criterion and fail the test on a failed criterion."""
    def report(number, title, ok, detail=""):
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] criterion {number}: {title}" + (f" ({detail})" if detail else ""))
        assert ok, f"criterion {number} failed: {title} ({detail})"
    return report


@pytest.mark.parametrize("d,n", [(2, 4), (3, 3)])
def test_01_lemma_identity(verdict, d, n):
    start = time.perf_counter()
    L = lemma(d, n)
    try:
        ok = gh_group(L.G, L.H).same_elements(L.G)
        detail = f"|G| = {L.G.order}"
    except PreconditionError as exc:
        kept = int(section_filter(L.G, L.H).sum())
        ok, detail = False, f"{exc}; |G| = {L.G.order}, |H| = {L.H.order}, section filter keeps {kept}"
    elapsed = time.perf_counter() - start
    verdict(1, f"G = G_H for d={d}, depth {n}", ok and elapsed < 30, f"{detail}; {elapsed:.1f}s")


@pytest.mark.parametrize("d,n", [(2, 4), (3, 3)])
def test_02_stabilizer_containment(verdict, d, n):
    start = time.perf_counter()
    L = lemma(d, n)
    st2 = stabilizer(L.G, "level", 2)
    outside = int(np.count_nonzero(~L.H.contains_rows(st2.rows)))
    elapsed = time.perf_counter() - start
    verdict(2, f"St_G(2) <= H for d={d}, depth {n}", outside == 0 and elapsed < 10,
            f"|St_G(2)| = {st2.order}, |H| = {L.H.order}, {outside} outside H; {elapsed:.1f}s")


@pytest.mark.parametrize("d,n", [(2, 5), (3, 3)])
def test_03_fpp_lower_bound(verdict, d, n):
    start = time.perf_counter()
    bound = Fraction(math.factorial(d - 1), d**d)
    report = fpp_report(lemma(d, n).G, "lemma", bound)
    values = [r.p_k for r in report.levels]
    elapsed = time.perf_counter() - start
    ok = all(p >= bound for p in values) and report.monotone and elapsed < 300
    verdict(3, f"p_k >= {bound} and nonincreasing for d={d}, k <= {n}", ok,
            " ".join(f"{p.numerator}/{p.denominator}" for p in values) + f"; {elapsed:.1f}s")


@pytest.mark.parametrize("d,n,measure", [(2, 4, Fraction(1, 4)), (3, 3, Fraction(2, 27))])
def test_04_finite_shadow(verdict, d, n, measure):
    start = time.perf_counter()
    G = lemma(d, n).G
    report = theorem_shadow(G)
    pi2 = G.truncate(2).order
    ok = (report.all_equal_d and report.measure == measure == Fraction(math.factorial(d), pi2)
          and time.perf_counter() - start < 60)
    verdict(4, f"X_k = d for 1 <= k < {n} on the shadow, measure {measure}, d={d}", ok,
            f"{report.members} elements, measure {report.measure}")


def test_05_pi2_order(verdict):
    got = {d: lemma(d, 2).G.order for d in (2, 3, 4)}
    verdict(5, "|pi_2(G)| = d * d^d for d in {2, 3, 4}", got == {2: 8, 3: 81, 4: 1024}, str(got))


def test_06_index_constant(verdict):
    indices = [Fraction(lemma(2, n).G.order, lemma(2, n).H.order) for n in (2, 3, 4)]
    base = Fraction(lemma(2, 2).G.truncate(2).order, lemma(2, 2).H.truncate(2).order)
    verdict(6, "[pi_n(G):pi_n(H)] constant for 2 <= n <= 4 (d=2)", all(i == base for i in indices),
            " ".join(str(i) for i in indices))


def test_07_hausdorff_ratios(verdict):
    spec = GSSpec(2)
    enumerated = [hdim_ratio(enumerate_closure(spec.generators(n), n, degree=2).order, 2, n).exact
                  for n in range(1, 5)]
    closed = [Fraction(2 ** (n - 1), 2**n - 1) for n in range(1, 5)]
    last = hdim_ratio(spec.order(20), 2, 20)
    ok = enumerated == closed and abs(last.ratio - 0.5) < 1e-5
    verdict(7, "ratio(n) = 2^(n-1)/(2^n-1) for n <= 4 and |ratio(20) - 1/2| < 1e-5", ok,
            f"ratio(20) = {last.ratio!r}")


def test_08_affine_bounds(verdict):
    start = time.perf_counter()
    mismatched = [d for d in range(2, 201) if affine_bad_count(d) != euler_formulas(d)[0]]
    G, H = affine_model(3, 2, "G"), affine_model(3, 2, "H")
    GH = gh_group(G, H, require_normal=False)
    cosets = bad_cosets(G, H, GH)
    witness = monodromy_bound(GH, H, cosets)
    p2 = fpp_report(GH).levels[-1].p_k
    expected_bound = Fraction(1)
    for p in (3,):
        expected_bound *= Fraction(p - 2, p - 1)
    elapsed = time.perf_counter() - start
    ok = (not mismatched and cosets.ratio == euler_formulas(3)[1] == expected_bound
          and p2 >= Fraction(1, 2) and witness.checked == 81 and elapsed < 30)
    verdict(8, "bad cosets = d*prod(1-2/p) for d <= 200; d=3 model p_2 >= 1/2, 81 witnesses", ok,
            f"mismatches {mismatched}, p_2 = {p2}, {witness.checked} witnesses; {elapsed:.1f}s")


def _suite_groups():
    groups = {f"lemma d=2 n={n}": lemma(2, n).G for n in (2, 3, 4, 5)}
    groups["lemma d=3 n=3"] = lemma(3, 3).G
    groups["H d=2 n=4"] = lemma(2, 4).H
    groups["H d=3 n=3"] = gs_group(GSSpec(3), 3)
    G, H = affine_model(3, 2, "G"), affine_model(3, 2, "H")
    groups.update({"affine G": G, "affine H": H, "affine G_H": gh_group(G, H, require_normal=False)})
    groups["Aut d=2 n=3"] = full_group(2, 3)
    return groups


def test_09_burnside_and_martingale(verdict):
    start = time.perf_counter()
    problems = []
    for name, G in _suite_groups().items():
        if all(is_level_transitive(G).values()) and burnside_means(G) != [1] * (G.depth + 1):
            problems.append(f"{name}: means")
        if name.startswith(("lemma", "affine")) and not martingale_criterion(G).holds:
            problems.append(f"{name}: criterion")
        T = G.truncate(min(3, G.depth))
        X = T.fixed_counts
        for k in range(T.depth):
            for t in np.unique(X[:, k]):
                sel = X[:, k] == t
                if Fraction(int(X[sel, k + 1].sum()), int(sel.sum())) != int(t):
                    problems.append(f"{name}: E[X_{k + 1} | X_{k} = {t}]")
    elapsed = time.perf_counter() - start
    verdict(9, "E[X_k] = 1, martingale criterion, conditional identity at depth <= 3",
            not problems and elapsed < 120, "; ".join(problems) or f"{elapsed:.1f}s")


def test_10_sampler_validation(verdict):
    start = time.perf_counter()
    cases = []
    for n in (1, 2, 3, 4):
        cases.append((f"product d=2 n={n}", gs_group(GSSpec(2), n), GSSpec(2).sampler(n)))
    for n in (1, 2, 3):
        cases.append((f"product d=3 n={n}", gs_group(GSSpec(3), n), GSSpec(3).sampler(n)))
    for n in (2, 3, 4):
        cases.append((f"coset lemma d=2 n={n}", lemma(2, n).G, lemma_sampler(2, n)))
    cases.append(("coset lemma d=3 n=2", lemma(3, 2).G, lemma_sampler(3, 2)))
    for part in ("G", "H"):
        cases.append((f"labelwise affine {part}", affine_model(3, 2, part), AffineSpec(3, part).sampler(2)))
    rng = np.random.default_rng(0x5EED)
    failed = []
    for name, G, sampler in cases:
        assert G.order <= 10**4
        fit = sampler_gof(G, sampler, 10**5, rng)
        if not fit.passed(1e-3):
            failed.append(f"{name}: p={fit.pvalue:.2g}")
    elapsed = time.perf_counter() - start
    verdict(10, f"{len(cases)} samplers pass chi-square at 1e-3 with 10^5 draws",
            not failed and elapsed < 120, "; ".join(failed) or f"{elapsed:.1f}s")


@pytest.mark.parametrize("d,n", [(2, 3), (3, 3), (4, 2)])
def test_11_core_algebra(verdict, d, n):
    start = time.perf_counter()
    rng = np.random.default_rng(0x5EED + d)
    gs = random_portraits(rng, d, n, 10**4)
    hs = random_portraits(rng, d, n, 10**4)
    e = Portrait.identity(d, n)
    bad = 0
    levels = [level_vertices(d, k) for k in range(n + 1)]
    for g, h in zip(gs, hs):
        gh = compose(g, h)
        for verts in levels:
            v = verts[int(rng.integers(len(verts)))]
            bad += section(gh, v) != compose(section(g, v), section(h, apply_vertex(g, v)))
        bad += compose(g, invert(g)) != e
        bad += portrait_from_key(canonical_key(g), d, n) != g
    keys = {canonical_key(g) for g in gs}
    distinct = len({g.labels for g in gs})
    bad += len(keys) != distinct
    elapsed = time.perf_counter() - start
    verdict(11, f"cocycle, inverse, key round trip and injectivity on 10^4 portraits, d={d}",
            bad == 0 and elapsed < 60, f"{bad} violations; {elapsed:.1f}s")
