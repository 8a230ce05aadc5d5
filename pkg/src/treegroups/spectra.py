"""Fixed-point statistics, monodromy bounds and Hausdorff-dimension ratios.

Probabilities over enumerated groups are exact :class:`fractions.Fraction`
values.  Floats only appear in sampled estimates, their confidence intervals
and the Hausdorff ratios that have no exact rational form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from decimal import Decimal, localcontext
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np
import sympy

from . import kernels
from . import leafops as lo
from .constructions import affine_group, lemma_generator, units
from .engine import (
    DEFAULT_CAP,
    FiniteTreeGroup,
    is_normal_subgroup,
    resolve_sampler,
    sample_rows,
    stabilizer,
)
from .errors import CapacityError, PreconditionError, WitnessViolation
from .tree import Perm, TreeRangeError, Vertex, num_labels, vertex_from_index

ExactFraction = Fraction

DEFAULT_SEED = 0x5EED
DEFAULT_TRIALS = 10**5
Z_SCORE = 4.0  # half-width of reported intervals, in standard errors


def fraction_text(x: Fraction) -> str:
    """``"num/den"`` with the denominator always present."""
    return f"{x.numerator}/{x.denominator}"


# ------------------------------------------------------------------- FPP


@dataclass(frozen=True)
class SampledProportion:
    """A Monte Carlo estimate of a proportion, never mistaken for an exact value."""

    successes: int
    trials: int
    exact = False

    @property
    def estimate(self) -> float:
        return self.successes / self.trials

    @property
    def stderr(self) -> float:
        p = self.estimate
        return math.sqrt(max(p * (1 - p), 0.25 / self.trials) / self.trials)

    @property
    def interval(self) -> tuple[float, float]:
        h = Z_SCORE * self.stderr
        return max(0.0, self.estimate - h), min(1.0, self.estimate + h)


def _quotient_fixing(G: FiniteTreeGroup, k: int) -> tuple[int, int]:
    """``(#{g in π_k(G): X_k(g) > 0}, |π_k(G)|)``."""
    Q = G.truncate(k)
    X = kernels.fixed_counts(Q.rows, G.degree, k)[:, k]
    return int(np.count_nonzero(X)), Q.order


def fpp_at_level(source, k: int, *, cap: int = DEFAULT_CAP, rng: np.random.Generator | None = None,
                 trials: int = DEFAULT_TRIALS) -> Fraction | SampledProportion:
    """Fixed-point proportion of ``π_k``.

    Exact when the quotient can be enumerated within ``cap``; otherwise a
    :class:`SampledProportion` from the source's validated sampler.
    """
    if isinstance(source, FiniteTreeGroup):
        if not 0 <= k <= source.depth:
            raise TreeRangeError(f"level {k} outside 0..{source.depth}")
        if source.is_materialized or source.order <= cap:
            count, order = _quotient_fixing(source, k)
            return Fraction(count, order)
    else:
        try:
            count, order = _quotient_fixing(source.build(k, cap), k)
            return Fraction(count, order)
        except CapacityError:
            pass
    rng = np.random.default_rng(DEFAULT_SEED) if rng is None else rng
    sampler = resolve_sampler(source, k)
    rows = sample_rows(sampler, k, rng, trials)
    X = kernels.fixed_counts(rows, sampler.degree, k)[:, k]
    return SampledProportion(int(np.count_nonzero(X)), trials)


@dataclass
class FPPLevel:
    level: int
    count_fixing: int
    order: int
    p_k: Fraction
    bound: Fraction | None
    passed: bool


@dataclass
class FPPReport:
    spec_id: str
    levels: list[FPPLevel]
    bound: Fraction | None = None
    bound_source: str = ""

    @property
    def monotone(self) -> bool:
        ps = [row.p_k for row in self.levels]
        return all(a >= b for a, b in zip(ps, ps[1:]))

    @property
    def passed(self) -> bool:
        return self.monotone and all(row.passed for row in self.levels)


def fpp_report(G: FiniteTreeGroup, spec_id: str = "", bound: Fraction | None = None,
               bound_source: str = "", levels: Sequence[int] | None = None) -> FPPReport:
    """Exact ``p_k`` for ``k = 1..depth`` against an optional lower bound."""
    rows = []
    for k in levels or range(1, G.depth + 1):
        count, order = _quotient_fixing(G, k)
        p = Fraction(count, order)
        rows.append(FPPLevel(k, count, order, p, bound, bound is None or p >= bound))
    return FPPReport(spec_id or G.name, rows, bound, bound_source)


# ------------------------------------------------------------ bad cosets


def _min_perm(rows: np.ndarray) -> Perm:
    return min(tuple(int(x) for x in r) for r in rows)


@dataclass
class BadCosetReport:
    degree: int
    q_size: int
    cosets: list[Perm]  # each coset named by its lexicographically least permutation
    bad: list[Perm]  # the cosets all of whose permutations fix a letter
    complete_monodromy: bool | None = None
    closed_form: dict = field(default_factory=dict)

    @property
    def ratio(self) -> Fraction:
        return Fraction(len(self.bad), self.q_size)


def bad_cosets(G: FiniteTreeGroup, H: FiniteTreeGroup, candidate: FiniteTreeGroup | None = None) -> BadCosetReport:
    """Cosets of ``π_1(H)`` in ``π_1(G)`` consisting of letter-fixing permutations.

    ``candidate`` (typically ``G_H``) is tested for ``π_1(candidate) = π_1(G)``.
    """
    d = G.degree
    G1, H1 = G.truncate(1), H.truncate(1)
    if not H1.issubset(G1):
        raise PreconditionError("pi_1(H) is not contained in pi_1(G)")
    if not is_normal_subgroup(G1, H1):
        raise PreconditionError("pi_1(H) is not normal in pi_1(G)")
    seen = np.zeros(G1.order, dtype=bool)
    cosets, bad = [], []
    for i in range(G1.order):
        if seen[i]:
            continue
        members = lo.compose_rows(H1.rows, G1.rows[i])
        seen[G1.locate(members)] = True
        name = _min_perm(members)
        cosets.append(name)
        if np.all(np.any(members == np.arange(d), axis=1)):
            bad.append(name)
    order = sorted(range(len(cosets)), key=lambda j: cosets[j])
    cosets = [cosets[j] for j in order]
    bad.sort()
    complete = None
    if candidate is not None:
        complete = candidate.truncate(1).same_elements(G1)
    return BadCosetReport(d, len(cosets), cosets, bad, complete)


def fixed_leaf_path(row: np.ndarray, d: int, n: int) -> Vertex | None:
    """A fixed vertex at the deepest level, i.e. a fixed path from the root."""
    hit = np.flatnonzero(row == np.arange(d**n))
    return vertex_from_index(int(hit[0]), n, d) if hit.size else None


@dataclass
class MonodromyBound:
    bound: Fraction
    depth: int
    checked: int  # elements lying over a bad coset
    witness: Vertex | None = None  # fixed path of the first such element


def monodromy_bound(GH: FiniteTreeGroup, H: FiniteTreeGroup, report: BadCosetReport,
                    depth: int | None = None) -> MonodromyBound:
    """``#M/|Q|`` plus the finite-depth witness check.

    Every element of ``GH`` over a bad coset must fix a vertex at every level up
    to ``depth``; a failure raises :class:`WitnessViolation`.
    """
    d = GH.degree
    n = GH.depth if depth is None else depth
    if n > GH.depth:
        raise TreeRangeError(f"depth {n} exceeds the group depth {GH.depth}")
    if not report.bad:
        return MonodromyBound(Fraction(0), n, 0)
    H1 = H.truncate(1)
    bad_names = set(report.bad)
    roots = lo.truncate_rows(GH.rows, d, GH.depth, 1)
    over_bad = np.zeros(GH.order, dtype=bool)
    for i, r in enumerate(np.unique(roots, axis=0)):
        name = _min_perm(lo.compose_rows(H1.rows, r))
        if name in bad_names:
            over_bad |= np.all(roots == r, axis=1)
    X = GH.fixed_counts[over_bad, 1:n + 1]
    if X.size and not np.all(X >= 1):
        j = int(np.flatnonzero(~np.all(X >= 1, axis=1))[0])
        raise WitnessViolation(f"element {j} over a bad coset fixes no vertex at some level <= {n}")
    witness = None
    if np.any(over_bad):
        first = GH.rows[np.flatnonzero(over_bad)[0]]
        witness = fixed_leaf_path(lo.truncate_rows(first[None, :], d, GH.depth, n)[0], d, n)
    return MonodromyBound(report.ratio, n, int(over_bad.sum()), witness)


def euler_formulas(d: int) -> tuple[int, Fraction]:
    """``d ∏(1 - 2/p)`` and ``∏ (p-2)/(p-1)`` over the primes dividing ``d``."""
    if d < 2:
        raise ValueError("d must be >= 2")
    count = Fraction(d)
    bound = Fraction(1)
    for p in sympy.primefactors(d):
        count *= Fraction(p - 2, p)
        bound *= Fraction(p - 2, p - 1)
    if count.denominator != 1:
        raise AssertionError(f"non-integral bad-coset count {count} for d={d}")
    return int(count), bound


def affine_bad_count(d: int) -> int:
    """Brute force: units ``a`` such that every ``z ↦ a z + b`` has a fixed point."""
    z = np.arange(d)
    total = 0
    for a in units(d):
        # rows: b, columns: z; a fixed point means a*z + b == z
        fixes = ((a - 1) * z[None, :] + z[:, None]) % d == 0
        total += bool(np.all(np.any(fixes, axis=1)))
    return total


def affine_bad_count_maps(d: int) -> int:
    """Same count, straight from the list of maps and their fixed points."""
    by_a: dict[int, bool] = {}
    for m in affine_group(d):
        by_a[m.a] = by_a.get(m.a, True) and bool(m.fixed_points)
    return sum(by_a.values())


# ------------------------------------------------------------------ hdim


def _log_vector(order: int, primes: Sequence[int]) -> dict[int, int]:
    out = {}
    rest = order
    for p in primes:
        e = sympy.multiplicity(p, rest) if rest > 1 else 0
        if e:
            out[p] = e
            rest //= p**e
    if rest != 1:
        raise ValueError(f"order has prime factors outside {list(primes)}")
    return out


def _ln(vec: dict[int, int]) -> Decimal:
    return sum((Decimal(e) * Decimal(p).ln() for p, e in vec.items()), Decimal(0))


@dataclass
class HdimLevel:
    level: int
    log_order: dict[int, int]  # prime -> exponent of |π_n(G)|
    log_aut: dict[int, int]  # prime -> exponent of |π_n(Aut T)|
    ratio: float
    exact: Fraction | None  # when the two exponent vectors are proportional


@dataclass
class HdimReport:
    spec_id: str
    degree: int
    levels: list[HdimLevel]
    limit_note: str = ""

    @property
    def ratios(self) -> list[float]:
        return [row.ratio for row in self.levels]


def hdim_ratio(order: int, d: int, n: int, precision: int = 50) -> HdimLevel:
    primes = list(sympy.primerange(2, d + 1))
    top = _log_vector(order, primes)
    fact = _log_vector(math.factorial(d), primes)
    labels = num_labels(d, n)
    bottom = {p: e * labels for p, e in fact.items()}
    exact = None
    if not top:
        exact = Fraction(0)
    else:
        ratios = {Fraction(top.get(p, 0), e) for p, e in bottom.items()}
        if len(ratios) == 1 and set(top) <= set(bottom):
            exact = ratios.pop()
    if exact is not None:
        ratio = float(exact)
    elif labels == 0:
        ratio = 0.0
    else:
        with localcontext() as ctx:
            ctx.prec = precision
            ratio = float(_ln(top) / _ln(bottom))
    return HdimLevel(n, top, bottom, ratio, exact)


def hdim_sequence(order_at: Callable[[int], int], d: int, n_max: int, spec_id: str = "",
                  n_min: int = 1) -> HdimReport:
    """``log|π_n(G)| / log|π_n(Aut T)|`` for ``n = n_min..n_max``.

    ``order_at(n)`` supplies ``|π_n(G)|`` from a closed form or an enumeration.
    """
    levels = [hdim_ratio(order_at(n), d, n) for n in range(n_min, n_max + 1)]
    return HdimReport(spec_id, d, levels)


def gs_hdim_limit(d: int) -> float:
    """Limit of the ratio for the per-level product group with cyclic ``S_0`` of order ``d``."""
    return math.log(d) / (d * math.log(math.factorial(d)))


# -------------------------------------------------------------- processes


@dataclass
class ProcessReport:
    spec_id: str
    depth: int
    trials: int
    seed: int | None
    trajectories: np.ndarray  # (trials, depth) values of X_1..X_depth
    target: int  # the value r in the event X_k = r for all k
    exact_event: Fraction | None = None
    exact_means: list[Fraction] | None = None

    @property
    def event_rate(self) -> SampledProportion:
        hits = int(np.count_nonzero(np.all(self.trajectories == self.target, axis=1)))
        return SampledProportion(hits, self.trials)

    @property
    def means(self) -> list[float]:
        return [float(x) for x in self.trajectories.mean(axis=0)] if self.trials else []

    def mean_intervals(self) -> list[tuple[float, float]]:
        out = []
        for col in self.trajectories.T.astype(float):
            half = Z_SCORE * col.std(ddof=1) / math.sqrt(len(col)) if len(col) > 1 else math.inf
            out.append((col.mean() - half, col.mean() + half))
        return out


def process_sample(source, depth: int, trials: int = DEFAULT_TRIALS,
                   rng: np.random.Generator | None = None, seed: int | None = DEFAULT_SEED,
                   target: int | None = None, spec_id: str = "") -> ProcessReport:
    """Trajectories ``(X_1..X_depth)`` of exactly uniform draws.

    ``rng`` wins over ``seed``.  If the source is an enumerated group the exact
    probability of the event and the exact means are attached.
    """
    if rng is None:
        rng = np.random.default_rng(seed)
    sampler = resolve_sampler(source, depth)
    d = sampler.degree
    target = d if target is None else target
    rows = sample_rows(sampler, depth, rng, trials)
    X = kernels.fixed_counts(rows, d, depth)[:, 1:]
    report = ProcessReport(spec_id, depth, trials, seed, X, target)
    if isinstance(source, FiniteTreeGroup) and source.is_materialized:
        G = source.truncate(depth)
        F = G.fixed_counts[:, 1:]
        report.exact_event = Fraction(int(np.count_nonzero(np.all(F == target, axis=1))), G.order)
        report.exact_means = [Fraction(int(F[:, k].sum()), G.order) for k in range(depth)]
    return report


def burnside_means(G: FiniteTreeGroup) -> list[Fraction]:
    """Exact ``E[X_k]`` for ``k = 0..depth``; equals the number of orbits on level ``k``."""
    sums = G.fixed_counts.sum(axis=0, dtype=np.int64)
    return [Fraction(int(s), G.order) for s in sums]


# ----------------------------------------------------- lemma-group shadow


@dataclass
class ShadowReport:
    degree: int
    depth: int
    members: int
    measure: Fraction
    expected: Fraction
    all_equal_d: bool  # X_k = d for 1 <= k <= depth - 1
    at_full_depth: bool  # X_depth = d as well (reported, not asserted)

    @property
    def passed(self) -> bool:
        return self.all_equal_d and self.measure == self.expected


def theorem_shadow(G: FiniteTreeGroup) -> ShadowReport:
    """The set ``⋃_ρ St_G(2) · g_{τ^ρ}`` and its fixed-point profile."""
    from itertools import permutations

    d, n = G.degree, G.depth
    if n < 2:
        raise TreeRangeError("the shadow needs depth >= 2")
    st = stabilizer(G, "level", 2)
    blocks = []
    for rho in permutations(range(d)):
        g = np.asarray(lemma_generator(d, rho, n).leaf_perm, dtype=lo.DTYPE)
        blocks.append(lo.compose_rows(st.rows, g))
    rows = np.concatenate(blocks)
    if not np.all(G.contains_rows(rows)):
        raise AssertionError("shadow elements outside G")
    distinct = lo.unique_rows(rows)[0].shape[0]
    X = kernels.fixed_counts(rows, d, n)
    return ShadowReport(
        degree=d,
        depth=n,
        members=distinct,
        measure=Fraction(distinct, G.order),
        expected=Fraction(math.factorial(d - 1), d**d),
        all_equal_d=bool(np.all(X[:, 1:n] == d)),
        at_full_depth=bool(np.all(X[:, n] == d)),
    )


# ------------------------------------------------------------- martingale


@dataclass
class MartingaleVerdict:
    depth: int
    subtree_transitive: dict[int, bool]  # k -> St_G(k) transitive below every level-k vertex
    conditional: dict[int, dict[int, Fraction]]  # k -> {t: E[X_{k+1} | X_k = t]}
    note: str = ""

    @property
    def transitive(self) -> bool:
        return all(self.subtree_transitive.values())

    @property
    def identity_holds(self) -> bool:
        return all(e == t for table in self.conditional.values() for t, e in table.items())

    @property
    def holds(self) -> bool:
        return self.transitive and self.identity_holds


def martingale_criterion(G: FiniteTreeGroup) -> MartingaleVerdict:
    """Subtree transitivity of level stabilizers, then the exact martingale identity."""
    d, n = G.degree, G.depth
    trans = {}
    for k in range(n):
        st = stabilizer(G, "level", k)
        F = st.fixed_counts
        # Burnside: orbits of St_G(k) on L_j; one per level-k vertex means transitive below it
        trans[k] = all(Fraction(int(F[:, j].sum()), st.order) == d**k for j in range(k + 1, n + 1))
    cond = {}
    if all(trans.values()):
        X = G.fixed_counts
        for k in range(n):
            table = {}
            for t in np.unique(X[:, k]):
                sel = X[:, k] == t
                table[int(t)] = Fraction(int(X[sel, k + 1].sum()), int(sel.sum()))
            cond[k] = table
    return MartingaleVerdict(n, trans, cond, note=f"depth-{n} evidence")


# ------------------------------------------------------- sampler validation


@dataclass
class GoodnessOfFit:
    statistic: float
    pvalue: float
    draws: int
    cells: int

    def passed(self, alpha: float = 1e-3) -> bool:
        return self.pvalue > alpha


def sampler_gof(G: FiniteTreeGroup, source, draws: int = DEFAULT_TRIALS,
                rng: np.random.Generator | None = None) -> GoodnessOfFit:
    """Chi-square test of a sampler against the uniform law on the enumerated ``G``."""
    from scipy.stats import chisquare

    rng = np.random.default_rng(DEFAULT_SEED) if rng is None else rng
    rows = sample_rows(resolve_sampler(source, G.depth), G.depth, rng, draws)
    idx = G.locate(rows)
    if np.any(idx < 0):
        raise AssertionError(f"{int(np.sum(idx < 0))} sampled elements are outside the group")
    counts = np.bincount(idx, minlength=G.order)
    stat, p = chisquare(counts)
    return GoodnessOfFit(float(stat), float(p), draws, G.order)
