"""Builders for the group families: finite-type pattern groups, ``G_H``,
the per-level product groups ``G_S``, the two-group lemma family and the
affine model on ``Z/dZ``.

Anything claimed about the infinite group is checked only at the depth that
was built.
"""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np

from . import leafops as lo
from .engine import (
    DEFAULT_CAP,
    CosetSampler,
    FiniteTreeGroup,
    IndexSampler,
    enumerate_closure,
    is_normal_subgroup,
    stabilizer,
    vertex_generators,
)
from .errors import CapacityError, PreconditionError, SamplerError
from .tree import (
    Perm,
    Portrait,
    TreeRangeError,
    cycle_power,
    identity_perm,
    level_offset,
    num_labels,
    perm_mul,
    truncate,
)

logger = logging.getLogger(__name__)

# ------------------------------------------------------------ pattern groups


class PatternSet:
    """A subgroup ``P`` of ``Aut T^D`` used as the allowed depth-``D`` windows."""

    def __init__(self, group: FiniteTreeGroup):
        if group.depth < 1:
            raise TreeRangeError("patterns need depth >= 1")
        self.group = group
        self.degree = group.degree
        self.depth = group.depth

    @classmethod
    def from_portraits(cls, portraits: Sequence[Portrait], cap: int = DEFAULT_CAP) -> PatternSet:
        """The pattern subgroup generated by ``portraits``."""
        return cls(enumerate_closure(portraits, cap=cap))

    @classmethod
    def full(cls, degree: int, depth: int = 1) -> PatternSet:
        return cls(enumerate_closure(vertex_generators(degree, depth), depth, degree=degree))

    @classmethod
    def trivial(cls, degree: int, depth: int = 1) -> PatternSet:
        return cls(FiniteTreeGroup(degree, depth, lo.identity_rows(degree, depth), []))

    def __len__(self) -> int:
        return self.group.order

    def __contains__(self, g: Portrait) -> bool:
        return g in self.group

    @cached_property
    def _tables(self):
        """Per pattern: root label, class of its depth-(D-1) truncation, classes of its child windows."""
        d, D = self.degree, self.depth
        rows = self.group.rows
        heads, cls = lo.unique_rows(lo.truncate_rows(rows, d, D, D - 1))
        index = _row_index(heads)
        child = np.stack([index.lookup(lo.section_rows(rows, d, D, 1, a, D - 1)) for a in range(d)], axis=1)
        roots = lo.truncate_rows(rows, d, D, 1)
        return heads, np.asarray(cls, dtype=np.int64), child, roots


def _row_index(rows: np.ndarray):
    from . import kernels
    return kernels.RowIndex(rows.shape[1], rows)


def pattern_order(P: PatternSet, n: int) -> int:
    """``|π_n(G_P)|`` by counting extensions, without building any element."""
    if n < P.depth:
        raise TreeRangeError(f"depth {n} is below the pattern depth {P.depth}")
    heads, cls, child, _ = P._tables
    counts = np.bincount(cls, minlength=heads.shape[0]).astype(object)
    for _ in range(P.depth, n):
        nxt = [0] * heads.shape[0]
        for c, kids in zip(cls, child):
            term = 1
            for k in kids:
                if k < 0:
                    term = 0
                    break
                term *= counts[k]
            nxt[c] += term
        counts = np.asarray(nxt, dtype=object)
    return int(sum(counts))


def pattern_group(P: PatternSet, n: int, cap: int = DEFAULT_CAP) -> FiniteTreeGroup:
    """All depth-``n`` automorphisms whose depth-``D`` windows lie in ``P``.

    Depth ``m`` is assembled from depth ``m - 1``: an element is a root label
    plus ``d`` sections, and the root window fixes which truncation class each
    section must come from.  Only extendable partial elements are ever kept.
    """
    d, D = P.degree, P.depth
    if n < D:
        raise TreeRangeError(f"depth {n} is below the pattern depth {D}")
    total = pattern_order(P, n)
    if total > cap:
        raise CapacityError(f"pattern group at depth {n} has order {total} > cap {cap}", 0)
    _, cls, child, roots = P._tables
    rows = P.group.rows
    for m in range(D + 1, n + 1):
        prev = rows
        heads_prev = lo.truncate_rows(prev, d, m - 1, D - 1)
        _, members_cls = _classify(heads_prev, P)
        members = [np.flatnonzero(members_cls == c) for c in range(int(cls.max()) + 1)]
        width = d ** (m - 1)
        blocks = []
        for root, kids in zip(roots, child):
            if np.any(kids < 0):
                continue
            choice = [members[k] for k in kids]
            if any(c.size == 0 for c in choice):
                continue
            grids = np.meshgrid(*choice, indexing="ij")
            parts = [int(root[a]) * width + prev[grids[a].ravel()] for a in range(d)]
            blocks.append(np.concatenate(parts, axis=1))
        rows = np.concatenate(blocks).astype(lo.DTYPE)
    rows = np.ascontiguousarray(rows[lo.key_order(rows, d, n)])
    return FiniteTreeGroup(d, n, rows, name=f"G_P(D={D})", meta={"pattern_depth": D})


def _classify(heads: np.ndarray, P: PatternSet) -> tuple[np.ndarray, np.ndarray]:
    pattern_heads = P._tables[0]
    ids = _row_index(pattern_heads).lookup(heads)
    return pattern_heads, ids


def windows_in_pattern(G: FiniteTreeGroup, P: PatternSet) -> bool:
    """Direct check that every depth-``D`` window of every element lies in ``P``."""
    d, n, D = G.degree, G.depth, P.depth
    for level in range(n - D + 1):
        for v in range(d**level):
            if not np.all(P.group.contains_rows(lo.section_rows(G.rows, d, n, level, v, D))):
                return False
    return True


@dataclass
class FiniteTypeVerdict:
    depth: int
    pattern_depth: int
    pattern_equal: bool  # π_n(G) equals the pattern group of π_D(G)
    branching: bool  # rigid stabilizers inside St(D-1) cover St(D-1) one level down
    note: str = ""

    @property
    def holds(self) -> bool:
        return self.pattern_equal and self.branching


def finite_type_check(G: FiniteTreeGroup, D: int) -> FiniteTypeVerdict:
    d, n = G.degree, G.depth
    if D < 1 or n < D + 1:
        raise TreeRangeError(f"need depth >= D + 1 = {D + 1}, have {n}")
    P = PatternSet(G.truncate(D))
    pattern_equal = pattern_order(P, n) == G.order and pattern_group(P, n).same_elements(G)
    st = stabilizer(G, "level", D - 1)
    target = stabilizer(G.truncate(n - 1), "level", D - 1)
    branching = True
    block = d ** (n - 1)
    for v in range(d):
        outside = np.r_[0:v * block, (v + 1) * block:d**n]
        rigid = st.rows[np.all(st.rows[:, outside] == outside, axis=1)]
        got = _row_index(lo.section_rows(rigid, d, n, 1, v, n - 1))
        if not np.all(got.lookup(target.rows) >= 0):
            branching = False
            break
    return FiniteTypeVerdict(n, D, bool(pattern_equal), branching, note=f"depth-{n} evidence")


# ---------------------------------------------------------------------- G_H


CLOSURE_CHECK_LIMIT = 4 * 10**7


def gh_group(G: FiniteTreeGroup, H: FiniteTreeGroup, require_normal: bool = True) -> FiniteTreeGroup:
    """Elements of ``G`` whose sections at any two vertices differ by ``H``.

    Two sections at levels at most ``m`` are compared after truncation to depth
    ``n - m``.  At finite depth this can only over-approximate ``π_n(G_H)``.

    With ``require_normal=False`` a non-normal ``H`` is accepted as long as
    ``π_1(H)`` is normal in ``π_1(G)``; the filtered set is then checked for
    closure pair by pair, since nothing guarantees it is a group.
    """
    d, n = G.degree, G.depth
    if (H.degree, H.depth) != (d, n):
        raise PreconditionError("G and H act on different trees")
    if not H.issubset(G):
        raise PreconditionError("H is not contained in G")
    normal = is_normal_subgroup(G, H)
    if not normal:
        if require_normal:
            raise PreconditionError("H is not normal in G")
        if not is_normal_subgroup(G.truncate(1), H.truncate(1)):
            raise PreconditionError("pi_1(H) is not normal in pi_1(G)")
    out = G.subgroup(section_filter(G, H), name="G_H", meta={"note": f"depth-{n} over-approximation", "H normal": normal})
    if not normal and not is_closed(out):
        raise PreconditionError("H is not normal in G and the section filter is not a group")
    return out


def section_filter(G: FiniteTreeGroup, H: FiniteTreeGroup) -> np.ndarray:
    """Mask of the elements of ``G`` whose sections all agree with the root modulo ``H``."""
    d, n = G.degree, G.depth
    keep = np.ones(G.order, dtype=bool)
    for m in range(n):
        k = n - m
        Hk = H.truncate(k)
        root_inv = lo.invert_rows(lo.truncate_rows(G.rows, d, n, k))
        for level in range(1, m + 1):
            for v in range(d**level):
                diff = lo.compose_rows(lo.section_rows(G.rows, d, n, level, v, k), root_inv)
                keep &= Hk.contains_rows(diff)
    return keep


def is_closed(S: FiniteTreeGroup) -> bool:
    """Exact check that a finite set of automorphisms is closed under composition."""
    if S.order**2 > CLOSURE_CHECK_LIMIT:
        raise CapacityError(f"closure check needs {S.order**2} products", S.order)
    return all(bool(np.all(S.contains_rows(lo.compose_rows(S.rows, s)))) for s in S.rows)


# ---------------------------------------------------------- G_S and lemma


def _check_cycle(sigma: Perm, d: int) -> None:
    if len(sigma) != d or sorted(sigma) != list(range(d)):
        raise ValueError(f"{sigma!r} is not a permutation of {d} letters")
    x, seen = 0, set()
    while x not in seen:
        seen.add(x)
        x = sigma[x]
    if len(seen) != d:
        raise ValueError(f"{sigma!r} is not a {d}-cycle")


def _perm_pow(p: Perm, e: int) -> Perm:
    out = identity_perm(len(p))
    for _ in range(e % len(p)):
        out = perm_mul(out, p)
    return out


@dataclass(frozen=True)
class GSSpec:
    """Per-level product group: ``⟨σ⟩`` at the root, then sibling-constant powers of ``σ``.

    Level ``0`` carries ``S_0 = ⟨σ⟩``; level ``1`` carries the diagonal copy of
    ``S_0``; every later level carries one independent diagonal copy under each
    parent.
    """

    degree: int
    sigma: Perm | None = None

    def __post_init__(self):
        if self.degree < 2:
            raise ValueError("degree must be >= 2")
        if self.sigma is None:
            object.__setattr__(self, "sigma", cycle_power(self.degree, 1))
        object.__setattr__(self, "sigma", tuple(self.sigma))
        _check_cycle(self.sigma, self.degree)

    family = "gs"

    @cached_property
    def powers(self) -> tuple[Perm, ...]:
        return tuple(_perm_pow(self.sigma, e) for e in range(self.degree))

    def factor_blocks(self, k: int) -> int:
        """Number of independent powers of ``σ`` in the level-``k`` factor."""
        return 1 if k == 0 else self.degree ** (k - 1)

    def log_order(self, n: int) -> int:
        """Exponent ``e`` with ``|π_n| = d^e``."""
        return sum(self.factor_blocks(k) for k in range(n))

    def order(self, n: int) -> int:
        return self.degree ** self.log_order(n)

    def generators(self, n: int) -> list[Portrait]:
        d = self.degree
        e = identity_perm(d)
        gens = []
        for k in range(n):
            for p in range(self.factor_blocks(k)):
                labels = [e] * num_labels(d, n)
                if k == 0:
                    labels[0] = self.sigma
                else:
                    off = level_offset(d, k)
                    for j in range(d):
                        labels[off + p * d + j] = self.sigma
                gens.append(Portrait._trusted(d, n, tuple(labels)))
        return gens

    def sampler(self, n: int) -> ProductSampler:
        return ProductSampler(self, n)

    def build(self, n: int, cap: int = DEFAULT_CAP) -> FiniteTreeGroup:
        return gs_group(self, n, cap)

    def echo(self) -> dict:
        return {"family": "gs", "degree": self.degree, "sigma": list(self.sigma)}


class ProductSampler:
    """Independent uniform factors, one per level, multiplied root first.

    The factorization is unique, so the product is exactly uniform.
    """

    kind = "product"

    def __init__(self, spec: GSSpec, depth: int):
        self.spec = spec
        self.degree = spec.degree
        self.depth = depth
        self._powers = np.asarray(spec.powers, dtype=lo.DTYPE)

    def sample_rows(self, rng: np.random.Generator, size: int) -> np.ndarray:
        d, n = self.degree, self.depth
        V = num_labels(d, n)
        out = lo.identity_rows(d, n, size)
        for k in range(n):
            labels = np.broadcast_to(np.arange(d, dtype=lo.DTYPE), (size, V, d)).copy()
            exps = rng.integers(0, d, size=(size, self.spec.factor_blocks(k)))
            if k == 0:
                labels[:, 0, :] = self._powers[exps[:, 0]]
            else:
                off = level_offset(d, k)
                per_vertex = np.repeat(exps, d, axis=1)
                labels[:, off:off + d**k, :] = self._powers[per_vertex]
            out = lo.compose_rows(out, lo.rows_from_labels(labels, d, n))
        return out


def gs_group(spec: GSSpec, n: int, cap: int = DEFAULT_CAP) -> FiniteTreeGroup:
    """``π_n(G_S)`` with closed-form order; elements are enumerated on demand."""
    if n < 1:
        raise TreeRangeError("depth must be >= 1")
    return FiniteTreeGroup(spec.degree, n, generators=spec.generators(n), name="H",
                           order=spec.order(n), sampler=spec.sampler(n), cap=cap,
                           meta={"log_order_base_d": spec.log_order(n)})


def g_tau(d: int, tau: Sequence[int], depth: int, sigma: Perm | None = None) -> Portrait:
    """Trivial root label; a vertex with last letter ``j`` carries ``σ^{tau[j]}``."""
    if len(tau) != d:
        raise ValueError(f"tau needs {d} exponents")
    powers = GSSpec(d, sigma).powers
    labels = [identity_perm(d)]
    for k in range(1, depth):
        labels.extend(powers[tau[j] % d] for _ in range(d ** (k - 1)) for j in range(d))
    return Portrait._trusted(d, depth, tuple(labels))


def lemma_generator(d: int, rho: Perm, depth: int, sigma: Perm | None = None) -> Portrait:
    """``g_{τ^ρ}`` with ``τ^ρ`` the tuple whose ``j``-th entry is ``σ^{ρ(j)+1}``.

    The exponents ``1..d`` of the one-based tuple are kept; on 0-based letters
    child ``j`` receives the power ``ρ[j] + 1``.
    """
    if sorted(rho) != list(range(d)):
        raise ValueError(f"{rho!r} is not a permutation of {d} letters")
    return g_tau(d, [rho[j] + 1 for j in range(d)], depth, sigma)


def all_taus(d: int):
    return itertools.product(range(d), repeat=d)


def lemma_order(d: int, n: int) -> int:
    """Closed form ``|π_n(G)|`` for the lemma group.

    Only the cases where the index ``[G:H]`` is known to stay ``d^{d-1}`` are
    covered: ``d = 2`` at any depth, and any ``d`` at depth ``<= 2``.
    """
    h = GSSpec(d).order(n)
    if n == 1:
        return h
    if d == 2 or n == 2:
        return h * d ** (d - 1)
    raise ValueError(f"no closed form for the lemma group with d={d} at depth {n}")


@dataclass
class LemmaGroups:
    G: FiniteTreeGroup
    H: FiniteTreeGroup
    checks: dict[str, bool] = field(default_factory=dict)


def lemma_group(d: int, depth: int, cap: int = DEFAULT_CAP, sigma: Perm | None = None) -> LemmaGroups:
    """``H = G_S`` and ``G = ⟨H, g_τ : τ ∈ S_0^d⟩`` at the given depth, with built-in checks."""
    if depth < 2:
        raise TreeRangeError("the lemma family needs depth >= 2")
    spec = GSSpec(d, sigma)
    H = gs_group(spec, depth, cap)
    taus = [g_tau(d, t, depth, spec.sigma) for t in all_taus(d)]
    G = enumerate_closure(list(H.generators) + taus, depth, cap, name="G")
    if d == 2 or depth == 2:
        G.sampler = lemma_sampler(d, depth, spec)
    checks = {
        "H normal in G": is_normal_subgroup(G, H),
        "pi_1(G) = pi_1(H)": G.truncate(1).same_elements(H.truncate(1)),
        "|pi_2(G)| = d*d^d": G.truncate(2).order == d * d**d,
    }
    failed = [k for k, ok in checks.items() if not ok]
    if failed:
        # normality of H genuinely fails for d >= 3; callers read ``checks``
        logger.warning("lemma group d=%d depth=%d: failed checks %s", d, depth, failed)
    return LemmaGroups(G, H, checks)


def lemma_sampler(d: int, depth: int, spec: GSSpec | None = None) -> CosetSampler:
    """Uniform ``h · g_τ`` over ``h ∈ π_n(H)`` and all ``τ ∈ S_0^d``.

    Exact provided every coset of ``H`` is hit by the same number of ``τ``;
    this is verified at depth 2, which decides cosets because ``St_G(2) ≤ H``.
    That containment is only available for ``d = 2`` beyond depth 2.
    """
    if d > 2 and depth > 2:
        raise SamplerError(f"no validated coset sampler for d={d} at depth {depth}")
    spec = spec or GSSpec(d)
    _check_tau_balance(d, spec)
    taus = np.stack([np.asarray(g_tau(d, t, depth, spec.sigma).leaf_perm, dtype=lo.DTYPE)
                     for t in all_taus(d)])
    return CosetSampler(spec.sampler(depth), taus)


_BALANCED: dict[tuple[int, Perm], bool] = {}


def _check_tau_balance(d: int, spec: GSSpec) -> None:
    key = (d, spec.sigma)
    if key not in _BALANCED:
        H2 = gs_group(spec, 2)
        rows = np.stack([np.asarray(g_tau(d, t, 2, spec.sigma).leaf_perm, dtype=lo.DTYPE)
                         for t in all_taus(d)])
        labels = []
        for r in rows:
            coset = lo.compose_rows(H2.rows, r)
            labels.append(coset[lo.key_order(coset, d, 2)[0]].tobytes())
        counts = {}
        for lab in labels:
            counts[lab] = counts.get(lab, 0) + 1
        _BALANCED[key] = len(set(counts.values())) == 1
    if not _BALANCED[key]:
        raise SamplerError("g_tau does not hit the cosets of H evenly")


# ------------------------------------------------------------------ affine


@dataclass(frozen=True)
class AffineMap:
    """``z ↦ a z + b`` on ``Z/dZ``."""

    a: int
    b: int
    d: int

    def __post_init__(self):
        if math.gcd(self.a, self.d) != 1:
            raise ValueError(f"{self.a} is not a unit mod {self.d}")

    @property
    def perm(self) -> Perm:
        return tuple((self.a * z + self.b) % self.d for z in range(self.d))

    @property
    def fixed_points(self) -> tuple[int, ...]:
        return tuple(z for z in range(self.d) if (self.a * z + self.b - z) % self.d == 0)

    @property
    def is_translation(self) -> bool:
        return self.a % self.d == 1 % self.d


def units(d: int) -> list[int]:
    return [a for a in range(1, d) if math.gcd(a, d) == 1] if d > 1 else []


def affine_group(d: int) -> tuple[AffineMap, ...]:
    """All ``φ(d)·d`` affine maps, ordered by ``(a, b)``."""
    if d < 2:
        raise ValueError("degree must be >= 2")
    return tuple(AffineMap(a, b, d) for a in units(d) for b in range(d))


def affine_pattern(d: int, part: str) -> PatternSet:
    if part not in ("G", "H"):
        raise ValueError(f"part must be 'G' or 'H', got {part!r}")
    maps = [m for m in affine_group(d) if part == "G" or m.is_translation]
    rows = np.asarray([m.perm for m in maps], dtype=lo.DTYPE)
    return PatternSet(FiniteTreeGroup(d, 1, rows[lo.key_order(rows, d, 1)], name=f"Aff({d})" if part == "G" else f"T({d})"))


def affine_model(d: int, depth: int, part: str = "G", cap: int = DEFAULT_CAP) -> FiniteTreeGroup:
    """Every label an affine map (``part="G"``) or a translation (``part="H"``)."""
    group = pattern_group(affine_pattern(d, part), depth, cap)
    group.name = f"Aff-model {part}"
    return group
