"""Exact enumeration of congruence quotients and their structure.

A :class:`FiniteTreeGroup` is a finite group of depth-``n`` automorphisms held
as a block of leaf permutations (see :mod:`treegroups.leafops`).  Everything
here is exact: orders are Python ints, set comparisons are element-by-element.
Properties of an infinite group inferred from one quotient are depth-``n``
evidence only.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from . import kernels
from . import leafops as lo
from .errors import CapacityError, ContainmentError, SamplerError
from .tree import (
    Portrait,
    TreeRangeError,
    Vertex,
    as_vertex,
    canonical_key,
    cycle_power,
    identity_perm,
    level_offset,
    num_labels,
    truncate,
    vertex_from_index,
    vertex_index,
)

DEFAULT_CAP = 10**7


class FiniteTreeGroup:
    """A subgroup of ``Aut T^n`` for the ``degree``-adic tree.

    Elements are materialized lazily from ``generators`` when ``rows`` is not
    given; ``order`` may be supplied in closed form so that it is available
    without enumeration.  Instances are treated as immutable.
    """

    def __init__(self, degree: int, depth: int, rows: np.ndarray | None = None,
                 generators: Sequence[Portrait] | None = None, *, name: str = "",
                 order: int | None = None, sampler=None, cap: int = DEFAULT_CAP,
                 meta: dict | None = None):
        if rows is None and generators is None:
            raise ValueError("need rows or generators")
        self.degree = degree
        self.depth = depth
        self.generators = None if generators is None else tuple(generators)
        self.name = name
        self.cap = cap
        self.sampler = sampler
        self.meta = dict(meta or {})
        self._order = order
        self._rows = None
        self.layer_bounds: list[int] | None = None
        if rows is not None:
            rows = np.ascontiguousarray(rows, dtype=lo.DTYPE)
            rows.flags.writeable = False
            self._rows = rows
            if order is not None and order != rows.shape[0]:
                raise ValueError(f"declared order {order} != {rows.shape[0]} rows")

    def __repr__(self) -> str:
        label = f" {self.name}" if self.name else ""
        return f"<FiniteTreeGroup{label} d={self.degree} n={self.depth} order={self.order}>"

    @property
    def is_materialized(self) -> bool:
        return self._rows is not None

    @property
    def rows(self) -> np.ndarray:
        if self._rows is None:
            if self._order is not None and self._order > self.cap:
                raise CapacityError(f"{self.name or 'group'} has order {self._order} > cap {self.cap}", 0)
            rows, bounds = _closure_rows(self.generators, self.degree, self.depth, self.cap)
            rows.flags.writeable = False
            self._rows, self.layer_bounds = rows, bounds
            if self._order is not None and self._order != rows.shape[0]:
                raise AssertionError(f"closed-form order {self._order} != enumerated {rows.shape[0]}")
        return self._rows

    @property
    def order(self) -> int:
        if self._order is None:
            self._order = int(self.rows.shape[0])
        return self._order

    def __len__(self) -> int:
        return int(self.rows.shape[0])

    @cached_property
    def index(self):
        return kernels.RowIndex(self.degree**self.depth, self.rows)

    def locate(self, rows: np.ndarray) -> np.ndarray:
        """Element indices of ``rows`` (``-1`` where absent)."""
        return self.index.lookup(np.atleast_2d(rows))

    def contains_rows(self, rows: np.ndarray) -> np.ndarray:
        return self.locate(rows) >= 0

    def __contains__(self, g: Portrait) -> bool:
        if g.degree != self.degree or g.depth != self.depth:
            return False
        return bool(self.locate(np.asarray(g.leaf_perm, dtype=lo.DTYPE))[0] >= 0)

    def element(self, i: int) -> Portrait:
        return lo.row_to_portrait(self.rows[i], self.degree, self.depth)

    @cached_property
    def elements(self) -> list[Portrait]:
        return lo.rows_to_portraits(self.rows, self.degree, self.depth)

    def __iter__(self):
        return iter(self.elements)

    def keys(self) -> list[bytes]:
        return [canonical_key(g) for g in self.elements]

    @cached_property
    def fixed_counts(self) -> np.ndarray:
        """``(order, depth+1)`` table of ``X_k`` for every element."""
        out = kernels.fixed_counts(self.rows, self.degree, self.depth)
        out.flags.writeable = False
        return out

    def same_elements(self, other: FiniteTreeGroup) -> bool:
        if (self.degree, self.depth) != (other.degree, other.depth):
            return False
        if self.order != other.order:
            return False
        return bool(np.all(self.contains_rows(other.rows)))

    def __eq__(self, other) -> bool:
        if not isinstance(other, FiniteTreeGroup):
            return NotImplemented
        return self.same_elements(other)

    __hash__ = None

    def issubset(self, other: FiniteTreeGroup) -> bool:
        if (self.degree, self.depth) != (other.degree, other.depth):
            return False
        return bool(np.all(other.contains_rows(self.rows)))

    def subgroup(self, mask: np.ndarray, name: str = "", meta: dict | None = None) -> FiniteTreeGroup:
        """The elements selected by a boolean mask, in the parent's order."""
        return FiniteTreeGroup(self.degree, self.depth, self.rows[mask], name=name, meta=meta)

    def truncate(self, m: int) -> FiniteTreeGroup:
        """The quotient ``π_m`` of this group."""
        if not 0 <= m <= self.depth:
            raise TreeRangeError(f"cannot truncate depth {self.depth} to {m}")
        if m == self.depth:
            return self
        gens = None if self.generators is None else [truncate(g, m) for g in self.generators]
        rows, _ = lo.unique_rows(lo.truncate_rows(self.rows, self.degree, self.depth, m))
        return FiniteTreeGroup(self.degree, m, rows, gens, name=f"pi_{m}({self.name})" if self.name else "")

    def level_images(self, k: int) -> np.ndarray:
        return lo.vertex_images(self.rows, self.degree, self.depth, k)


def _generator_rows(generators: Sequence[Portrait], d: int, n: int) -> np.ndarray:
    rows = np.empty((len(generators), d**n), dtype=lo.DTYPE)
    for i, g in enumerate(generators):
        if g.degree != d:
            raise ValueError(f"generator of degree {g.degree} in a degree-{d} group")
        if g.depth < n:
            raise TreeRangeError(f"generator of depth {g.depth} cannot act at depth {n}")
        rows[i] = (g if g.depth == n else truncate(g, n)).leaf_perm
    return rows


def _closure_rows(generators, d: int, n: int, cap: int) -> tuple[np.ndarray, list[int]]:
    gens = _generator_rows(generators, d, n)
    rows, bounds = kernels.closure(gens, cap)
    # canonical-key order inside each BFS layer makes the result independent of generator order
    pieces = []
    for lo_, hi in zip(bounds[:-1], bounds[1:]):
        block = rows[lo_:hi]
        pieces.append(block[lo.key_order(block, d, n)])
    return np.ascontiguousarray(np.concatenate(pieces)), list(bounds)


def enumerate_closure(generators: Sequence[Portrait], depth: int | None = None,
                      cap: int = DEFAULT_CAP, *, degree: int | None = None,
                      name: str = "") -> FiniteTreeGroup:
    """Breadth-first closure of ``generators`` acting at ``depth``.

    Raises :class:`CapacityError` once more than ``cap`` elements are found.
    """
    generators = list(generators)
    if degree is None:
        if not generators:
            raise ValueError("degree is required when there are no generators")
        degree = generators[0].degree
    if depth is None:
        if not generators:
            raise ValueError("depth is required when there are no generators")
        depth = generators[0].depth
    if cap <= 0:
        raise ValueError("cap must be positive")
    gens = [g if g.depth == depth else truncate(g, depth) for g in generators]
    group = FiniteTreeGroup(degree, depth, generators=gens, name=name, cap=cap)
    group.rows  # materialize now so capacity problems surface here
    return group


def group_from_portraits(portraits: Iterable[Portrait], degree: int, depth: int,
                         name: str = "") -> FiniteTreeGroup:
    """Wrap an explicit element list, sorted by canonical key.  Closure is not checked."""
    rows = lo.as_rows(list(portraits), degree, depth)
    rows, _ = lo.unique_rows(rows)
    return FiniteTreeGroup(degree, depth, rows[lo.key_order(rows, degree, depth)], name=name)


def vertex_generators(degree: int, depth: int) -> list[Portrait]:
    """Single-vertex labels generating ``Aut T^depth``."""
    d = degree
    local = [cycle_power(d, 1)]
    if d > 2:
        swap = list(identity_perm(d))
        swap[0], swap[1] = 1, 0
        local.append(tuple(swap))
    gens = []
    e = identity_perm(d)
    for idx in range(num_labels(d, depth)):
        for p in local:
            labels = [e] * num_labels(d, depth)
            labels[idx] = p
            gens.append(Portrait._trusted(d, depth, tuple(labels)))
    return gens


def full_group(degree: int, depth: int, cap: int = DEFAULT_CAP) -> FiniteTreeGroup:
    return enumerate_closure(vertex_generators(degree, depth), depth, cap,
                             degree=degree, name=f"Aut T^{depth}")


def trivial_group(degree: int, depth: int) -> FiniteTreeGroup:
    return FiniteTreeGroup(degree, depth, lo.identity_rows(degree, depth), [], name="1")


# ----------------------------------------------------------------- sampling

class IndexSampler:
    """Uniform draws by indexing into an enumerated group."""

    kind = "index"

    def __init__(self, group: FiniteTreeGroup):
        self.group = group
        self.degree = group.degree
        self.depth = group.depth

    def sample_rows(self, rng: np.random.Generator, size: int) -> np.ndarray:
        idx = rng.integers(0, self.group.order, size=size)
        return self.group.rows[idx]


class CosetSampler:
    """Uniform subgroup element times uniform transversal element.

    ``multiplicity`` handles spanning sets in which every coset is hit the same
    number of times; a true transversal has multiplicity 1.
    """

    kind = "coset"

    def __init__(self, subgroup_sampler, transversal_rows: np.ndarray):
        self.sub = subgroup_sampler
        self.transversal = np.ascontiguousarray(transversal_rows, dtype=lo.DTYPE)
        self.degree = subgroup_sampler.degree
        self.depth = subgroup_sampler.depth

    def sample_rows(self, rng: np.random.Generator, size: int) -> np.ndarray:
        h = self.sub.sample_rows(rng, size)
        t = self.transversal[rng.integers(0, self.transversal.shape[0], size=size)]
        return lo.compose_rows(h, t)


def resolve_sampler(source, depth: int | None = None):
    """Sampler for a group, a sampler, or a spec object exposing ``sampler(depth)``."""
    if isinstance(source, FiniteTreeGroup):
        if depth is not None and depth > source.depth:
            raise TreeRangeError(f"group has depth {source.depth}, asked for {depth}")
        if source.is_materialized or source.sampler is None:
            return IndexSampler(source)
        return source.sampler
    if hasattr(source, "sample_rows"):
        return source
    if hasattr(source, "sampler"):
        if depth is None:
            raise ValueError("depth is required to sample from a spec")
        return source.sampler(depth)
    raise SamplerError(f"no validated sampler for {type(source).__name__}")


def sample_rows(source, depth: int | None, rng: np.random.Generator, size: int) -> np.ndarray:
    sampler = resolve_sampler(source, depth)
    rows = sampler.sample_rows(rng, size)
    if depth is not None and depth < sampler.depth:
        rows = lo.truncate_rows(rows, sampler.degree, sampler.depth, depth)
    return rows


def uniform_sample(source, depth: int | None = None, rng: np.random.Generator | None = None) -> Portrait:
    """One exactly uniform element of ``π_depth`` of the source."""
    rng = np.random.default_rng() if rng is None else rng
    sampler = resolve_sampler(source, depth)
    n = sampler.depth if depth is None else depth
    row = sample_rows(sampler, n, rng, 1)[0]
    return lo.row_to_portrait(row, sampler.degree, n)


# --------------------------------------------------------------- stabilizers

def _level_mask(group: FiniteTreeGroup, k: int) -> np.ndarray:
    return np.all(group.level_images(k) == np.arange(group.degree**k), axis=1)


def _rigid_vertex_mask(group: FiniteTreeGroup, v: Vertex) -> np.ndarray:
    d, n = group.degree, group.depth
    block = d ** (n - len(v))
    start = vertex_index(v, d) * block
    outside = np.r_[0:start, start + block:d**n]
    return np.all(group.rows[:, outside] == outside, axis=1)


def stabilizer(group: FiniteTreeGroup, kind: str, where: int | Sequence[int] | str) -> FiniteTreeGroup:
    """Level, vertex, rigid-vertex or rigid-level stabilizer as a subgroup.

    ``kind`` is one of ``"level"``, ``"vertex"``, ``"rigid-vertex"``,
    ``"rigid-level"``.  ``where`` is a level for the level kinds and a vertex
    otherwise.
    """
    if kind not in ("level", "vertex", "rigid-vertex", "rigid-level"):
        raise ValueError(f"unknown stabilizer kind {kind!r}")
    d, n = group.degree, group.depth
    evidence = f"depth-{n} evidence"
    if kind in ("level", "rigid-level"):
        k = int(where)
        if not 0 <= k <= n:
            raise TreeRangeError(f"level {k} outside 0..{n}")
        mask = _level_mask(group, k)
        if kind == "level":
            return group.subgroup(mask, f"St({k})")
        return _rigid_level(group, k, mask, evidence)
    v = as_vertex(where, d)
    if len(v) > n:
        raise TreeRangeError(f"vertex of level {len(v)} below depth {n}")
    if kind == "vertex":
        images = group.level_images(len(v))[:, vertex_index(v, d)]
        return group.subgroup(images == vertex_index(v, d), f"st({''.join(map(str, v))})")
    return group.subgroup(_rigid_vertex_mask(group, v), f"rist({''.join(map(str, v))})",
                              meta={"note": evidence})


def _rigid_level(group: FiniteTreeGroup, k: int, level_mask: np.ndarray, evidence: str) -> FiniteTreeGroup:
    d, n = group.degree, group.depth
    block = d ** (n - k)
    cand = group.rows[level_mask]
    keep = np.ones(cand.shape[0], dtype=bool)
    ident = np.arange(d**n, dtype=lo.DTYPE)
    for i in range(d**k):
        # the part of each candidate supported below the i-th vertex
        part = np.tile(ident, (cand.shape[0], 1))
        part[:, i * block:(i + 1) * block] = cand[:, i * block:(i + 1) * block]
        keep &= group.contains_rows(part)
    factor_orders = [int(_rigid_vertex_mask(group, vertex_from_index(i, k, d)).sum()) for i in range(d**k)]
    rows = cand[keep]
    is_direct = int(np.prod(factor_orders, dtype=object)) == rows.shape[0]
    return FiniteTreeGroup(d, n, rows, name=f"Rist({k})",
                           meta={"factor_orders": factor_orders, "is_direct": is_direct, "note": evidence})


# ------------------------------------------------------------ orbits / tests

def orbits_on_level(group: FiniteTreeGroup, k: int) -> list[tuple[Vertex, ...]]:
    """Orbit partition of level ``k``, each orbit sorted, orbits by least member."""
    d, n = group.degree, group.depth
    if not 0 <= k <= n:
        raise TreeRangeError(f"level {k} outside 0..{n}")
    images = group.level_images(k)
    seen = np.zeros(d**k, dtype=bool)
    out = []
    for v in range(d**k):
        if seen[v]:
            continue
        orbit = np.unique(images[:, v])
        seen[orbit] = True
        out.append(tuple(vertex_from_index(int(w), k, d) for w in orbit))
    return out


def is_level_transitive(group: FiniteTreeGroup) -> dict[int, bool]:
    d = group.degree
    return {k: int(np.unique(group.level_images(k)[:, 0]).size) == d**k
            for k in range(1, group.depth + 1)}


def _row_set(rows: np.ndarray):
    return kernels.RowIndex(rows.shape[1], rows)


def _same_row_sets(a: np.ndarray, b: np.ndarray) -> bool:
    a, _ = lo.unique_rows(a)
    b, _ = lo.unique_rows(b)
    if a.shape != b.shape:
        return False
    return bool(np.all(_row_set(a).lookup(b) >= 0))


def is_fractal(group: FiniteTreeGroup) -> bool:
    """Level-transitive, and every level-1 vertex stabilizer projects onto ``π_{n-1}``.

    Finite-depth surrogate: only depth-``(n-1)`` truncations are compared.
    """
    d, n = group.degree, group.depth
    if n < 2:
        raise TreeRangeError("fractality needs depth >= 2")
    if not all(is_level_transitive(group).values()):
        return False
    whole = lo.truncate_rows(group.rows, d, n, n - 1)
    for v in range(d):
        st = stabilizer(group, "vertex", (v,))
        sections = lo.section_rows(st.rows, d, n, 1, v, n - 1)
        if not _same_row_sets(sections, whole):
            return False
    return True


# ------------------------------------------------------------------- cosets

def conjugate_rows(h: np.ndarray, g: np.ndarray) -> np.ndarray:
    """``g^{-1} h g`` for each pair (either side may be one row)."""
    ginv = lo.invert_rows(g)
    return lo.compose_rows(lo.compose_rows(ginv, h), g)


@dataclass
class CosetDecomposition:
    """Right cosets ``H t`` of a subgroup in a finite group."""

    group_order: int
    subgroup_order: int
    index: int
    transversal: list[Portrait]
    transversal_rows: np.ndarray
    coset_of: np.ndarray  # coset index of every element of the ambient group
    is_normal: bool
    _group: FiniteTreeGroup = field(repr=False)

    def coset_index(self, g: Portrait) -> int:
        pos = int(self._group.locate(np.asarray(g.leaf_perm, dtype=lo.DTYPE))[0])
        if pos < 0:
            raise ContainmentError("element is not in the ambient group")
        return int(self.coset_of[pos])

    @cached_property
    def coset_map(self) -> dict[bytes, int]:
        return {canonical_key(g): int(c) for g, c in zip(self._group.elements, self.coset_of)}


def coset_decomposition(group: FiniteTreeGroup, sub: FiniteTreeGroup) -> CosetDecomposition:
    if (group.degree, group.depth) != (sub.degree, sub.depth):
        raise ContainmentError("groups act on different trees")
    if not sub.issubset(group):
        raise ContainmentError(f"{sub.name or 'subgroup'} is not contained in {group.name or 'group'}")
    coset_of = np.full(group.order, -1, dtype=np.int64)
    reps = []
    for i in range(group.order):
        if coset_of[i] >= 0:
            continue
        t = group.rows[i]
        members = group.locate(lo.compose_rows(sub.rows, t))
        coset_of[members] = len(reps)
        reps.append(i)
    trows = group.rows[reps]
    return CosetDecomposition(
        group_order=group.order,
        subgroup_order=sub.order,
        index=len(reps),
        transversal=lo.rows_to_portraits(trows, group.degree, group.depth),
        transversal_rows=trows,
        coset_of=coset_of,
        is_normal=is_normal_subgroup(group, sub, trows),
        _group=group,
    )


def is_normal_subgroup(group: FiniteTreeGroup, sub: FiniteTreeGroup,
                       transversal_rows: np.ndarray | None = None) -> bool:
    """Conjugation test over generators when both sides have them.

    Otherwise every element of the subgroup is conjugated by a right transversal,
    which is a complete check: ``G = ⋃ H t`` and ``H`` normalizes itself.
    """
    if group.generators is not None and sub.generators is not None:
        conj_by = _generator_rows(group.generators, group.degree, group.depth)
        targets = _generator_rows(sub.generators, sub.degree, sub.depth)
    else:
        if transversal_rows is None:
            transversal_rows = coset_decomposition(group, sub).transversal_rows
        conj_by = transversal_rows
        targets = sub.rows
    for g in conj_by:
        if not np.all(sub.contains_rows(conjugate_rows(targets, g))):
            return False
    return True
