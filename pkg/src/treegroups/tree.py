"""Finite-depth automorphisms of the d-adic rooted tree.

A :class:`Portrait` of depth ``n`` stores one permutation label per internal
vertex (levels ``0 .. n-1``) in breadth-first order.  Vertices are words over
``{0, ..., d-1}``; within a level they are ordered lexicographically.

All actions are right actions: ``compose(g, h)`` applies ``g`` first, and the
permutation product ``perm_mul(p, q)`` applies ``p`` first.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

Perm = tuple[int, ...]
Vertex = tuple[int, ...]


class ShapeError(ValueError):
    """Operands disagree on degree or depth."""


class TreeRangeError(IndexError):
    """A vertex or depth lies outside the portrait."""


class PortraitParseError(ValueError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


# ---------------------------------------------------------------- permutations

def identity_perm(d: int) -> Perm:
    return tuple(range(d))


def is_perm(p: Sequence[int], d: int | None = None) -> bool:
    n = len(p) if d is None else d
    return len(p) == n and sorted(p) == list(range(n))


def perm_mul(p: Perm, q: Perm) -> Perm:
    """Product ``p·q``: apply ``p`` first, then ``q``."""
    return tuple(q[i] for i in p)


def perm_inv(p: Perm) -> Perm:
    inv = [0] * len(p)
    for i, j in enumerate(p):
        inv[j] = i
    return tuple(inv)


def cycle_power(d: int, e: int = 1) -> Perm:
    """``σ^e`` for the standard cycle ``σ: i -> i+1 mod d``."""
    return tuple((i + e) % d for i in range(d))


def perm_rank(p: Perm) -> int:
    """Lehmer rank in ``[0, d!)``; the identity has rank 0."""
    d = len(p)
    rank = 0
    for i in range(d):
        smaller = sum(1 for j in range(i + 1, d) if p[j] < p[i])
        rank += smaller * math.factorial(d - 1 - i)
    return rank


def perm_unrank(rank: int, d: int) -> Perm:
    items = list(range(d))
    out = []
    for i in range(d):
        f = math.factorial(d - 1 - i)
        q, rank = divmod(rank, f)
        out.append(items.pop(q))
    return tuple(out)


# -------------------------------------------------------------------- vertices

def level_offset(d: int, k: int) -> int:
    """Breadth-first index of the first vertex at level ``k``."""
    return (d**k - 1) // (d - 1)


def num_labels(d: int, n: int) -> int:
    return level_offset(d, n)


def vertex_index(v: Vertex, d: int) -> int:
    idx = 0
    for a in v:
        idx = idx * d + a
    return idx


def vertex_from_index(idx: int, level: int, d: int) -> Vertex:
    out = []
    for _ in range(level):
        idx, a = divmod(idx, d)
        out.append(a)
    return tuple(reversed(out))


def as_vertex(v: Sequence[int] | str, d: int) -> Vertex:
    """Coerce ``"01"`` or ``(0, 1)`` into a vertex word, checking letters."""
    word = tuple(int(c) for c in v) if isinstance(v, str) else tuple(int(a) for a in v)
    for a in word:
        if not 0 <= a < d:
            raise TreeRangeError(f"letter {a} not in alphabet of size {d}")
    return word


def level_vertices(d: int, k: int) -> list[Vertex]:
    return [vertex_from_index(i, k, d) for i in range(d**k)]


# -------------------------------------------------------------------- portraits

@dataclass(frozen=True)
class Portrait:
    """Depth-``depth`` automorphism of the ``degree``-adic tree.

    ``labels[level_offset(d, k) + i]`` is the label at the ``i``-th vertex of
    level ``k`` (lexicographic order).
    """

    degree: int
    depth: int
    labels: tuple[Perm, ...]

    def __post_init__(self):
        d = self.degree
        if d < 2:
            raise ValueError(f"degree must be >= 2, got {d}")
        if self.depth < 0:
            raise ValueError(f"depth must be >= 0, got {self.depth}")
        if len(self.labels) != num_labels(d, self.depth):
            raise ValueError(
                f"expected {num_labels(d, self.depth)} labels for depth {self.depth}, "
                f"got {len(self.labels)}")
        ident = range(d)
        for p in self.labels:
            if len(p) != d or sorted(p) != list(ident):
                raise ValueError(f"label {p!r} is not a permutation of {d} letters")

    @classmethod
    def _trusted(cls, degree: int, depth: int, labels: tuple[Perm, ...]) -> Portrait:
        obj = object.__new__(cls)
        object.__setattr__(obj, "degree", degree)
        object.__setattr__(obj, "depth", depth)
        object.__setattr__(obj, "labels", labels)
        return obj

    @classmethod
    def identity(cls, degree: int, depth: int) -> Portrait:
        e = identity_perm(degree)
        return cls._trusted(degree, depth, (e,) * num_labels(degree, depth))

    @classmethod
    def from_label_map(cls, degree: int, depth: int, labels: dict) -> Portrait:
        """Build from ``{vertex: perm}``; missing vertices get the identity."""
        out = [identity_perm(degree)] * num_labels(degree, depth)
        for v, p in labels.items():
            w = as_vertex(v, degree)
            if len(w) >= depth:
                raise TreeRangeError(f"vertex {w} is not internal at depth {depth}")
            out[level_offset(degree, len(w)) + vertex_index(w, degree)] = tuple(p)
        return cls(degree, depth, tuple(out))

    def label(self, v: Sequence[int] | str) -> Perm:
        w = as_vertex(v, self.degree)
        if len(w) >= self.depth:
            raise TreeRangeError(f"no label at level {len(w)} in a depth-{self.depth} portrait")
        return self.labels[level_offset(self.degree, len(w)) + vertex_index(w, self.degree)]

    def level_labels(self, k: int) -> tuple[Perm, ...]:
        off = level_offset(self.degree, k)
        return self.labels[off:off + self.degree**k]

    @cached_property
    def is_identity(self) -> bool:
        e = identity_perm(self.degree)
        return all(p == e for p in self.labels)

    @cached_property
    def leaf_perm(self) -> tuple[int, ...]:
        """Images of the ``d**depth`` leaves, as lexicographic indices."""
        return tuple(_level_images(self, self.depth))

    def __mul__(self, other: Portrait) -> Portrait:
        return compose(self, other)

    def __invert__(self) -> Portrait:
        return invert(self)

    def __str__(self) -> str:
        return format_portrait(self)


def _check_same_shape(g: Portrait, h: Portrait) -> None:
    if g.degree != h.degree or g.depth != h.depth:
        raise ShapeError(
            f"shape mismatch: (d={g.degree}, n={g.depth}) vs (d={h.degree}, n={h.depth})")


def _level_images(g: Portrait, k: int) -> list[int]:
    """Index of ``v^g`` for every vertex ``v`` at level ``k <= depth``."""
    d = g.degree
    images = [0]
    for level in range(k):
        off = level_offset(d, level)
        nxt = []
        for i, img in enumerate(images):
            p = g.labels[off + i]
            base = img * d
            nxt.extend(base + p[a] for a in range(d))
        images = nxt
    return images


def compose(g: Portrait, h: Portrait) -> Portrait:
    """``g`` then ``h``; the label at ``v`` is ``label_g(v) · label_h(v^g)``."""
    _check_same_shape(g, h)
    d = g.degree
    out = []
    images = [0]
    for level in range(g.depth):
        off = level_offset(d, level)
        nxt = []
        for i, img in enumerate(images):
            p = g.labels[off + i]
            q = h.labels[off + img]
            out.append(tuple(q[a] for a in p))
            base = img * d
            nxt.extend(base + p[a] for a in range(d))
        images = nxt
    return Portrait._trusted(d, g.depth, tuple(out))


def invert(g: Portrait) -> Portrait:
    d = g.degree
    out: list[Perm] = [()] * len(g.labels)
    images = [0]
    for level in range(g.depth):
        off = level_offset(d, level)
        nxt = []
        for i, img in enumerate(images):
            p = g.labels[off + i]
            out[off + img] = perm_inv(p)
            base = img * d
            nxt.extend(base + p[a] for a in range(d))
        images = nxt
    return Portrait._trusted(d, g.depth, tuple(out))


def section(g: Portrait, v: Sequence[int] | str, m: int | None = None) -> Portrait:
    """The section ``g|_v`` truncated to depth ``m`` (default: all that remains)."""
    d = g.degree
    w = as_vertex(v, d)
    if len(w) > g.depth:
        raise TreeRangeError(f"vertex of level {len(w)} below depth {g.depth}")
    if m is None:
        m = g.depth - len(w)
    if not 0 <= m <= g.depth - len(w):
        raise TreeRangeError(f"section depth {m} exceeds {g.depth - len(w)} at level {len(w)}")
    vidx = vertex_index(w, d)
    out: list[Perm] = []
    for j in range(m):
        off = level_offset(d, len(w) + j)
        start = off + vidx * d**j
        out.extend(g.labels[start:start + d**j])
    return Portrait._trusted(d, m, tuple(out))


def truncate(g: Portrait, m: int) -> Portrait:
    return section(g, (), m)


def apply_vertex(g: Portrait, v: Sequence[int] | str) -> Vertex:
    d = g.degree
    w = as_vertex(v, d)
    if len(w) > g.depth:
        raise TreeRangeError(f"vertex of level {len(w)} below depth {g.depth}")
    out = []
    idx = 0
    for level, a in enumerate(w):
        p = g.labels[level_offset(d, level) + idx]
        out.append(p[a])
        idx = idx * d + a
    return tuple(out)


def fixed_count(g: Portrait, k: int) -> int:
    """Number of level-``k`` vertices fixed by ``g``."""
    if not 0 <= k <= g.depth:
        raise TreeRangeError(f"level {k} outside 0..{g.depth}")
    return sum(1 for i, img in enumerate(_level_images(g, k)) if i == img)


def canonical_key(g: Portrait) -> bytes:
    """Breadth-first Lehmer codes packed as one base-``d!`` big-endian integer."""
    base = math.factorial(g.degree)
    value = 0
    for p in g.labels:
        value = value * base + perm_rank(p)
    width = (base ** len(g.labels) - 1).bit_length()
    return value.to_bytes((width + 7) // 8, "big")


def portrait_from_key(key: bytes, degree: int, depth: int) -> Portrait:
    base = math.factorial(degree)
    value = int.from_bytes(key, "big")
    ranks = []
    for _ in range(num_labels(degree, depth)):
        value, r = divmod(value, base)
        ranks.append(r)
    if value:
        raise ValueError("key too large for the given shape")
    labels = tuple(perm_unrank(r, degree) for r in reversed(ranks))
    return Portrait._trusted(degree, depth, labels)


# ----------------------------------------------------------------------- codec

def format_perm(p: Perm) -> str:
    if p == identity_perm(len(p)):
        return "e"
    if len(p) <= 10:
        return "".join(str(a) for a in p)
    return "(" + ",".join(str(a) for a in p) + ")"


def format_portrait(g: Portrait) -> str:
    """Compact text form.

    Children are written exactly when the node sits above the last label level
    and its subtree, the node's own label included, is not the identity.
    """
    d = g.degree
    e = identity_perm(d)
    if g.depth == 0:
        return "e"
    nontrivial = [False] * len(g.labels)
    for level in reversed(range(g.depth)):
        off = level_offset(d, level)
        child_off = level_offset(d, level + 1)
        for i in range(d**level):
            flag = g.labels[off + i] != e
            if not flag and level + 1 < g.depth:
                flag = any(nontrivial[child_off + i * d + a] for a in range(d))
            nontrivial[off + i] = flag

    def emit(level: int, i: int) -> str:
        idx = level_offset(d, level) + i
        text = format_perm(g.labels[idx])
        if level + 1 < g.depth and nontrivial[idx]:
            kids = ",".join(emit(level + 1, i * d + a) for a in range(d))
            text += "[" + kids + "]"
        return text

    return emit(0, 0)


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def skip(self) -> None:
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self) -> str:
        self.skip()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def expect(self, ch: str) -> None:
        if self.peek() != ch:
            found = self.peek() or "end of input"
            raise PortraitParseError(f"expected {ch!r}, found {found!r}", self.pos)
        self.pos += 1

    def perm(self) -> tuple[int, tuple[int, ...] | None]:
        ch = self.peek()
        start = self.pos
        if ch == "e":
            self.pos += 1
            return start, None
        if ch == "(":
            self.pos += 1
            images = [self.number()]
            while self.peek() == ",":
                self.pos += 1
                images.append(self.number())
            self.expect(")")
            return start, tuple(images)
        if ch.isdigit():
            digits = []
            while self.pos < len(self.text) and self.text[self.pos].isdigit():
                digits.append(int(self.text[self.pos]))
                self.pos += 1
            return start, tuple(digits)
        raise PortraitParseError(f"expected a permutation, found {ch or 'end of input'!r}", self.pos)

    def number(self) -> int:
        self.skip()
        start = self.pos
        while self.pos < len(self.text) and self.text[self.pos].isdigit():
            self.pos += 1
        if start == self.pos:
            raise PortraitParseError("expected a number", self.pos)
        return int(self.text[start:self.pos])

    def node(self) -> tuple:
        pos, p = self.perm()
        children = []
        if self.peek() == "[":
            self.pos += 1
            children.append(self.node())
            while self.peek() == ",":
                self.pos += 1
                children.append(self.node())
            self.expect("]")
        return (pos, p, children)


def parse_portrait(text: str, degree: int | None = None, depth: int | None = None) -> Portrait:
    """Parse the compact text form.

    ``degree`` may be omitted when some label is written explicitly; ``depth``
    defaults to the nesting depth of the text.  Subtrees written without
    children are the identity below their label.
    """
    parser = _Parser(text)
    tree = parser.node()
    if parser.peek():
        raise PortraitParseError(f"unexpected trailing {parser.peek()!r}", parser.pos)

    def scan(node, level):
        pos, p, kids = node
        found = len(p) if p is not None else None
        height = level + 1
        for kid in kids:
            kd, kh = scan(kid, level + 1)
            found = found if found is not None else kd
            height = max(height, kh)
        return found, height

    inferred_d, height = scan(tree, 0)
    d = degree if degree is not None else inferred_d
    if d is None:
        raise PortraitParseError("cannot infer degree from text; pass degree", 0)
    n = height if depth is None else depth

    e = identity_perm(d)
    labels: list[Perm] = [e] * num_labels(d, n)

    def fill(node, level, idx):
        pos, p, kids = node
        if p is not None:
            if not is_perm(p, d):
                raise PortraitParseError(f"{p!r} is not a permutation of {d} letters", pos)
            if level >= n:
                if p != e:
                    raise PortraitParseError(f"label below requested depth {n}", pos)
            else:
                labels[level_offset(d, level) + idx] = p
        if kids and len(kids) != d:
            raise PortraitParseError(f"expected {d} children, found {len(kids)}", pos)
        for a, kid in enumerate(kids):
            fill(kid, level + 1, idx * d + a)

    fill(tree, 0, 0)
    return Portrait._trusted(d, n, tuple(labels))


def product(items: Iterable[Portrait], degree: int, depth: int) -> Portrait:
    out = Portrait.identity(degree, depth)
    for g in items:
        out = compose(out, g)
    return out
