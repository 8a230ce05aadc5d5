"""Batch operations on automorphisms stored as leaf permutations.

Row ``r`` of an ``(N, d**n)`` int32 array is the image table of the level-``n``
leaves (lexicographic indices) under one automorphism.  Composition in the
right-action convention is ``(g h)[x] = h[g[x]]``.
"""

from __future__ import annotations

import math

import numpy as np

from .tree import Portrait, level_offset, num_labels

DTYPE = np.int32


def identity_rows(d: int, n: int, count: int = 1) -> np.ndarray:
    return np.tile(np.arange(d**n, dtype=DTYPE), (count, 1))


def as_rows(portraits, d: int, n: int) -> np.ndarray:
    rows = np.empty((len(portraits), d**n), dtype=DTYPE)
    for i, g in enumerate(portraits):
        if g.degree != d or g.depth != n:
            raise ValueError(f"portrait of shape ({g.degree}, {g.depth}) in a ({d}, {n}) batch")
        rows[i] = g.leaf_perm
    return rows


def compose_rows(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Pairwise ``a[i]`` then ``b[i]``; either side may be a single row."""
    a = np.atleast_2d(a)
    b = np.atleast_2d(b)
    if b.shape[0] == 1:
        return b[0][a]
    if a.shape[0] == 1:
        return np.take_along_axis(b, np.broadcast_to(a, b.shape), axis=1)
    return np.take_along_axis(b, a, axis=1)


def invert_rows(a: np.ndarray) -> np.ndarray:
    a = np.atleast_2d(a)
    out = np.empty_like(a)
    cols = np.broadcast_to(np.arange(a.shape[1], dtype=DTYPE), a.shape)
    np.put_along_axis(out, a.astype(np.intp), cols, axis=1)
    return out


def truncate_rows(a: np.ndarray, d: int, n: int, m: int) -> np.ndarray:
    """Action on level ``m <= n``."""
    step = d ** (n - m)
    return np.ascontiguousarray(a[:, ::step] // step)


def vertex_images(a: np.ndarray, d: int, n: int, k: int) -> np.ndarray:
    """``(N, d**k)`` images of all level-``k`` vertices."""
    return truncate_rows(a, d, n, k)


def section_rows(a: np.ndarray, d: int, n: int, level: int, vidx: int, m: int) -> np.ndarray:
    """Sections at the vertex ``vidx`` of ``level``, truncated to depth ``m``."""
    below = d ** (n - level)
    step = d ** (n - level - m)
    cols = vidx * below + np.arange(d**m) * step
    return np.ascontiguousarray((a[:, cols] % below) // step)


def labels_from_rows(a: np.ndarray, d: int, n: int) -> np.ndarray:
    """``(N, V, d)`` label table in breadth-first vertex order."""
    a = np.atleast_2d(a)
    out = np.empty((a.shape[0], num_labels(d, n), d), dtype=DTYPE)
    for k in range(n):
        off = level_offset(d, k)
        step = d ** (n - k - 1)
        for i in range(d**k):
            cols = (i * d + np.arange(d)) * step
            out[:, off + i, :] = (a[:, cols] // step) % d
    return out


def rows_from_labels(labels: np.ndarray, d: int, n: int) -> np.ndarray:
    labels = np.asarray(labels)
    x = np.arange(d**n)
    out = np.zeros((labels.shape[0], d**n), dtype=np.int64)
    for k in range(n):
        prefix = x // d ** (n - k)
        letter = (x // d ** (n - k - 1)) % d
        out += labels[:, level_offset(d, k) + prefix, letter].astype(np.int64) * d ** (n - 1 - k)
    return out.astype(DTYPE)


def label_ranks(labels: np.ndarray) -> np.ndarray:
    """Lehmer ranks of every label, shape ``(N, V)``."""
    d = labels.shape[-1]
    ranks = np.zeros(labels.shape[:-1], dtype=np.int64)
    for i in range(d):
        smaller = (labels[..., i + 1:] < labels[..., i:i + 1]).sum(axis=-1)
        ranks += smaller * math.factorial(d - 1 - i)
    return ranks


def key_order(a: np.ndarray, d: int, n: int) -> np.ndarray:
    """Indices sorting rows by canonical key (breadth-first Lehmer digits)."""
    if a.shape[0] <= 1 or n == 0:
        return np.arange(a.shape[0])
    ranks = label_ranks(labels_from_rows(a, d, n))
    return np.lexsort(ranks.T[::-1])


def row_to_portrait(row: np.ndarray, d: int, n: int) -> Portrait:
    lab = labels_from_rows(np.asarray(row)[None, :], d, n)[0]
    return Portrait._trusted(d, n, tuple(tuple(int(x) for x in p) for p in lab))


def rows_to_portraits(a: np.ndarray, d: int, n: int) -> list[Portrait]:
    lab = labels_from_rows(a, d, n)
    return [Portrait._trusted(d, n, tuple(map(tuple, row.tolist()))) for row in lab]


def unique_rows(a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """First-occurrence unique rows and the inverse map."""
    a = np.ascontiguousarray(a)
    if a.shape[0] == 0:
        return a, np.zeros(0, dtype=np.intp)
    view = a.view(np.dtype((np.void, a.dtype.itemsize * a.shape[1]))).ravel()
    _, first, inverse = np.unique(view, return_index=True, return_inverse=True)
    order = np.argsort(first)
    rank = np.empty_like(order)
    rank[order] = np.arange(order.size)
    return a[first[order]], rank[inverse.ravel()]
