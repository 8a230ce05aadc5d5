"""Interpreted kernels: numpy plus dict-based row hashing.

Same contract as the compiled ``_kernels`` module; used when the extension
is not built.
"""

import numpy as np

from .errors import CapacityError

NAME = "python"


class RowIndex:
    """Exact set of equal-width int32 rows with stable insertion indices."""

    def __init__(self, width, rows=None):
        self.width = int(width)
        self._index = {}
        self._rows = []
        if rows is not None:
            self.add_rows(rows)

    def __len__(self):
        return len(self._rows)

    def add_rows(self, rows):
        rows = np.ascontiguousarray(rows, dtype=np.int32).reshape(-1, self.width)
        out = np.empty(rows.shape[0], dtype=np.int64)
        index = self._index
        for i, r in enumerate(rows):
            key = r.tobytes()
            pos = index.get(key)
            if pos is None:
                pos = len(self._rows)
                index[key] = pos
                self._rows.append(r.copy())
            out[i] = pos
        return out

    def lookup(self, rows):
        rows = np.ascontiguousarray(rows, dtype=np.int32).reshape(-1, self.width)
        get = self._index.get
        return np.fromiter((get(r.tobytes(), -1) for r in rows), dtype=np.int64, count=rows.shape[0])

    def rows(self):
        if not self._rows:
            return np.empty((0, self.width), dtype=np.int32)
        return np.stack(self._rows)


def closure(gens, cap):
    gens = np.ascontiguousarray(gens, dtype=np.int32)
    width = gens.shape[1]
    ident = np.arange(width, dtype=np.int32)
    known = {ident.tobytes()}
    chunks = [ident[None, :]]
    bounds = [0, 1]
    total = 1
    frontier = ident[None, :]
    while frontier.shape[0] and gens.shape[0]:
        # frontier-major, generator-minor discovery order
        cand = gens[:, frontier].transpose(1, 0, 2).reshape(-1, width)
        view = np.ascontiguousarray(cand).view(np.dtype((np.void, 4 * width))).ravel()
        _, first = np.unique(view, return_index=True)
        first.sort()
        fresh = []
        for i in first:
            key = view[i].tobytes()
            if key not in known:
                known.add(key)
                fresh.append(i)
                if total + len(fresh) > cap:
                    raise CapacityError(f"closure exceeded cap {cap}", total + len(fresh))
        if not fresh:
            break
        frontier = cand[np.asarray(fresh)]
        chunks.append(frontier)
        total += frontier.shape[0]
        bounds.append(total)
    return np.concatenate(chunks), bounds


def fixed_counts(rows, d, n):
    rows = np.atleast_2d(rows)
    out = np.empty((rows.shape[0], n + 1), dtype=np.int32)
    for k in range(n + 1):
        step = d ** (n - k)
        images = rows[:, ::step] // step
        out[:, k] = (images == np.arange(d**k)).sum(axis=1)
    return out
