# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels: open-addressing row set, BFS closure, fixed-point counts."""

import numpy as np
cimport numpy as cnp
from libc.stdint cimport int32_t, int64_t, uint32_t, uint64_t
from libc.string cimport memcmp, memcpy

from .errors import CapacityError

cnp.import_array()

NAME = "compiled"


cdef inline uint64_t _row_hash(const int32_t* row, Py_ssize_t width) noexcept nogil:
    cdef uint64_t h = 0xcbf29ce484222325ULL
    cdef Py_ssize_t i
    for i in range(width):
        h ^= <uint64_t>(<uint32_t>row[i])
        h *= 0x100000001b3ULL
    h ^= h >> 33
    h *= 0xff51afd7ed558ccdULL
    h ^= h >> 33
    return h


cdef class RowIndex:
    """Exact set of equal-width int32 rows with stable insertion indices."""

    cdef readonly Py_ssize_t width
    cdef Py_ssize_t count
    cdef object _store
    cdef int32_t[:, ::1] store
    cdef object _table
    cdef int64_t[::1] table
    cdef uint64_t mask

    def __init__(self, Py_ssize_t width, rows=None):
        self.width = width
        self.count = 0
        self._store = np.empty((64, max(width, 1)), dtype=np.int32)
        self.store = self._store
        self._table = np.full(128, -1, dtype=np.int64)
        self.table = self._table
        self.mask = 127
        if rows is not None:
            self.add_rows(rows)

    def __len__(self):
        return self.count

    cdef void _grow_store(self):
        cdef object bigger = np.empty((2 * self._store.shape[0], self._store.shape[1]), dtype=np.int32)
        bigger[:self.count] = self._store[:self.count]
        self._store = bigger
        self.store = bigger

    cdef void _grow_table(self):
        cdef Py_ssize_t size = 2 * self.table.shape[0]
        self._table = np.full(size, -1, dtype=np.int64)
        self.table = self._table
        self.mask = <uint64_t>(size - 1)
        cdef Py_ssize_t i
        cdef uint64_t slot
        for i in range(self.count):
            slot = _row_hash(&self.store[i, 0], self.width) & self.mask
            while self.table[slot] != -1:
                slot = (slot + 1) & self.mask
            self.table[slot] = i

    cdef Py_ssize_t _find(self, const int32_t* row) noexcept:
        cdef uint64_t slot = _row_hash(row, self.width) & self.mask
        cdef int64_t pos
        while True:
            pos = self.table[slot]
            if pos == -1:
                return -1 - <Py_ssize_t>slot
            if memcmp(&self.store[pos, 0], row, self.width * sizeof(int32_t)) == 0:
                return pos
            slot = (slot + 1) & self.mask

    cdef Py_ssize_t _insert(self, const int32_t* row):
        """Index of ``row``, inserting it if new (new rows get index == count-1)."""
        cdef Py_ssize_t found = self._find(row)
        if found >= 0:
            return found
        if self.count == self.store.shape[0]:
            self._grow_store()
        memcpy(&self.store[self.count, 0], row, self.width * sizeof(int32_t))
        self.table[-1 - found] = self.count
        self.count += 1
        if 2 * self.count > self.table.shape[0]:
            self._grow_table()
        return self.count - 1

    def add_rows(self, rows):
        cdef const int32_t[:, ::1] r = np.ascontiguousarray(rows, dtype=np.int32).reshape(-1, self.width)
        cdef Py_ssize_t n = r.shape[0], i
        out = np.empty(n, dtype=np.int64)
        cdef int64_t[::1] o = out
        for i in range(n):
            o[i] = self._insert(&r[i, 0])
        return out

    def lookup(self, rows):
        cdef const int32_t[:, ::1] r = np.ascontiguousarray(rows, dtype=np.int32).reshape(-1, self.width)
        cdef Py_ssize_t n = r.shape[0], i, found
        out = np.empty(n, dtype=np.int64)
        cdef int64_t[::1] o = out
        for i in range(n):
            found = self._find(&r[i, 0])
            o[i] = found if found >= 0 else -1
        return out

    def rows(self):
        return np.array(self._store[:self.count, :self.width], copy=True)


def closure(gens, Py_ssize_t cap):
    cdef const int32_t[:, ::1] g = np.ascontiguousarray(gens, dtype=np.int32)
    cdef Py_ssize_t ngen = g.shape[0], width = g.shape[1]
    cdef RowIndex index = RowIndex(width)
    index.add_rows(np.arange(width, dtype=np.int32))
    cdef int32_t[::1] cur = np.empty(width, dtype=np.int32)
    cdef int32_t[::1] buf = np.empty(width, dtype=np.int32)
    cdef Py_ssize_t lo = 0, hi = 1, i, j, x
    bounds = [0, 1]
    while lo < hi and ngen:
        for i in range(lo, hi):
            memcpy(&cur[0], &index.store[i, 0], width * sizeof(int32_t))
            for j in range(ngen):
                for x in range(width):
                    buf[x] = g[j, cur[x]]
                index._insert(&buf[0])
                if index.count > cap:
                    raise CapacityError(f"closure exceeded cap {cap}", index.count)
        lo, hi = hi, index.count
        if hi > lo:
            bounds.append(hi)
    return index.rows(), bounds


def fixed_counts(rows, int d, int n):
    cdef const int32_t[:, ::1] r = np.ascontiguousarray(np.atleast_2d(rows), dtype=np.int32)
    cdef Py_ssize_t count = r.shape[0], i, v
    out = np.zeros((count, n + 1), dtype=np.int32)
    cdef int32_t[:, ::1] o = out
    cdef int k, t
    cdef Py_ssize_t step, levelsize, c
    for i in range(count):
        step = 1
        for k in range(n, -1, -1):
            levelsize = 1
            for t in range(k):
                levelsize *= d
            c = 0
            for v in range(levelsize):
                if r[i, v * step] // step == v:
                    c += 1
            o[i, k] = c
            step *= d
    return out
