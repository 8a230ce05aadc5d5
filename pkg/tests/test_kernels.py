import numpy as np
import pytest

from treegroups import kernels
from treegroups.constructions import GSSpec
from treegroups.engine import _generator_rows, vertex_generators
from treegroups.errors import CapacityError


@pytest.fixture(params=kernels.available_backends())
def backend(request):
    before = kernels.backend()
    kernels.use_backend(request.param)
    yield request.param
    kernels.use_backend(before)


def _reference():
    with_python = kernels.backend()
    kernels.use_backend("python")
    try:
        gens = _generator_rows(GSSpec(3).generators(3), 3, 3)
        return gens, kernels.closure(gens, 10**6)
    finally:
        kernels.use_backend(with_python)


def test_compiled_backend_is_available():
    assert "compiled" in kernels.available_backends()


def test_closure_identical_across_backends(backend):
    gens, (ref_rows, ref_bounds) = _reference()
    rows, bounds = kernels.closure(gens, 10**6)
    assert np.array_equal(rows, ref_rows)
    assert list(bounds) == list(ref_bounds)
    assert rows.shape[0] == GSSpec(3).order(3)


def test_closure_cap(backend):
    gens = _generator_rows(vertex_generators(2, 3), 2, 3)
    with pytest.raises(CapacityError) as info:
        kernels.closure(gens, 100)
    assert info.value.partial_size > 100


def test_row_index_lookup(backend, rng):
    gens = _generator_rows(vertex_generators(3, 2), 3, 2)
    rows, _ = kernels.closure(gens, 10**6)
    index = kernels.RowIndex(rows.shape[1], rows)
    assert len(index) == 1296
    probe = rows[rng.integers(0, 1296, 500)]
    assert np.array_equal(rows[index.lookup(probe)], probe)
    missing = np.zeros((1, rows.shape[1]), dtype=np.int32)
    assert index.lookup(missing)[0] == -1


def test_fixed_counts_agree(backend, rng):
    gens = _generator_rows(vertex_generators(2, 4), 2, 4)
    rows, _ = kernels.closure(gens, 10**6)
    got = kernels.fixed_counts(rows, 2, 4)
    kernels.use_backend("python")
    assert np.array_equal(got, kernels.fixed_counts(rows, 2, 4))
