"""Backend selection for the hot loops.

The compiled extension is preferred; if it was not built the numpy fallback
is used.  Both expose ``RowIndex``, ``closure`` and ``fixed_counts`` with the
same results.
"""

from __future__ import annotations

import logging

from . import _fallback

logger = logging.getLogger(__name__)

try:
    from . import _kernels as _compiled
except ImportError:  # extension not built
    _compiled = None
    logger.debug("compiled kernels unavailable; using the python fallback")

_active = _compiled if _compiled is not None else _fallback


def available_backends() -> list[str]:
    return [m.NAME for m in (_compiled, _fallback) if m is not None]


def backend() -> str:
    return _active.NAME


def use_backend(name: str) -> None:
    global _active
    if name == "compiled":
        if _compiled is None:
            raise RuntimeError("compiled kernels are not built")
        _active = _compiled
    elif name == "python":
        _active = _fallback
    else:
        raise ValueError(f"unknown backend {name!r}")


def RowIndex(width, rows=None):
    return _active.RowIndex(width, rows)


def closure(gens, cap):
    return _active.closure(gens, cap)


def fixed_counts(rows, d, n):
    return _active.fixed_counts(rows, d, n)
