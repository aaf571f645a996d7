"""Backend switch for the hot kernels.

Kernels are written as plain loop code and compiled with ``numba.njit`` when
numba is importable and ``CHEMCLIFFORD_NUMBA`` is not set to a false value
(``0``, ``false``, ``no``, ``off``). Otherwise the same functions run as
ordinary Python, and the modules that have a vectorized numpy formulation
dispatch to it instead.
"""

from __future__ import annotations

import os

_FALSE = {"0", "false", "no", "off"}


def _numba_requested() -> bool:
    return os.environ.get("CHEMCLIFFORD_NUMBA", "1").strip().lower() not in _FALSE


try:
    import numba as _numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    _numba = None

USE_NUMBA = _numba is not None and _numba_requested()
BACKEND = "numba" if USE_NUMBA else "numpy"


def kernel(fn):
    """Compile ``fn`` in nopython mode on the numba backend, else return it."""
    if USE_NUMBA:
        return _numba.njit(cache=True, nogil=True)(fn)
    return fn


def select(numba_impl, numpy_impl):
    """Pick between a compiled loop kernel and its vectorized numpy twin."""
    return numba_impl if USE_NUMBA else numpy_impl


def compiled(fn):
    """Always-compiled variant, used by benchmarks and equivalence tests.

    Falls back to the plain function when numba is missing.
    """
    if _numba is None:  # pragma: no cover
        return fn
    return _numba.njit(cache=True, nogil=True)(fn)
