"""Kernel dispatch: numba-jitted loops by default, interpreter/numpy fallback on demand.

Set ``AECOLOR_NO_NUMBA=1`` to run every kernel without JIT compilation. Modules
that own a vectorized numpy variant of a kernel switch on `NUMBA_ENABLED` at
import time; kernels without a vectorized form fall back to the identical
algorithm run by the interpreter (same results, slower).
"""

from __future__ import annotations

import os

NUMBA_ENABLED = os.environ.get("AECOLOR_NO_NUMBA", "0") not in ("1", "true", "yes")

if NUMBA_ENABLED:
    try:
        from numba import njit as _njit
    except ImportError:  # pragma: no cover
        NUMBA_ENABLED = False

if NUMBA_ENABLED:

    def kernel(func):
        return _njit(cache=True)(func)

else:

    def kernel(func):
        func.py_func = func  # mirror numba's attribute so tests can reach it
        return func
