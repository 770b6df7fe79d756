"""Numba switch.

Set ``RML_NUMBA=0`` to run every hot kernel through its pure-numpy fallback.
Numba is optional; without it the numpy path is used regardless of the flag.
"""

from __future__ import annotations

import os

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

HAVE_NUMBA = numba is not None
USE_NUMBA = HAVE_NUMBA and os.environ.get("RML_NUMBA", "1").strip().lower() not in (
    "0",
    "false",
    "no",
    "off",
)


def njit(fn):
    if numba is None:
        return fn
    return numba.njit(cache=True, nogil=True)(fn)


def select(nb_impl, np_impl):
    return nb_impl if USE_NUMBA else np_impl


def backend() -> str:
    return "numba" if USE_NUMBA else "numpy"
