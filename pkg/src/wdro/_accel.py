"""Kernel compilation switch.

Hot loops are compiled with numba unless ``WDRO_DISABLE_NUMBA`` is set to a
non-empty value other than ``0`` (or numba is not importable), in which case
the pure Python/numpy implementations run instead. The choice is made once,
at import time.
"""
import os

_flag = os.environ.get("WDRO_DISABLE_NUMBA", "").strip()
_disabled = _flag not in ("", "0")

try:
    if _disabled:
        raise ImportError
    import numba
except ImportError:
    numba = None

NUMBA_ENABLED = numba is not None
BACKEND = "numba" if NUMBA_ENABLED else "numpy"


def jit(func):
    """``numba.njit`` when enabled, identity otherwise."""
    if NUMBA_ENABLED:
        return numba.njit(cache=True, nogil=True)(func)
    return func
