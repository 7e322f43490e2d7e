"""Numba switch.

Kernels are written once in a numba-compatible subset of Python. When
``SEEDFOLIO_DISABLE_JIT`` is set to a truthy value (or numba is missing) they
run as ordinary CPython functions, and the few kernels that have a vectorized
numpy twin dispatch to it instead.
"""
import os

try:
    import numba
except ImportError:  # pragma: no cover - numba is a hard dependency in practice
    numba = None

_FLAG = os.environ.get("SEEDFOLIO_DISABLE_JIT", "").strip().lower()
USE_NUMBA = numba is not None and _FLAG not in ("1", "true", "yes", "on")

__all__ = ["USE_NUMBA", "njit"]


def njit(f=None, **options):
    options.setdefault("cache", True)
    options.setdefault("nogil", True)
    if not USE_NUMBA:
        if f is None:
            return lambda g: g
        return f
    if f is None:
        return lambda g: numba.njit(g, **options)
    return numba.njit(f, **options)
