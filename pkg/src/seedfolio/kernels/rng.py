"""Counter-based 32-bit random numbers.

Every draw is ``mix32(key + counter * GAMMA)``, so a stream is a pure function
of its key and position. All arithmetic stays below 2**63, which keeps the
results identical between numba int64 and CPython ints (and numpy int64
arrays, for the vectorized fallbacks).
"""
import numpy as np

from .._jit import njit

MASK32 = 0xFFFFFFFF
GAMMA = 0x9E3779B9
_MUL = 0x45D9F3B
INV_2_32 = 1.0 / 4294967296.0


@njit
def mix32(x):
    x = x & MASK32
    x = x ^ (x >> 16)
    x = (x * _MUL) & MASK32
    x = x ^ (x >> 16)
    x = (x * _MUL) & MASK32
    x = x ^ (x >> 16)
    return x


@njit
def make_key(a, b, c):
    """Fold three non-negative integers into a 32-bit stream key."""
    k = mix32(a & MASK32)
    k = mix32(k ^ ((a >> 32) & MASK32))
    k = mix32((k + (b & MASK32) * 0x2545F49) & MASK32)
    k = mix32((k + (c & MASK32) * 0x1B873593) & MASK32)
    return k


@njit
def draw(key, counter):
    return mix32((key + (counter & MASK32) * GAMMA) & MASK32)


@njit
def draw_uniform(key, counter):
    return draw(key, counter) * INV_2_32


@njit
def draw_below(key, counter, n):
    # multiply-shift; n < 2**31 keeps the product inside int64
    return (draw(key, counter) * n) >> 32


def mix32_array(x):
    """Vectorized ``mix32`` over int64 arrays."""
    x = np.asarray(x, dtype=np.int64) & MASK32
    x ^= x >> 16
    x = (x * _MUL) & MASK32
    x ^= x >> 16
    x = (x * _MUL) & MASK32
    x ^= x >> 16
    return x


def draw_uniform_array(keys, counter):
    keys = np.asarray(keys, dtype=np.int64)
    return mix32_array((keys + (int(counter) & MASK32) * GAMMA) & MASK32) * INV_2_32
