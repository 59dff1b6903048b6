"""Deterministic 64-bit seed derivation for independent experiment cells.

Every dataset, split, and repetition in the harness gets its own seed,
derived from the run's base seed and the cell coordinates with the
SplitMix64 finalizer.  The mixing is pure integer arithmetic on fixed-width
words, so identical inputs give identical seeds on every platform.  The
derived seeds feed ``numpy.random.default_rng`` (PCG64), which is likewise
portable.

Component encoding: ints are taken mod 2**64, floats contribute their
IEEE-754 bit pattern, and strings contribute an 8-byte BLAKE2b digest of
their UTF-8 encoding.
"""

from __future__ import annotations

import hashlib
import struct

_MASK = (1 << 64) - 1


def _splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _MASK
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK
    return x ^ (x >> 31)


def _to_word(value: int | float | str) -> int:
    if isinstance(value, bool):
        return int(value)
    if isinstance(value, int):
        return value & _MASK
    if isinstance(value, float):
        return struct.unpack("<Q", struct.pack("<d", value))[0]
    if isinstance(value, str):
        digest = hashlib.blake2b(value.encode("utf-8"), digest_size=8).digest()
        return struct.unpack("<Q", digest)[0]
    raise TypeError(f"cannot mix value of type {type(value).__name__}")


def derive_seed(*components: int | float | str) -> int:
    """Mix the given components into one 64-bit seed.

    Order-sensitive: ``derive_seed(a, b) != derive_seed(b, a)`` in general.
    """
    state = 0
    for component in components:
        state = _splitmix64(state ^ _to_word(component))
    return state
