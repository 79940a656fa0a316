"""Seed derivation.

All randomness goes through numpy's PCG64 bit generator.  The PCG64 seed for
``(seed, stream)`` is the SplitMix64 finaliser applied to
``seed + (stream + 1) * 0x9E3779B97F4A7C15 (mod 2^64)``, so replicate ``i`` of a
bootstrap or simulation depends only on ``(seed, i)`` and never on execution
order.  The derivation is part of the reproducibility contract of scenario
files and must not change between releases.
"""

import numpy as np

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def splitmix64(x: int) -> int:
    z = (x + _GOLDEN) & _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


def derive_seed(seed: int, stream: int = 0) -> int:
    return splitmix64((int(seed) + (int(stream) + 1) * _GOLDEN) & _MASK)


def rng_for(seed: int, stream: int = 0) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(derive_seed(seed, stream)))
