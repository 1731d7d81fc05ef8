"""Deterministic seed derivation and the repository-wide RNG.

All randomness in this package flows through numpy's PCG64 generator.
Replica r of an experiment with master seed s uses ``mix_seed(s, r)``,
a SplitMix64-style avalanche mix, so replica streams are independent of
execution order and worker assignment.
"""

from __future__ import annotations

import numpy as np

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def splitmix64(x: int) -> int:
    """One SplitMix64 finalizer round (Steele, Lea, Flood 2014)."""
    z = (x + _GOLDEN) & _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


def mix_seed(master_seed: int, index: int) -> int:
    """Derived 64-bit seed for replica/stream `index` under `master_seed`."""
    return splitmix64((master_seed + index * _GOLDEN) & _MASK)


def make_rng(seed: int) -> np.random.Generator:
    """The repository RNG: PCG64 behind numpy's Generator."""
    return np.random.Generator(np.random.PCG64(seed & _MASK))
