"""Counter-based deterministic random numbers.

Draws are a pure function of ``(seed, counter)``: the SplitMix64 finalizer is
applied to ``seed_mix + counter * GOLDEN``. The engine keys the counter by the
canonical edge id, so the passage time of an edge never depends on the order
in which the frontier is explored.
"""
import math
from typing import List

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
_C1 = 0xBF58476D1CE4E5B9
_C2 = 0x94D049BB133111EB
_INV_2_53 = 1.0 / (1 << 53)


def mix64(x: int) -> int:
    """SplitMix64 output function on a 64-bit word."""
    z = x & MASK64
    z = ((z ^ (z >> 30)) * _C1) & MASK64
    z = ((z ^ (z >> 27)) * _C2) & MASK64
    return z ^ (z >> 31)


def seed_mix(seed: int) -> int:
    """Pre-mixed stream key for a user seed (any Python int, negatives allowed)."""
    return mix64((seed & MASK64) ^ 0x5DEECE66D)


def uniform(stream: int, counter: int) -> float:
    """Uniform draw in the open interval (0, 1)."""
    z = mix64(stream + counter * GOLDEN)
    return ((z >> 11) + 0.5) * _INV_2_53


def exponential(stream: int, counter: int, rate: float) -> float:
    return -math.log(uniform(stream, counter)) / rate


def derive_seeds(base_seed: int, count: int) -> List[int]:
    """Replicate seeds; replicate ``i`` always gets the same seed whatever ``count`` is."""
    stream = seed_mix(base_seed)
    return [mix64(stream + (i + 1) * GOLDEN) >> 1 for i in range(count)]
