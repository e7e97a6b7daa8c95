"""Deterministic cross-platform random number generation.

Two generators, both with documented constants so corpora are reproducible
bit-for-bit on any platform:

* ``XorShift64Star`` -- sequential stream for shape sampling. State update
  x ^= x >> 12; x ^= x << 25; x ^= x >> 27; output x * 0x2545F4914F6CDD1D,
  all modulo 2**64. Seeds pass through one splitmix64 round so seed 0 works.
* ``splitmix64_array`` -- counter-based bulk generator (numpy uint64) for
  per-pixel noise; value i mixes (seed + (i+1) * 0x9E3779B97F4A7C15).
"""

from __future__ import annotations

import numpy as np

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB
_STAR = 0x2545F4914F6CDD1D


def splitmix64(x: int) -> int:
    x = (x + _GOLDEN) & _MASK
    x = ((x ^ (x >> 30)) * _MIX1) & _MASK
    x = ((x ^ (x >> 27)) * _MIX2) & _MASK
    return x ^ (x >> 31)


class XorShift64Star:
    """Sequential 64-bit generator; identical output for identical seeds."""

    def __init__(self, seed: int):
        self.state = splitmix64(seed & _MASK) or 0x9E3779B97F4A7C15

    def next_u64(self) -> int:
        x = self.state
        x ^= x >> 12
        x = (x ^ (x << 25)) & _MASK
        x ^= x >> 27
        self.state = x
        return (x * _STAR) & _MASK

    def randint(self, lo: int, hi: int) -> int:
        """Uniform integer in [lo, hi] via multiply-shift bounding."""
        if hi < lo:
            raise ValueError(f"empty range [{lo}, {hi}]")
        span = hi - lo + 1
        return lo + ((self.next_u64() * span) >> 64)

    def uniform(self, lo: float = 0.0, hi: float = 1.0) -> float:
        u = (self.next_u64() >> 11) * (2.0 ** -53)
        return lo + (hi - lo) * u

    def choice(self, items):
        return items[self.randint(0, len(items) - 1)]


def splitmix64_array(seed: int, count: int) -> np.ndarray:
    """Counter-based stream of ``count`` uint64 values for bulk noise."""
    with np.errstate(over="ignore"):
        idx = np.arange(1, count + 1, dtype=np.uint64)
        x = np.uint64(seed & _MASK) + idx * np.uint64(_GOLDEN)
        x = (x ^ (x >> np.uint64(30))) * np.uint64(_MIX1)
        x = (x ^ (x >> np.uint64(27))) * np.uint64(_MIX2)
        return x ^ (x >> np.uint64(31))


def gaussian_field(seed: int, shape: tuple[int, ...], sigma: float) -> np.ndarray:
    """Deterministic zero-mean Gaussian noise via Box-Muller on splitmix output."""
    count = int(np.prod(shape))
    pairs = (count + 1) // 2
    bits = splitmix64_array(seed, 2 * pairs)
    u1 = (bits[:pairs] >> np.uint64(11)).astype(np.float64) * (2.0 ** -53)
    u2 = (bits[pairs:] >> np.uint64(11)).astype(np.float64) * (2.0 ** -53)
    u1 = np.maximum(u1, 2.0 ** -53)  # avoid log(0)
    radius = np.sqrt(-2.0 * np.log(u1))
    angle = 2.0 * np.pi * u2
    normals = np.concatenate([radius * np.cos(angle), radius * np.sin(angle)])
    return sigma * normals[:count].reshape(shape)
