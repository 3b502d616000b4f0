"""Deterministic random number generation.

Everything stochastic in this package (bootstrap draws, feature subsampling,
synthetic corpus construction) runs off splitmix64 streams keyed by a 64-bit
master seed and a textual label, so that any run is exactly reproducible from
``(seed, label)`` alone — across platforms, process counts, and repetitions.
"""

from __future__ import annotations

import numpy as np

_GOLDEN = 0x9E3779B97F4A7C15
_MASK = 0xFFFFFFFFFFFFFFFF

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3


def mix64(z: int) -> int:
    """splitmix64 output function: finalizing mix of a 64-bit state word."""
    z &= _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return (z ^ (z >> 31)) & _MASK


def fnv1a64(label: str) -> int:
    """FNV-1a hash of a label string (UTF-8 bytes), 64-bit."""
    h = _FNV_OFFSET
    for byte in label.encode("utf-8"):
        h = ((h ^ byte) * _FNV_PRIME) & _MASK
    return h


def derive_seed(master_seed: int, label: str) -> int:
    """Sub-stream seed: master seed XORed with the FNV-1a hash of the label."""
    return (int(master_seed) & _MASK) ^ fnv1a64(label)


class SplitMix64Stream:
    """Sequential splitmix64 generator.

    The stream is counter-based: output i equals ``mix64(seed + (i+1)*GOLDEN)``,
    so block generation (`uint64s`) and one-at-a-time generation (`next_uint64`)
    interleave freely and always agree.
    """

    def __init__(self, seed: int):
        self.seed = int(seed) & _MASK
        self._count = 0

    def next_uint64(self) -> int:
        self._count += 1
        return mix64((self.seed + self._count * _GOLDEN) & _MASK)

    def uint64s(self, n: int) -> np.ndarray:
        """Next `n` outputs as a uint64 array (vectorized)."""
        idx = np.arange(self._count + 1, self._count + n + 1, dtype=np.uint64)
        self._count += n
        state = np.uint64(self.seed) + idx * np.uint64(_GOLDEN)
        z = state  # wraps mod 2**64 by uint64 arithmetic
        z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
        return z ^ (z >> np.uint64(31))

    def randint(self, low: int, high: int) -> int:
        """Integer in [low, high] inclusive, via modulo reduction."""
        if high < low:
            raise ValueError(f"empty range [{low}, {high}]")
        return low + self.next_uint64() % (high - low + 1)

    def uniforms(self, n: int) -> np.ndarray:
        """`n` doubles in (0, 1]: top 53 bits of each output, shifted into (0,1]."""
        bits = self.uint64s(n) >> np.uint64(11)
        return (bits.astype(np.float64) + 1.0) * 2.0**-53

    def normals(self, n: int) -> np.ndarray:
        """`n` standard-normal doubles via Box-Muller on stream uniforms."""
        m = (n + 1) // 2
        u1 = self.uniforms(m)
        u2 = self.uniforms(m)
        radius = np.sqrt(-2.0 * np.log(u1))
        theta = 2.0 * np.pi * u2
        out = np.empty(2 * m)
        out[0::2] = radius * np.cos(theta)
        out[1::2] = radius * np.sin(theta)
        return out[:n]
