"""Deterministic counter-based random numbers (splitmix64).

All randomness in the library (random time meshes, random initial data)
flows through this generator so that runs are reproducible bit-for-bit
across platforms for a fixed 64-bit seed.  The algorithm is the standard
splitmix64 mixer: the state advances by the golden-gamma constant and each
output is finalized with two xor-shift-multiply rounds.
"""

from __future__ import annotations

_MASK = 0xFFFFFFFFFFFFFFFF
_GAMMA = 0x9E3779B97F4A7C15


class SplitMix64:
    """64-bit splitmix generator with uniform float output."""

    def __init__(self, seed: int):
        self.state = seed & _MASK

    def next_u64(self) -> int:
        self.state = (self.state + _GAMMA) & _MASK
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
        return z ^ (z >> 31)

    def uniform(self) -> float:
        """Uniform draw in the open interval (0, 1)."""
        return ((self.next_u64() >> 11) + 0.5) * 2.0**-53

    def uniform_sym(self) -> float:
        """Uniform draw in (-1, 1)."""
        return 2.0 * self.uniform() - 1.0
