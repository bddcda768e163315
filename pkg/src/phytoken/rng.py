"""Portable deterministic random streams.

Streams are built on splitmix64.  A stream key is derived by folding integer
components (plant seed, an organ-kind tag, then the organ path) through the
splitmix64 finalizer::

    key(c0, c1, ...) = mix(... mix(mix(0 ^ mix(c0)) ^ mix(c1)) ...)

so every organ gets an independent stream that depends only on the plant seed
and the organ's position in the tree, never on generation order.  This makes
parallel generation bit-identical to serial generation on every platform.
"""

from __future__ import annotations

import math

_MASK = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15


def mix64(z: int) -> int:
    """splitmix64 finalizer."""
    z = (z + _GAMMA) & _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


def derive_key(*components: int) -> int:
    key = 0
    for c in components:
        key = mix64(key ^ mix64(c & _MASK))
    return key


class Stream:
    """A seedable 64-bit stream with uniform and normal draws."""

    __slots__ = ("_state",)

    def __init__(self, *components: int):
        self._state = derive_key(*components)

    def next_u64(self) -> int:
        self._state = (self._state + _GAMMA) & _MASK
        z = self._state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
        return z ^ (z >> 31)

    def random(self) -> float:
        """Uniform float in [0, 1) with 53-bit resolution."""
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))

    def uniform(self, low: float, high: float) -> float:
        return low + (high - low) * self.random()

    def normal(self, mean: float, sd: float) -> float:
        """Box-Muller; consumes two draws."""
        u1 = ((self.next_u64() >> 11) + 1) * (1.0 / ((1 << 53) + 1))
        u2 = self.random()
        return mean + sd * math.sqrt(-2.0 * math.log(u1)) * math.cos(2.0 * math.pi * u2)
