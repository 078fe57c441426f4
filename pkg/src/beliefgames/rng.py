"""Deterministic random number generation.

Everything seeded in this package flows through SplitMix64 so that results
are reproducible across runs, processes and the compiled/pure search
backends (which implement the identical generator). The stdlib
``random.Random`` is avoided on purpose: its sequence is not practical to
mirror in C.
"""

from __future__ import annotations

_MASK64 = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB
_TAG = 0xD1342543DE82EF95


def mix64(z: int) -> int:
    """SplitMix64 finalizer: a 64-bit bijective scrambler."""
    z &= _MASK64
    z = ((z ^ (z >> 30)) * _MIX1) & _MASK64
    z = ((z ^ (z >> 27)) * _MIX2) & _MASK64
    return z ^ (z >> 31)


def derive_seed(seed: int, *indices: int) -> int:
    """Derive a child seed from a master seed and an index path.

    Used to hand independent, reproducible streams to determinizations,
    playout batches, search trees, seats and matches: the same
    (seed, indices) always yields the same child.
    """
    s = seed & _MASK64
    for ix in indices:
        s = mix64((s + _GAMMA) ^ ((ix & _MASK64) * _TAG & _MASK64))
    return s


class SplitMix64:
    """Sequential SplitMix64 stream."""

    __slots__ = ("state",)

    def __init__(self, seed: int):
        self.state = seed & _MASK64

    def next_u64(self) -> int:
        self.state = (self.state + _GAMMA) & _MASK64
        return mix64(self.state)

    def below(self, n: int) -> int:
        """Uniform integer in [0, n). The modulo bias is negligible for
        the tiny ranges used here and keeps the C mirror trivial."""
        return self.next_u64() % n

    def uniform(self) -> float:
        """Uniform float in [0, 1)."""
        return self.next_u64() / 18446744073709551616.0

    def shuffle(self, items: list) -> None:
        """In-place Fisher-Yates shuffle."""
        for i in range(len(items) - 1, 0, -1):
            j = self.below(i + 1)
            items[i], items[j] = items[j], items[i]

    def choice(self, items):
        return items[self.below(len(items))]
