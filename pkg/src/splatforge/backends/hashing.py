"""Deterministic hashing and a tiny seeded generator.

FNV-1a (64-bit) is the content/prompt hash everywhere: trivially reproducible
in any language, which keeps mock outputs stable across processes and
platforms. SplitMix64 drives mock randomness for the same reason.
"""

from __future__ import annotations

_FNV_OFFSET = 14695981039346656037
_FNV_PRIME = 1099511628211
_MASK64 = (1 << 64) - 1


def fnv1a64(data: bytes | str) -> int:
    if isinstance(data, str):
        data = data.encode("utf-8")
    h = _FNV_OFFSET
    for byte in data:
        h ^= byte
        h = (h * _FNV_PRIME) & _MASK64
    return h


class SplitMix64:
    """Seeded 64-bit generator (Steele et al. splitmix64 constants)."""

    def __init__(self, seed: int):
        self.state = seed & _MASK64

    def next_u64(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & _MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return z ^ (z >> 31)

    def uniform(self, lo: float = 0.0, hi: float = 1.0) -> float:
        return lo + (hi - lo) * (self.next_u64() >> 11) / float(1 << 53)

    def randint(self, lo: int, hi: int) -> int:
        """Uniform integer in [lo, hi] inclusive."""
        return lo + self.next_u64() % (hi - lo + 1)


def hash01(*parts) -> float:
    """Deterministic [0, 1) value from the FNV-1a hash of the joined parts."""
    h = fnv1a64(":".join(str(p) for p in parts))
    return (h >> 11) / float(1 << 53)
