"""Deterministic derivation of independent 64-bit seed streams.

All randomized operations in this package take an explicit integer seed and
feed it to ``numpy.random.default_rng`` (PCG64), the single seeded generator
used across the repository.  Sub-streams (per trie level, per repetition,
per noise source) are derived with :func:`derive_seed`, which mixes the base
seed and a stream index through the splitmix64 finalizer so that nearby
indices yield statistically unrelated streams.
"""

from __future__ import annotations

_MASK64 = (1 << 64) - 1


def splitmix64(x: int) -> int:
    """One splitmix64 finalizer step; maps 64-bit ints to 64-bit ints."""
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


def derive_seed(base_seed: int, stream: int) -> int:
    """Derive the seed for sub-stream ``stream`` of ``base_seed``.

    Computed as splitmix64(base xor splitmix64(stream)), so stream 0 is not
    the identity and distinct (base, stream) pairs collide only by accident.
    """
    return splitmix64((base_seed & _MASK64) ^ splitmix64(stream & _MASK64))
