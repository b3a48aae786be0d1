"""Deterministic stream seeding.

Every random draw in this package flows through a ``SeedSpec``: a master
seed plus a stream index. The pair is reduced to a single 64-bit state by
a SplitMix64-style avalanche mix and that state seeds a fresh PCG64
generator. Properties we rely on:

* reproducible: the same (master_seed, stream_index) always produces the
  same generator state, on every platform, regardless of thread count;
* non-colliding: the mix is a bijection on 64-bit integers, so for a fixed
  master seed distinct stream indices give distinct states;
* cheap: deriving a stream costs a handful of integer operations, so a
  Monte Carlo run can derive one stream per replication.

Never use Python's built-in ``hash()`` here: it is salted per process and
would silently destroy reproducibility.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def splitmix64(value: int) -> int:
    """One SplitMix64 avalanche step; a bijection on 64-bit integers."""
    z = (value + _GOLDEN) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


@dataclass(frozen=True)
class SeedSpec:
    """Master seed plus a stream index identifying one independent stream."""

    master_seed: int
    stream_index: int = 0

    def __post_init__(self) -> None:
        for name in ("master_seed", "stream_index"):
            v = getattr(self, name)
            if not isinstance(v, (int, np.integer)) or isinstance(v, bool):
                raise ParameterError(f"{name} must be an integer, got {v!r}")
            if not 0 <= v < (1 << 64):
                raise ParameterError(f"{name} must be in [0, 2^64), got {v}")

    def state(self) -> int:
        """64-bit generator state derived from (master_seed, stream_index)."""
        return splitmix64(splitmix64(self.master_seed) ^ self.stream_index)

    def generator(self) -> np.random.Generator:
        """Fresh PCG64 generator for this stream."""
        return np.random.Generator(np.random.PCG64(self.state()))


def replication_stream(lambda_index: int, n_index: int, rep_index: int) -> int:
    """Stream index for one Monte Carlo replication.

    The three coordinates are packed into disjoint bit fields and avalanched,
    so distinct (lambda_index, n_index, rep_index) triples always map to
    distinct stream indices: the packing is injective and splitmix64 is a
    bijection.
    """
    if not 0 <= lambda_index < (1 << 20):
        raise ParameterError(f"lambda_index out of range: {lambda_index}")
    if not 0 <= n_index < (1 << 20):
        raise ParameterError(f"n_index out of range: {n_index}")
    if not 0 <= rep_index < (1 << 24):
        raise ParameterError(f"rep_index out of range: {rep_index}")
    packed = (lambda_index << 44) | (n_index << 24) | rep_index
    return splitmix64(packed)
