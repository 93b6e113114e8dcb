"""Reproducible random streams.

A stream is identified by ``(seed, stream_id)``. Streams with different ids
are statistically independent (``SeedSequence`` spawn keys), so parallel
workers can each own one and still reproduce their draws bit for bit.
"""

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class RngStream:
    seed: int
    stream_id: int = 0
    path: tuple = ()

    def __post_init__(self):
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if self.stream_id < 0:
            raise ValueError("stream_id must be non-negative")

    def generator(self) -> np.random.Generator:
        """Fresh generator positioned at the start of this stream."""
        ss = np.random.SeedSequence(self.seed, spawn_key=(self.stream_id, *self.path))
        return np.random.Generator(np.random.PCG64(ss))

    def child(self, index: int) -> "RngStream":
        """Derived stream, e.g. one per portfolio or per worker."""
        return RngStream(self.seed, self.stream_id, self.path + (index,))


def as_generator(rng) -> np.random.Generator:
    """Accept an ``RngStream``, a ``Generator``, an int seed or None."""
    if isinstance(rng, RngStream):
        return rng.generator()
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)
