"""Reproducible, independent random streams keyed by ``(master_seed, index...)``.

Each stream is a Philox counter-based generator whose key comes from
numpy's ``SeedSequence`` hash of the master seed and the stream index path.
Streams with distinct keys are independent, and a stream's output does not
depend on how many other streams exist or in which order they are consumed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["RngStream", "as_generator"]

_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class RngStream:
    master_seed: int
    stream_index: int | tuple[int, ...] = 0

    @property
    def key(self) -> tuple[int, ...]:
        idx = self.stream_index
        idx = (idx,) if isinstance(idx, (int, np.integer)) else tuple(idx)
        return tuple(int(i) & _MASK64 for i in idx)

    def child(self, *index: int) -> "RngStream":
        return RngStream(self.master_seed, self.key + tuple(index))

    def generator(self) -> np.random.Generator:
        seq = np.random.SeedSequence(int(self.master_seed) & _MASK64, spawn_key=self.key)
        return np.random.Generator(np.random.Philox(seq))


def as_generator(rng) -> np.random.Generator:
    """Accept an ``RngStream``, a ``Generator`` or a plain integer seed."""
    if isinstance(rng, np.random.Generator):
        return rng
    if isinstance(rng, RngStream):
        return rng.generator()
    if isinstance(rng, (int, np.integer)):
        return RngStream(int(rng)).generator()
    raise TypeError(f"cannot build a random generator from {type(rng).__name__}")
