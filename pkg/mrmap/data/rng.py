"""Seeded, counter-based random streams.

Every random draw in mrmap comes from a :class:`RngStream` identified by a
(seed, stream-id) pair.  The bit generator is numpy's Philox, a counter-based
generator keyed directly by the pair, so streams are independent of one
another and of the order in which they are consumed.  Normal variates use
``Generator.standard_normal`` (ziggurat) on that bit generator.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_U64 = (1 << 64) - 1
_INDEX_BITS = 32


@dataclass(frozen=True)
class RngStream:
    """A (seed, stream-id) pair; identical pairs give identical sequences."""

    seed: int
    stream_id: int = 0

    def __post_init__(self) -> None:
        if not (0 <= self.seed <= _U64) or not (0 <= self.stream_id <= _U64):
            raise ValueError("seed and stream_id must be 64-bit unsigned values")

    def generator(self) -> np.random.Generator:
        """Return a fresh generator positioned at the start of the stream."""
        key = np.array([self.seed, self.stream_id], dtype=np.uint64)
        return np.random.Generator(np.random.Philox(key=key))


def datum_stream(seed: int, epoch: int, index: int) -> RngStream:
    """Stream for datum *index* in *epoch*; independent of batch composition."""
    if epoch < 0 or index < 0 or index >= (1 << _INDEX_BITS):
        raise ValueError(f"invalid epoch/index pair ({epoch}, {index})")
    return RngStream(seed, ((epoch + 1) << _INDEX_BITS) | index)
