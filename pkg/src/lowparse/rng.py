"""Named, seed-derived random streams.

Every random decision in the package draws from a generator keyed by
``(seed, name, *indices)`` so that one component's consumption never
shifts another's, and per-sentence work can run in any order.
"""
from __future__ import annotations

import zlib

import numpy as np


def stream(seed: int, name: str, *indices: int) -> np.random.Generator:
    key = (zlib.crc32(name.encode("utf-8")),) + tuple(int(i) for i in indices)
    return np.random.Generator(
        np.random.PCG64(np.random.SeedSequence(int(seed) & (2**64 - 1), spawn_key=key))
    )


def torch_seed(seed: int, name: str, *indices: int) -> int:
    return int(stream(seed, name, *indices).integers(0, 2**62))
