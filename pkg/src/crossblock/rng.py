"""Deterministic random streams.

All randomness flows through counter-based Philox generators keyed by a
master seed plus a path of purpose tags and indices. Two consequences:

* results are identical across platforms and across any degree of
  parallelism, because stream i never depends on how streams 0..i-1 were
  scheduled;
* every resampling iteration can be recomputed in isolation from
  (seed, purpose, index).

String tags are folded to integers with crc32, which is stable across
platforms and Python versions.
"""

import zlib

import numpy as np


def _encode(part) -> int:
    if isinstance(part, str):
        return zlib.crc32(part.encode("utf-8"))
    if isinstance(part, (int, np.integer)):
        return int(part) & 0xFFFFFFFFFFFFFFFF
    raise TypeError(f"stream path parts must be str or int, got {type(part).__name__}")


def substream(seed: int, *path) -> np.random.Generator:
    """Return the Philox generator for (seed, *path)."""
    entropy = [_encode(seed)] + [_encode(p) for p in path]
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy)))


def derive_seed(seed: int, *path) -> int:
    """Derive a child integer seed for handing to a nested seeded operation."""
    entropy = [_encode(seed)] + [_encode(p) for p in path]
    return int(np.random.SeedSequence(entropy).generate_state(1, np.uint64)[0])
