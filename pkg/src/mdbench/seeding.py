"""Deterministic seed substreams.

Every source of randomness in the package derives from an integer seed via
``substream``, so that adding work items (grid cells, trees, rows) never
shifts the random numbers consumed by existing ones.
"""

from __future__ import annotations

import numpy as np

__all__ = ["substream", "substream_seed"]

_MASK64 = (1 << 64) - 1


def _key_to_int(key) -> int:
    if isinstance(key, (int, np.integer)):
        return int(key) & _MASK64
    if isinstance(key, str):
        # FNV-1a, stable across processes (unlike hash()).
        h = 0xCBF29CE484222325
        for b in key.encode("utf-8"):
            h = ((h ^ b) * 0x100000001B3) & _MASK64
        return h
    raise TypeError(f"seed key must be int or str, got {type(key).__name__}")


def substream(seed: int, *keys) -> np.random.Generator:
    """Return a Generator for the substream of ``seed`` identified by ``keys``."""
    entropy = [_key_to_int(seed)] + [_key_to_int(k) for k in keys]
    return np.random.default_rng(np.random.SeedSequence(entropy))


def substream_seed(seed: int, *keys) -> int:
    """A 63-bit integer seed for the given substream (for non-numpy RNGs)."""
    entropy = [_key_to_int(seed)] + [_key_to_int(k) for k in keys]
    return int(np.random.SeedSequence(entropy).generate_state(1, np.uint64)[0] >> 1)
