"""Seed derivation.

Every random stream in the package is addressed by ``(seed, *key)``, so the
same draws come out no matter which thread or order produces them.
"""
from __future__ import annotations

import numpy as np

MARKET = 0
PORTFOLIO = 1
PREMIA = 2
PREMIA_PORTFOLIO = 3
GRID = 4
REPLICATE = 5


def stream(seed: int, *key: int) -> np.random.Generator:
    """Independent generator for the stream ``key`` under ``seed``."""
    if seed < 0:
        raise ValueError(f"seed must be non-negative, got {seed}")
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.PCG64(ss))


def as_generator(rng) -> np.random.Generator:
    """Accept a Generator or an integer seed."""
    if isinstance(rng, np.random.Generator):
        return rng
    if rng is None:
        raise ValueError("an explicit seed or Generator is required")
    return stream(int(rng))
