"""Deterministic seed derivation.

All stochastic streams (weather, initial conditions, optional observation
noise, per-episode batch seeds) are derived from user-facing 64-bit seeds with
numpy's SeedSequence so distinct purposes get decorrelated streams while the
whole tree stays reproducible from the configured seeds.
"""

from __future__ import annotations

import numpy as np

_MASK = (1 << 64) - 1


def derive_seed(base: int, *keys: int) -> int:
    """A 64-bit seed deterministically derived from ``base`` and ``keys``."""
    entropy = [int(base) & _MASK] + [int(k) & _MASK for k in keys]
    return int(np.random.SeedSequence(entropy).generate_state(1, dtype=np.uint64)[0])


def make_rng(seed: int) -> np.random.Generator:
    """The package-wide generator flavor: PCG64 under numpy's Generator API."""
    return np.random.Generator(np.random.PCG64(seed))
