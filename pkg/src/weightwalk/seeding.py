"""Deterministic seed derivation shared by all stochastic components."""

from __future__ import annotations

import numpy as np


def derive_seed(*parts: int) -> int:
    """Map a tuple of integers to a stable 64-bit seed.

    Built on numpy's SeedSequence so derived streams are statistically
    independent; the mapping is fixed across platforms and processes.
    """
    state = np.random.SeedSequence(list(parts)).generate_state(2, np.uint32)
    return int(state[0]) | (int(state[1]) << 32)
