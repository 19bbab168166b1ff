"""Seeded random streams.

All randomness in the package flows through PCG64 generators created here,
so one integer seed pins an entire run: initialization, sampling, synthetic
data, the mock completion client.
"""

from __future__ import annotations

import numpy as np


def seeded_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def spawn_rngs(seed: int, n: int) -> list[np.random.Generator]:
    """n independent child streams of one seed (SeedSequence spawning)."""
    return [np.random.Generator(np.random.PCG64(s)) for s in np.random.SeedSequence(seed).spawn(n)]
