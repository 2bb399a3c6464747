"""
Keyed random streams.

Every trial owns an independent counter-based generator derived from (seed, trial),
so a trial draws the same numbers whichever worker runs it and in whatever order.
"""

import numpy as np

MAX_SEED = 2**64


def check_seed(seed: int) -> int:
    if not 0 <= seed < MAX_SEED:
        raise ValueError(f"Seed must be an unsigned 64-bit integer, got {seed}.")
    return seed


def trial_stream(seed: int, trial: int) -> np.random.Generator:
    if trial < 0:
        raise ValueError(f"Trial index must be non-negative, got {trial}.")
    key = np.random.SeedSequence(entropy=check_seed(seed), spawn_key=(trial,))
    return np.random.Generator(np.random.Philox(key))
