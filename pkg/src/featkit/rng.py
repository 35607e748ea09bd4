"""Seeded random streams.

Every random draw in the engine comes from a stream keyed by
``(master seed, item index)``, so parallel work items produce identical
results no matter how they are scheduled.
"""

from __future__ import annotations

import numpy as np


def master_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))


def item_rng(seed: int, index: int) -> np.random.Generator:
    """Independent stream for work item ``index`` under ``seed``."""
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(index,))
    return np.random.Generator(np.random.PCG64(ss))
