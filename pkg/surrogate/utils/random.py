"""
Counter-based random streams.

Every draw in the package comes from a Philox generator keyed by the run seed
plus a tuple of integers (replicate index, stream id, ...). A given key always
yields the same stream no matter which worker consumes it or in what order.
"""
from enum import IntEnum

import numpy as np


class Stream(IntEnum):
    surrogate = 0
    error = 1
    mask = 2
    bootstrap = 3


def generator(seed: int, *keys: int) -> np.random.Generator:
    sequence = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(k) for k in keys))
    return np.random.Generator(np.random.Philox(sequence))
