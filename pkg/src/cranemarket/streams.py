"""Counter-based random streams.

Every stream is keyed by ``(seed, *counters)`` so a draw depends only on its
logical position (replica, row, path, ...) and never on iteration order or on
how work is split across workers.
"""

import numpy as np

MAX_SEED = 2**64 - 1


def check_seed(seed):
    if isinstance(seed, bool) or not isinstance(seed, (int, np.integer)):
        raise TypeError(f"seed must be an integer, got {type(seed).__name__}")
    seed = int(seed)
    if not 0 <= seed <= MAX_SEED:
        raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
    return seed


def stream(seed, *counters):
    """Return an independent Philox generator for the given counter tuple."""
    seq = np.random.SeedSequence(entropy=check_seed(seed), spawn_key=tuple(int(c) for c in counters))
    return np.random.Generator(np.random.Philox(seq))


def normals(seed, counters, size):
    """Standard normals from the stream at ``counters``."""
    return stream(seed, *counters).standard_normal(size)
