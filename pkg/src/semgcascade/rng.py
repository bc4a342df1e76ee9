"""Counter-based random generators keyed by (seed, context) tuples, so every
component draws from an independent, platform-stable stream."""

import numpy as np

_MASK64 = (1 << 64) - 1


def philox_rng(seed, *salts):
    """Philox generator keyed by a seed plus any number of small context ints."""
    mixed = 0
    for s in salts:
        mixed = (mixed * 1000003 + int(s) + 0x9E3779B9) & _MASK64
    return np.random.Generator(np.random.Philox(key=[int(seed) & _MASK64, mixed]))
