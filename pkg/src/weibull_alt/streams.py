"""Counter-based random streams keyed by integer tuples.

Every Monte Carlo draw in the package comes from a Philox generator whose key
is ``(seed, *indices)``.  A replication therefore sees the same numbers no
matter which worker runs it or in what order.
"""

from __future__ import annotations

import numpy as np

SEED_MAX = 2**64 - 1

# Fixed stream tags so that different consumers never share a key.
TAG_DATA = 1
TAG_STRESS = 2
TAG_BOOTSTRAP = 3


def check_seed(seed: int) -> int:
    if isinstance(seed, bool) or not isinstance(seed, (int, np.integer)):
        raise ValueError(f"seed must be an integer, got {seed!r}")
    seed = int(seed)
    if not 0 <= seed <= SEED_MAX:
        raise ValueError(f"seed must lie in [0, 2**64), got {seed}")
    return seed


def stream(seed: int, *key: int) -> np.random.Generator:
    """Independent generator for ``(seed, *key)``."""
    ss = np.random.SeedSequence([check_seed(seed), *(int(k) for k in key)])
    return np.random.Generator(np.random.Philox(ss))


def as_generator(rng) -> np.random.Generator:
    """Accept either a ready generator or an integer seed."""
    if isinstance(rng, np.random.Generator):
        return rng
    return stream(rng)
