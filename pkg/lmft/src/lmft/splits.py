"""The shared 60/20/20 split protocol: seeded shuffle, floor-sized cuts."""

from __future__ import annotations

import numpy as np


def make_split(n: int, seed: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    if n < 5:
        raise ValueError(f"need at least 5 records to split, got {n}")
    perm = np.random.default_rng(seed).permutation(n)
    n_train = int(np.floor(0.6 * n))
    n_val = int(np.floor(0.2 * n))
    return perm[:n_train], perm[n_train : n_train + n_val], perm[n_train + n_val :]
