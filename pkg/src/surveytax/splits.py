"""Seeded 60/20/20 splits over labeled paper nodes."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError


@dataclass(frozen=True)
class SplitSpec:
    """Unstratified shuffle split; sizes are floor(frac * n), remainder to test."""

    train_frac: float = 0.6
    val_frac: float = 0.2
    test_frac: float = 0.2
    seed: int = 0

    def __post_init__(self):
        total = self.train_frac + self.val_frac + self.test_frac
        if abs(total - 1.0) > 1e-9:
            raise ValidationError(f"split fractions must sum to 1, got {total}")
        if min(self.train_frac, self.val_frac, self.test_frac) <= 0:
            raise ValidationError("all split fractions must be positive")


@dataclass(frozen=True)
class Split:
    train: np.ndarray
    val: np.ndarray
    test: np.ndarray


def make_split(n_labeled: int, spec: SplitSpec) -> Split:
    """Shuffle positions 0..n-1 with the given seed and cut by floor arithmetic."""
    if n_labeled < 5:
        raise ValidationError(f"need at least 5 labeled nodes to split, got {n_labeled}")
    perm = np.random.default_rng(spec.seed).permutation(n_labeled)
    n_train = int(np.floor(spec.train_frac * n_labeled))
    n_val = int(np.floor(spec.val_frac * n_labeled))
    split = Split(
        train=perm[:n_train],
        val=perm[n_train : n_train + n_val],
        test=perm[n_train + n_val :],
    )
    if min(len(split.train), len(split.val), len(split.test)) == 0:
        raise ValidationError("split produced an empty part; use more nodes")
    return split
