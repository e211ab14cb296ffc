"""Accuracy and weighted F1. Single implementation shared by every component."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .errors import ValidationError


def _as_arrays(pred: Sequence[int], truth: Sequence[int]) -> tuple[np.ndarray, np.ndarray]:
    p = np.asarray(pred)
    t = np.asarray(truth)
    if p.shape != t.shape or p.ndim != 1 or len(p) == 0:
        raise ValidationError("pred and truth must be equal-length non-empty vectors")
    return p, t


def accuracy(pred: Sequence[int], truth: Sequence[int]) -> float:
    p, t = _as_arrays(pred, truth)
    return float(np.mean(p == t))


def weighted_f1(pred: Sequence[int], truth: Sequence[int]) -> float:
    """Per-class F1 weighted by true-class support.

    A class with zero precision+recall contributes F1 = 0; classes absent from
    the truth vector carry zero weight.
    """
    p, t = _as_arrays(pred, truth)
    total = len(t)
    score = 0.0
    for cls in np.unique(t):
        tp = np.sum((p == cls) & (t == cls))
        fp = np.sum((p == cls) & (t != cls))
        fn = np.sum((p != cls) & (t == cls))
        precision = tp / (tp + fp) if tp + fp > 0 else 0.0
        recall = tp / (tp + fn) if tp + fn > 0 else 0.0
        f1 = 2 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0
        score += (tp + fn) / total * f1
    return float(score)
