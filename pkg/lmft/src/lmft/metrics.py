"""Plain-Python accuracy and weighted F1.

Independent of the classifier package; conformance vectors generated there
keep the two definitions in lockstep.
"""

from __future__ import annotations

from typing import Sequence


def accuracy(pred: Sequence[int], truth: Sequence[int]) -> float:
    if len(pred) != len(truth) or not truth:
        raise ValueError("pred and truth must be equal-length non-empty vectors")
    return sum(1 for p, t in zip(pred, truth) if p == t) / len(truth)


def weighted_f1(pred: Sequence[int], truth: Sequence[int]) -> float:
    if len(pred) != len(truth) or not truth:
        raise ValueError("pred and truth must be equal-length non-empty vectors")
    total = len(truth)
    score = 0.0
    for cls in sorted(set(truth)):
        tp = sum(1 for p, t in zip(pred, truth) if p == cls and t == cls)
        fp = sum(1 for p, t in zip(pred, truth) if p == cls and t != cls)
        fn = sum(1 for p, t in zip(pred, truth) if p != cls and t == cls)
        precision = tp / (tp + fp) if tp + fp else 0.0
        recall = tp / (tp + fn) if tp + fn else 0.0
        f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
        score += (tp + fn) / total * f1
    return score
