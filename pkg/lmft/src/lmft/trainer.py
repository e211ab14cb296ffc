"""Fine-tune the encoder twice per experiment: ground-truth labels vs
imported GCN weak labels; test metrics are always against ground truth."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Sequence

import numpy as np
import torch
import torch.nn.functional as F

from .data import Paper, load_weak_labels
from .encoder import build_model
from .metrics import accuracy, weighted_f1
from .splits import make_split

GROUND_TRUTH = "ground-truth"


@dataclass(frozen=True)
class FinetuneConfig:
    encoder: str = "mini"
    learning_rate: float = 1e-4
    epochs: int = 30
    batch_size: int = 16
    seed: int = 0
    label_source: str = GROUND_TRUTH  # or a weak-label CSV path
    label_scope: str = "train"  # weak labels applied to train split or "all"

    def __post_init__(self):
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.label_scope not in ("train", "all"):
            raise ValueError("label_scope must be 'train' or 'all'")

    @property
    def uses_weak_labels(self) -> bool:
        return self.label_source != GROUND_TRUTH


@dataclass(frozen=True)
class SeedMetrics:
    seed: int
    accuracy: float
    weighted_f1: float


def _resolve_labels(papers: Sequence[Paper], config: FinetuneConfig):
    """Training label per paper (by scope) plus the weak-vs-truth noise ratio."""
    truth = {p.paper_id: p.label for p in papers}
    if not config.uses_weak_labels:
        return dict(truth), None
    weak = load_weak_labels(config.label_source)
    matched = {pid: cls for pid, cls in weak.items() if pid in truth}
    if not matched:
        raise ValueError(f"{config.label_source} shares no paper ids with the corpus")
    disagreements = sum(1 for pid, cls in matched.items() if cls != truth[pid])
    noise_ratio = disagreements / len(matched)
    return weak, noise_ratio


def finetune(papers: Sequence[Paper], config: FinetuneConfig) -> SeedMetrics:
    """One seeded run: split, train on the chosen label source, score on test
    against ground truth. Deterministic per seed on CPU."""
    train_idx, _val_idx, test_idx = make_split(len(papers), config.seed)
    labels, _ = _resolve_labels(papers, config)

    # Training labels come from the chosen source; test labels never do.
    trained_on = list(train_idx) if config.label_scope == "train" else list(range(len(papers)))
    if config.uses_weak_labels:
        missing = sorted(
            papers[i].paper_id for i in trained_on if papers[i].paper_id not in labels
        )
        if missing:
            raise ValueError(f"weak-label file missing ids: {missing}")

    class_names = sorted({p.label for p in papers} | set(labels.values()))
    class_id = {name: i for i, name in enumerate(class_names)}

    torch.manual_seed(config.seed)
    model, encode = build_model(config.encoder, [p.text for p in papers], len(class_names))
    optimizer = torch.optim.Adam(model.parameters(), lr=config.learning_rate)

    train_rows = list(train_idx)
    y_train = torch.tensor([class_id[labels[papers[i].paper_id]] for i in train_rows])
    order_rng = np.random.default_rng(config.seed)

    model.train()
    for _ in range(config.epochs):
        order = order_rng.permutation(len(train_rows))
        for start in range(0, len(order), config.batch_size):
            batch = order[start : start + config.batch_size]
            texts = [papers[train_rows[i]].text for i in batch]
            logits = model(encode(texts))
            loss = F.cross_entropy(logits, y_train[batch])
            optimizer.zero_grad()
            loss.backward()
            optimizer.step()

    model.eval()
    with torch.no_grad():
        logits = model(encode([papers[i].text for i in test_idx]))
        pred = logits.argmax(dim=1).tolist()
    y_test = [class_id[papers[i].label] for i in test_idx]
    return SeedMetrics(
        seed=config.seed,
        accuracy=accuracy(pred, y_test),
        weighted_f1=weighted_f1(pred, y_test),
    )


def _mean_std(values: Sequence[float]) -> dict[str, float]:
    arr = np.asarray(values, dtype=float)
    return {
        "mean": float(arr.mean()),
        "std": float(np.std(arr, ddof=1)) if len(arr) > 1 else 0.0,
    }


def finetune_multi(
    papers: Sequence[Paper], config: FinetuneConfig, seeds: Sequence[int] = (0, 1, 2)
) -> dict:
    """Report with the same per-seed / aggregate shape the evaluation module emits."""
    if not seeds:
        raise ValueError("need at least one seed")
    _, noise_ratio = _resolve_labels(papers, config)
    per_seed = []
    for seed in seeds:
        run_config = FinetuneConfig(
            encoder=config.encoder,
            learning_rate=config.learning_rate,
            epochs=config.epochs,
            batch_size=config.batch_size,
            seed=seed,
            label_source=config.label_source,
            label_scope=config.label_scope,
        )
        per_seed.append(finetune(papers, run_config))

    source_kind = "weak" if config.uses_weak_labels else GROUND_TRUTH
    config_echo = asdict(config)
    del config_echo["seed"]
    return {
        "schema_version": 1,
        "label": f"finetune ({source_kind})",
        "seeds": list(seeds),
        "per_seed": [asdict(m) for m in per_seed],
        "aggregate": {
            "accuracy": _mean_std([m.accuracy for m in per_seed]),
            "weighted_f1": _mean_std([m.weighted_f1 for m in per_seed]),
        },
        "noise_ratio": noise_ratio,
        "config": config_echo,
    }


def write_report(report: dict, path: str | Path) -> None:
    Path(path).write_text(
        json.dumps(report, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
