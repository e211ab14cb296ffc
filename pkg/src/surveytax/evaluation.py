"""Multi-seed experiment runner and mean(std) report emission.

Mirrors the evaluation protocol used throughout: 60/20/20 random splits,
seeds 0..4, accuracy and weighted F1 reported as mean with sample standard
deviation.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .corpus import PaperRecord, Taxonomy
from .errors import ValidationError
from .gcn import TrainConfig, TrainRun, train
from .graphs import (
    AttributedGraph,
    GraphStats,
    build_co_author_graph,
    build_co_category_graph,
    build_text_graph,
    graph_stats,
)
from .metrics import accuracy, weighted_f1  # re-exported as the metric surface
from .splits import SplitSpec, make_split  # noqa: F401  (part of the public API)

GRAPH_KINDS = ("text", "coauthor", "cocategory")

# Text graphs train with a higher rate than the paper-paper graphs.
DEFAULT_LEARNING_RATES = {"text": 2e-2, "coauthor": 1e-2, "cocategory": 1e-2}

DEFAULT_SEEDS = (0, 1, 2, 3, 4)


@dataclass(frozen=True)
class SeedResult:
    seed: int
    accuracy: float
    weighted_f1: float


@dataclass(frozen=True)
class EvalReport:
    """Per-seed test metrics plus mean(std) aggregation and graph statistics."""

    label: str
    graph_kind: str
    removed_categories: tuple[str, ...]
    seeds: tuple[int, ...]
    per_seed: tuple[SeedResult, ...]
    stats: GraphStats
    config: dict

    def _agg(self, values: Sequence[float]) -> dict[str, float]:
        arr = np.asarray(values, dtype=float)
        std = float(np.std(arr, ddof=1)) if len(arr) > 1 else 0.0
        return {"mean": float(arr.mean()), "std": std}

    @property
    def aggregate(self) -> dict[str, dict[str, float]]:
        return {
            "accuracy": self._agg([r.accuracy for r in self.per_seed]),
            "weighted_f1": self._agg([r.weighted_f1 for r in self.per_seed]),
        }

    def to_json_dict(self) -> dict:
        return {
            "schema_version": 1,
            "label": self.label,
            "graph_kind": self.graph_kind,
            "removed_categories": list(self.removed_categories),
            "seeds": list(self.seeds),
            "per_seed": [
                {"seed": r.seed, "accuracy": r.accuracy, "weighted_f1": r.weighted_f1}
                for r in self.per_seed
            ],
            "aggregate": self.aggregate,
            "graph": self.stats.to_json_dict(),
            "config": self.config,
        }


def row_label(graph_kind: str, removed_categories: Sequence[str]) -> str:
    if removed_categories:
        return f"{graph_kind} (Rm {', '.join(sorted(removed_categories))})"
    return f"{graph_kind} (All)"


def build_graph(
    records: Sequence[PaperRecord],
    graph_kind: str,
    taxonomy: Taxonomy,
    removed_categories: frozenset[str] | set[str] = frozenset(),
    window_size: int = 20,
) -> AttributedGraph:
    if graph_kind == "text":
        return build_text_graph(records, taxonomy, window_size=window_size)
    if graph_kind == "coauthor":
        return build_co_author_graph(records, taxonomy)
    if graph_kind == "cocategory":
        return build_co_category_graph(records, taxonomy, removed_categories)
    raise ValidationError(f"unknown graph kind {graph_kind!r}; expected one of {GRAPH_KINDS}")


def run_experiment(
    records: Sequence[PaperRecord],
    graph_kind: str,
    taxonomy: Taxonomy,
    removed_categories: frozenset[str] | set[str] = frozenset(),
    seeds: Sequence[int] = DEFAULT_SEEDS,
    base_config: TrainConfig | None = None,
    window_size: int = 20,
    on_run: Callable[[int, TrainRun], None] | None = None,
) -> EvalReport:
    """Build the graph once (builders are deterministic), train per seed,
    aggregate the test metrics."""
    if not seeds:
        raise ValidationError("need at least one seed")
    graph = build_graph(records, graph_kind, taxonomy, removed_categories, window_size)
    if base_config is None:
        base_config = TrainConfig(learning_rate=DEFAULT_LEARNING_RATES[graph_kind])

    per_seed = []
    for seed in seeds:
        config = TrainConfig(
            learning_rate=base_config.learning_rate,
            epochs=base_config.epochs,
            seed=seed,
            hidden=base_config.hidden,
            dropout_rate=base_config.dropout_rate,
            adam_beta1=base_config.adam_beta1,
            adam_beta2=base_config.adam_beta2,
            adam_eps=base_config.adam_eps,
            select=base_config.select,
        )
        run = train(graph, config, taxonomy)
        if on_run is not None:
            on_run(seed, run)
        per_seed.append(
            SeedResult(
                seed=seed,
                accuracy=run.final_metrics["test"]["accuracy"],
                weighted_f1=run.final_metrics["test"]["weighted_f1"],
            )
        )

    config_echo = {
        "learning_rate": base_config.learning_rate,
        "epochs": base_config.epochs,
        "hidden": base_config.hidden,
        "dropout_rate": base_config.dropout_rate,
        "select": base_config.select,
        "window_size": window_size,
    }
    return EvalReport(
        label=row_label(graph_kind, removed_categories),
        graph_kind=graph_kind,
        removed_categories=tuple(sorted(removed_categories)),
        seeds=tuple(seeds),
        per_seed=tuple(per_seed),
        stats=graph_stats(graph),
        config=config_echo,
    )


def write_report_json(reports: Sequence[EvalReport], path: str | Path) -> None:
    payload = {
        "schema_version": 1,
        "reports": [r.to_json_dict() for r in reports],
    }
    Path(path).write_text(
        json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )


def write_report_csv(reports: Sequence[EvalReport], path: str | Path) -> None:
    """Flat table mirroring the mean(std) result rows plus graph statistics."""
    import csv

    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["label", "accuracy_mean", "accuracy_std", "weighted_f1_mean",
             "weighted_f1_std", "nodes", "edges_undirected", "edges_directed",
             "feature_dim", "class_count"]
        )
        for r in reports:
            agg = r.aggregate
            writer.writerow(
                [
                    r.label,
                    repr(agg["accuracy"]["mean"]),
                    repr(agg["accuracy"]["std"]),
                    repr(agg["weighted_f1"]["mean"]),
                    repr(agg["weighted_f1"]["std"]),
                    r.stats.nodes,
                    r.stats.edges_undirected,
                    r.stats.edges_directed,
                    r.stats.feature_dim,
                    r.stats.class_count,
                ]
            )


def format_markdown_table(reports: Sequence[EvalReport]) -> str:
    """Rows of `label | accuracy mean (std) | weighted-F1 mean (std)`, in percent."""
    lines = [
        "| Graph | Accuracy | Weighted-F1 |",
        "| --- | --- | --- |",
    ]
    for r in reports:
        agg = r.aggregate
        acc = f"{100 * agg['accuracy']['mean']:.2f} ({100 * agg['accuracy']['std']:.2f})"
        f1 = f"{100 * agg['weighted_f1']['mean']:.2f} ({100 * agg['weighted_f1']['std']:.2f})"
        lines.append(f"| {r.label} | {acc} | {f1} |")
    return "\n".join(lines) + "\n"
