"""GCN weak-label generation, CSV export/import, and agreement audits.

The CSV (paper_id,predicted_class,confidence,source) is the contract consumed
by the fine-tuning harness; labels are exported for every paper node so the
consumer decides which subset to trust.
"""

from __future__ import annotations

import csv
import datetime as _dt
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from .corpus import PaperRecord, Taxonomy
from .errors import ValidationError
from .gcn import TrainRun, predict
from .graphs import AttributedGraph, normalize

CSV_HEADER = ("paper_id", "predicted_class", "confidence", "source")


@dataclass(frozen=True)
class WeakLabelEntry:
    paper_id: str
    predicted_class: str
    confidence: float
    source: str


@dataclass(frozen=True)
class WeakLabelSet:
    entries: tuple[WeakLabelEntry, ...]
    generated_on: str | None = field(default=None, compare=False)

    def __post_init__(self):
        ids = [e.paper_id for e in self.entries]
        if len(set(ids)) != len(ids):
            raise ValidationError("weak labels must have one entry per paper")
        for e in self.entries:
            if not 0.0 < e.confidence <= 1.0:
                raise ValidationError(
                    f"confidence for {e.paper_id!r} outside (0, 1]: {e.confidence}"
                )


def generate_weak_labels(
    run: TrainRun,
    graph: AttributedGraph,
    taxonomy: Taxonomy,
    source: str | None = None,
) -> WeakLabelSet:
    """Predict every paper node with the run's selected checkpoint."""
    model = run.selected_model()
    a_hat = normalize(graph).matrix
    pred = predict(model, a_hat, graph.features.values)
    if source is None:
        source = f"gcn-h{model.hidden}-seed{run.config.seed}-{run.config.select}"
    entries = []
    for i in graph.paper_index:
        class_id = int(pred.classes[i])
        if class_id >= taxonomy.num_classes:
            raise ValidationError(
                f"paper {graph.node_ids[i]!r} predicted the reserved word class"
            )
        entries.append(
            WeakLabelEntry(
                paper_id=graph.node_ids[i],
                predicted_class=taxonomy.name_of(class_id),
                confidence=float(pred.confidence[i]),
                source=source,
            )
        )
    return WeakLabelSet(
        entries=tuple(entries), generated_on=_dt.date.today().isoformat()
    )


def write_weak_labels(labels: WeakLabelSet, path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_HEADER)
        for e in labels.entries:
            writer.writerow([e.paper_id, e.predicted_class, repr(e.confidence), e.source])


def read_weak_labels(path: str | Path) -> WeakLabelSet:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = tuple(next(reader, ()))
        if header != CSV_HEADER:
            raise ValidationError(
                f"unexpected weak-label header {header!r}; expected {CSV_HEADER!r}"
            )
        entries = tuple(
            WeakLabelEntry(
                paper_id=row[0],
                predicted_class=row[1],
                confidence=float(row[2]),
                source=row[3],
            )
            for row in reader
            if row
        )
    return WeakLabelSet(entries=entries)


@dataclass(frozen=True)
class AuditReport:
    """Agreement of weak labels against ground truth; noise = 1 - agreement."""

    n: int
    agreement: float
    noise_ratio: float
    confusion: dict[tuple[str, str], int]  # (true_class, predicted_class) -> count

    def to_json_dict(self) -> dict:
        return {
            "n": self.n,
            "agreement": self.agreement,
            "noise_ratio": self.noise_ratio,
            "confusion": {f"{t}→{p}": c for (t, p), c in sorted(self.confusion.items())},
        }


def audit(weak: WeakLabelSet, records: Sequence[PaperRecord]) -> AuditReport:
    if not weak.entries:
        raise ValidationError("cannot audit an empty weak-label set")
    truth = {r.paper_id: r.taxonomy_label for r in records}
    missing = sorted(e.paper_id for e in weak.entries if e.paper_id not in truth)
    if missing:
        raise ValidationError(f"weak labels reference unknown paper ids: {missing}")
    confusion: Counter[tuple[str, str]] = Counter()
    agree = 0
    for e in weak.entries:
        true_class = truth[e.paper_id]
        confusion[(true_class, e.predicted_class)] += 1
        agree += true_class == e.predicted_class
    agreement = agree / len(weak.entries)
    return AuditReport(
        n=len(weak.entries),
        agreement=agreement,
        noise_ratio=1.0 - agreement,
        confusion=dict(confusion),
    )
