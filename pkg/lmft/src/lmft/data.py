"""Readers for the two input file contracts: corpus JSON Lines and weak-label CSV."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

CORPUS_KEYS = ("paper_id", "title", "summary", "taxonomy_label")
WEAK_HEADER = ("paper_id", "predicted_class", "confidence", "source")


@dataclass(frozen=True)
class Paper:
    paper_id: str
    text: str  # title + summary, the fine-tuning input
    label: str


def load_corpus(path: str | Path) -> list[Paper]:
    papers = []
    seen = set()
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            raw = json.loads(line)
            missing = [k for k in CORPUS_KEYS if k not in raw]
            if missing:
                raise ValueError(f"line {line_no}: missing fields {missing}")
            paper_id = str(raw["paper_id"])
            if paper_id in seen:
                raise ValueError(f"line {line_no}: duplicate paper_id {paper_id!r}")
            seen.add(paper_id)
            papers.append(
                Paper(
                    paper_id=paper_id,
                    text=f"{raw['title']} {raw['summary']}",
                    label=str(raw["taxonomy_label"]),
                )
            )
    if not papers:
        raise ValueError(f"no records in {path}")
    return papers


def load_weak_labels(path: str | Path) -> dict[str, str]:
    """paper_id -> predicted class name."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = tuple(next(reader, ()))
        if header != WEAK_HEADER:
            raise ValueError(f"unexpected weak-label header {header!r}")
        labels = {}
        for row in reader:
            if row:
                labels[row[0]] = row[1]
    if not labels:
        raise ValueError(f"no weak labels in {path}")
    return labels
