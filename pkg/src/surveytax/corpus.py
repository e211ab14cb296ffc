"""Paper metadata records, the taxonomy, subset filters, and corpus statistics.

Input is pre-collected JSON Lines (one paper per line); there is no live
scraping here so every run is reproducible from files.
"""

from __future__ import annotations

import csv
import json
from collections import Counter
from dataclasses import dataclass, field
from datetime import date
from importlib import resources
from pathlib import Path
from typing import IO, Iterable, Iterator

from .errors import ParseError, ValidationError

RECORD_FIELDS = (
    "paper_id",
    "title",
    "authors",
    "release_date",
    "links",
    "categories",
    "summary",
    "taxonomy_label",
)


@dataclass(frozen=True)
class PaperRecord:
    """One survey paper's metadata row plus its taxonomy label."""

    paper_id: str
    title: str
    authors: tuple[str, ...]
    release_date: str  # normalized ISO date, YYYY-MM-DD
    links: tuple[str, ...]
    categories: tuple[str, ...]
    summary: str
    taxonomy_label: str


@dataclass(frozen=True)
class Taxonomy:
    """Ordered class list; class ids are positions 0..K-1.

    Optional per-class hint keywords ride along for the few-shot judge.
    """

    classes: tuple[str, ...]
    hints: dict[str, tuple[str, ...]] = field(default_factory=dict)
    name: str = "taxonomy"

    def __post_init__(self):
        if len(self.classes) < 2:
            raise ValidationError("taxonomy needs at least 2 classes")
        if len(set(self.classes)) != len(self.classes):
            raise ValidationError("taxonomy class names must be unique")
        unknown = set(self.hints) - set(self.classes)
        if unknown:
            raise ValidationError(f"hints for unknown classes: {sorted(unknown)}")

    @property
    def num_classes(self) -> int:
        return len(self.classes)

    def id_of(self, name: str) -> int:
        try:
            return self.classes.index(name)
        except ValueError:
            raise ValidationError(f"unknown taxonomy label: {name!r}") from None

    def name_of(self, class_id: int) -> str:
        return self.classes[class_id]

    def __contains__(self, name: str) -> bool:
        return name in self.classes

    @classmethod
    def from_file(cls, path: str | Path) -> "Taxonomy":
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
        return cls(
            classes=tuple(raw["classes"]),
            hints={k: tuple(v) for k, v in raw.get("hints", {}).items()},
            name=raw.get("name", Path(path).stem),
        )

    @classmethod
    def default(cls) -> "Taxonomy":
        raw = json.loads(
            resources.files("surveytax.data").joinpath("taxonomy.json").read_text("utf-8")
        )
        return cls(
            classes=tuple(raw["classes"]),
            hints={k: tuple(v) for k, v in raw.get("hints", {}).items()},
            name=raw.get("name", "default"),
        )


@dataclass(frozen=True)
class SubsetSpec:
    """Filter: keep records released on/before cutoff and outside removed classes."""

    name: str = "all"
    cutoff_date: str | None = None  # inclusive ISO date
    removed_classes: frozenset[str] = frozenset()


def _normalize_date(value: str, line_no: int | None = None) -> str:
    # Accept a date or a datetime prefix; time-of-day is ignored on purpose.
    text = str(value).strip()
    try:
        return date.fromisoformat(text[:10]).isoformat()
    except ValueError:
        raise ParseError(f"release_date {value!r} is not an ISO-8601 date", line_no) from None


def parse_records(
    stream: Iterable[str] | IO[str],
    taxonomy: Taxonomy | None = None,
) -> list[PaperRecord]:
    """Parse JSON Lines paper metadata into validated records.

    Raises ParseError (with the 1-based line number) for malformed lines and
    ValidationError for duplicate ids or, when a taxonomy is given, labels
    outside it.
    """
    records: list[PaperRecord] = []
    seen_ids: set[str] = set()
    for line_no, line in enumerate(stream, start=1):
        if not line.strip():
            continue
        try:
            raw = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid JSON ({exc.msg})", line_no) from None
        if not isinstance(raw, dict):
            raise ParseError("record is not a JSON object", line_no)
        missing = [k for k in RECORD_FIELDS if k not in raw]
        if missing:
            raise ParseError(f"missing fields: {', '.join(missing)}", line_no)

        paper_id = str(raw["paper_id"]).strip()
        if not paper_id:
            raise ValidationError(f"line {line_no}: empty paper_id")
        if paper_id in seen_ids:
            raise ValidationError(f"line {line_no}: duplicate paper_id {paper_id!r}")
        seen_ids.add(paper_id)

        categories = tuple(dict.fromkeys(str(c) for c in raw["categories"]))
        if not categories:
            raise ValidationError(f"line {line_no}: record {paper_id!r} has no categories")

        label = str(raw["taxonomy_label"])
        if taxonomy is not None and label not in taxonomy:
            raise ValidationError(f"line {line_no}: unknown taxonomy label: {label!r}")

        records.append(
            PaperRecord(
                paper_id=paper_id,
                title=str(raw["title"]),
                authors=tuple(str(a) for a in raw["authors"]),
                release_date=_normalize_date(raw["release_date"], line_no),
                links=tuple(str(u) for u in raw["links"]),
                categories=categories,
                summary=str(raw["summary"]),
                taxonomy_label=label,
            )
        )
    return records


def load_records(path: str | Path, taxonomy: Taxonomy | None = None) -> list[PaperRecord]:
    with open(path, encoding="utf-8") as fh:
        return parse_records(fh, taxonomy)


def write_records(records: Iterable[PaperRecord], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for r in records:
            fh.write(
                json.dumps(
                    {
                        "paper_id": r.paper_id,
                        "title": r.title,
                        "authors": list(r.authors),
                        "release_date": r.release_date,
                        "links": list(r.links),
                        "categories": list(r.categories),
                        "summary": r.summary,
                        "taxonomy_label": r.taxonomy_label,
                    },
                    ensure_ascii=False,
                )
                + "\n"
            )


def build_subset(
    records: list[PaperRecord],
    spec: SubsetSpec,
    taxonomy: Taxonomy,
) -> list[PaperRecord]:
    """Apply a SubsetSpec filter, preserving input order. Idempotent."""
    unknown = set(spec.removed_classes) - set(taxonomy.classes)
    if unknown:
        raise ValidationError(f"subset removes unknown classes: {sorted(unknown)}")
    cutoff = _normalize_date(spec.cutoff_date) if spec.cutoff_date else None
    out = []
    for r in records:
        if cutoff is not None and r.release_date > cutoff:
            continue
        if r.taxonomy_label in spec.removed_classes:
            continue
        out.append(r)
    return out


@dataclass(frozen=True)
class StatsReport:
    """Plot-ready corpus statistics: monthly trend, class/category histograms, top tokens."""

    n_records: int
    per_month: dict[str, int]
    per_class: dict[str, int]
    per_category: dict[str, int]
    top_tokens: tuple[tuple[str, int], ...]

    def to_json_dict(self) -> dict:
        return {
            "n_records": self.n_records,
            "per_month": dict(sorted(self.per_month.items())),
            "per_class": dict(sorted(self.per_class.items())),
            "per_category": dict(sorted(self.per_category.items())),
            "top_tokens": [list(t) for t in self.top_tokens],
        }

    def iter_csv_rows(self) -> Iterator[tuple[str, str, int]]:
        """Long-format rows (table, key, count) for plotting."""
        for month, n in sorted(self.per_month.items()):
            yield ("per_month", month, n)
        for cls, n in sorted(self.per_class.items()):
            yield ("per_class", cls, n)
        for cat, n in sorted(self.per_category.items()):
            yield ("per_category", cat, n)
        for token, n in self.top_tokens:
            yield ("top_tokens", token, n)


def corpus_stats(records: list[PaperRecord], top_k: int = 30) -> StatsReport:
    """Histograms behind the trend/class/category/keyword plots."""
    if not records:
        raise ValidationError("corpus_stats requires a non-empty record list")
    from .text import clean_tokenize

    months = Counter(r.release_date[:7] for r in records)
    classes = Counter(r.taxonomy_label for r in records)
    categories: Counter[str] = Counter()
    tokens: Counter[str] = Counter()
    for r in records:
        categories.update(r.categories)
        tokens.update(clean_tokenize(r.summary))
    # Deterministic top-k: count desc, then token asc.
    top = sorted(tokens.items(), key=lambda kv: (-kv[1], kv[0]))[:top_k]
    return StatsReport(
        n_records=len(records),
        per_month=dict(months),
        per_class=dict(classes),
        per_category=dict(categories),
        top_tokens=tuple(top),
    )


def write_stats_csv(report: StatsReport, path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["table", "key", "count"])
        writer.writerows(report.iter_csv_rows())
