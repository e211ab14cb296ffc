"""Token cleaning, TF-IDF blocks, category one-hots, and PMI co-occurrence stats.

TF-IDF uses raw term counts and an unsmoothed natural-log IDF, ln(N/df).
PMI is computed over fixed-size sliding windows; only positive PMI is kept
when building word-word edges.
"""

from __future__ import annotations

import json
import math
import re
from collections import Counter
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import TYPE_CHECKING, Sequence

import numpy as np

from .errors import ValidationError

if TYPE_CHECKING:
    from .corpus import PaperRecord

_TOKEN_RE = re.compile(r"[a-z0-9]+")


def _load_stopwords() -> frozenset[str]:
    text = resources.files("surveytax.data").joinpath("stopwords.txt").read_text("utf-8")
    return frozenset(line.strip() for line in text.splitlines() if line.strip())


STOPWORDS = _load_stopwords()


def clean_tokenize(text: str) -> list[str]:
    """Lowercase, split on non-alphanumeric runs, drop stopwords and 1-char tokens."""
    return [
        t
        for t in _TOKEN_RE.findall(text.lower())
        if len(t) >= 2 and t not in STOPWORDS
    ]


@dataclass(frozen=True)
class Vocabulary:
    """Token identity set; positions are stable feature/node indices."""

    tokens: tuple[str, ...]

    def __post_init__(self):
        if len(set(self.tokens)) != len(self.tokens):
            raise ValidationError("vocabulary tokens must be unique")

    @classmethod
    def from_docs(cls, docs: Sequence[Sequence[str]]) -> "Vocabulary":
        return cls(tokens=tuple(sorted({t for doc in docs for t in doc})))

    @property
    def index(self) -> dict[str, int]:
        return {t: i for i, t in enumerate(self.tokens)}

    def __len__(self) -> int:
        return len(self.tokens)

    def __contains__(self, token: str) -> bool:
        return token in self.index


@dataclass(frozen=True)
class FeatureMatrix:
    """Dense per-entity features with named column blocks."""

    values: np.ndarray  # (rows, cols) float64
    blocks: dict[str, tuple[int, int]]  # name -> [start, stop)

    def __post_init__(self):
        if self.values.ndim != 2:
            raise ValidationError("feature matrix must be 2-D")
        if not np.all(np.isfinite(self.values)):
            raise ValidationError("feature matrix contains non-finite values")

    @property
    def rows(self) -> int:
        return self.values.shape[0]

    @property
    def cols(self) -> int:
        return self.values.shape[1]

    def block(self, name: str) -> np.ndarray:
        start, stop = self.blocks[name]
        return self.values[:, start:stop]

    @classmethod
    def concat(cls, named_blocks: Sequence[tuple[str, np.ndarray]]) -> "FeatureMatrix":
        blocks = {}
        offset = 0
        for name, arr in named_blocks:
            blocks[name] = (offset, offset + arr.shape[1])
            offset += arr.shape[1]
        values = np.hstack([np.asarray(arr, dtype=np.float64) for _, arr in named_blocks])
        return cls(values=values, blocks=blocks)

    def save(self, prefix: str | Path) -> None:
        """Write <prefix>.bin (row-major float64) plus a JSON shape/layout sidecar."""
        data = np.ascontiguousarray(self.values, dtype="<f8")
        Path(f"{prefix}.bin").write_bytes(data.tobytes())
        sidecar = {
            "dtype": "<f8",
            "order": "row-major",
            "rows": self.rows,
            "cols": self.cols,
            "blocks": {k: list(v) for k, v in self.blocks.items()},
        }
        Path(f"{prefix}.json").write_text(
            json.dumps(sidecar, indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )

    @classmethod
    def load(cls, prefix: str | Path) -> "FeatureMatrix":
        sidecar = json.loads(Path(f"{prefix}.json").read_text("utf-8"))
        raw = np.frombuffer(Path(f"{prefix}.bin").read_bytes(), dtype="<f8")
        values = raw.reshape(sidecar["rows"], sidecar["cols"]).copy()
        blocks = {k: (v[0], v[1]) for k, v in sidecar["blocks"].items()}
        return cls(values=values, blocks=blocks)


def write_features_csv(fm: FeatureMatrix, path: str | Path, row_ids: Sequence[str]) -> None:
    """CSV export with the block layout recorded in a leading comment line."""
    if len(row_ids) != fm.rows:
        raise ValidationError("row_ids length must match feature rows")
    layout = " ".join(f"{name}[{a}:{b}]" for name, (a, b) in fm.blocks.items())
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# blocks: {layout}\n")
        fh.write("node_id," + ",".join(f"f{i}" for i in range(fm.cols)) + "\n")
        for rid, row in zip(row_ids, fm.values):
            fh.write(rid + "," + ",".join(repr(v) for v in row) + "\n")


def tfidf(docs: Sequence[Sequence[str]]) -> tuple[np.ndarray, Vocabulary]:
    """TF-IDF block: entry(d, t) = count(t in d) * ln(N / df(t)).

    The vocabulary is every token that survives cleaning, sorted
    lexicographically; a token present in all documents gets IDF 0.
    """
    if not docs or all(len(d) == 0 for d in docs):
        raise ValidationError("tfidf requires at least one non-empty document")
    vocab = Vocabulary.from_docs(docs)
    index = vocab.index
    n_docs = len(docs)
    df = Counter()
    for doc in docs:
        df.update(set(doc))
    idf = np.zeros(len(vocab))
    for token, count in df.items():
        idf[index[token]] = math.log(n_docs / count)
    matrix = np.zeros((n_docs, len(vocab)))
    for row, doc in enumerate(docs):
        for token, count in Counter(doc).items():
            col = index[token]
            matrix[row, col] = count * idf[col]
    return matrix, vocab


def one_hot_categories(
    records: Sequence["PaperRecord"],
    category_universe: Sequence[str],
) -> np.ndarray:
    """Multi-hot encoding of each record's arXiv categories over a fixed universe."""
    index = {c: i for i, c in enumerate(category_universe)}
    matrix = np.zeros((len(records), len(category_universe)))
    for row, record in enumerate(records):
        for cat in record.categories:
            if cat not in index:
                raise ValidationError(f"category {cat!r} not in category universe")
            matrix[row, index[cat]] = 1.0
    return matrix


def category_universe(records: Sequence["PaperRecord"]) -> tuple[str, ...]:
    return tuple(sorted({c for r in records for c in r.categories}))


def build_paper_features(records: Sequence["PaperRecord"]) -> FeatureMatrix:
    """Title TF-IDF + summary TF-IDF + category one-hot, concatenated column-wise.

    Title and summary keep separate vocabularies.
    """
    title_block, _ = tfidf([clean_tokenize(r.title) for r in records])
    summary_block, _ = tfidf([clean_tokenize(r.summary) for r in records])
    cat_block = one_hot_categories(records, category_universe(records))
    return FeatureMatrix.concat(
        [
            ("title-tfidf", title_block),
            ("summary-tfidf", summary_block),
            ("category-onehot", cat_block),
        ]
    )


@dataclass(frozen=True)
class CooccurrenceStats:
    """Window counts backing PMI: how many windows contain each token / token pair."""

    window_size: int
    window_count: int
    word_counts: dict[str, int]
    pair_counts: dict[tuple[str, str], int]  # key is the sorted token pair

    def pair(self, i: str, j: str) -> int:
        return self.pair_counts.get((i, j) if i <= j else (j, i), 0)


def sliding_window_stats(
    docs: Sequence[Sequence[str]], window_size: int
) -> CooccurrenceStats:
    """Count token and token-pair occurrences over all sliding windows.

    A document shorter than the window contributes a single window holding
    the whole document.
    """
    if window_size < 2:
        raise ValidationError("window_size must be >= 2")
    window_count = 0
    word_counts: Counter[str] = Counter()
    pair_counts: Counter[tuple[str, str]] = Counter()
    for doc in docs:
        if len(doc) <= window_size:
            windows = [doc]
        else:
            windows = [doc[i : i + window_size] for i in range(len(doc) - window_size + 1)]
        for window in windows:
            window_count += 1
            uniq = sorted(set(window))
            word_counts.update(uniq)
            for a in range(len(uniq)):
                for b in range(a + 1, len(uniq)):
                    pair_counts[(uniq[a], uniq[b])] += 1
    return CooccurrenceStats(
        window_size=window_size,
        window_count=window_count,
        word_counts=dict(word_counts),
        pair_counts=dict(pair_counts),
    )


def pmi(stats: CooccurrenceStats, i: str, j: str) -> float | None:
    """Positive pointwise mutual information, or None when the pair yields no edge.

    pmi = ln((pair/W) / ((count_i/W)(count_j/W))); non-positive values and
    never-co-occurring pairs return None.
    """
    if i == j:
        raise ValidationError("pmi requires two distinct tokens")
    for token in (i, j):
        if token not in stats.word_counts:
            raise ValidationError(f"token {token!r} not present in co-occurrence stats")
    pair = stats.pair(i, j)
    if pair == 0:
        return None
    w = stats.window_count
    value = math.log((pair / w) / ((stats.word_counts[i] / w) * (stats.word_counts[j] / w)))
    return value if value > 0 else None
