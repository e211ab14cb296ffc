"""The three attributed graphs (text, co-author, co-category) and the
symmetric adjacency normalization A_hat = D~^{-1/2} (A + I) D~^{-1/2}.

All graphs are undirected and never store self-loops. Node order is stable:
papers in corpus order, then (for text graphs) vocabulary tokens in
lexicographic order, so masks and splits are reproducible.
"""

from __future__ import annotations

import csv
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp

from .corpus import PaperRecord, Taxonomy
from .errors import ValidationError
from .text import (
    FeatureMatrix,
    Vocabulary,
    clean_tokenize,
    one_hot_categories,
    category_universe,
    pmi,
    sliding_window_stats,
    tfidf,
)

ROLE_PAPER = 0
ROLE_WORD = 1

DEFAULT_WINDOW_SIZE = 20


@dataclass(frozen=True)
class AttributedGraph:
    """Sparse symmetric weighted adjacency + dense features + labels + roles."""

    adjacency: sp.csr_matrix
    features: FeatureMatrix
    labels: np.ndarray  # int64, word nodes carry the reserved extra class id
    roles: np.ndarray  # int8, ROLE_PAPER / ROLE_WORD
    node_ids: tuple[str, ...]

    def __post_init__(self):
        n = self.adjacency.shape[0]
        if self.adjacency.shape != (n, n):
            raise ValidationError("adjacency must be square")
        if self.features.rows != n or len(self.labels) != n or len(self.roles) != n:
            raise ValidationError("features/labels/roles must have one row per node")
        if len(self.node_ids) != n:
            raise ValidationError("node_ids must have one entry per node")
        if self.adjacency.diagonal().any():
            raise ValidationError("adjacency must not store self-loops")
        if (self.adjacency.data < 0).any():
            raise ValidationError("edge weights must be non-negative")
        if (self.adjacency != self.adjacency.T).nnz != 0:
            raise ValidationError("adjacency must be symmetric")

    @property
    def n(self) -> int:
        return self.adjacency.shape[0]

    @property
    def paper_index(self) -> np.ndarray:
        return np.flatnonzero(self.roles == ROLE_PAPER)


@dataclass(frozen=True)
class NormalizedAdjacency:
    """D~^{-1/2} (A + I) D~^{-1/2}; spectral radius <= 1."""

    matrix: sp.csr_matrix


def _symmetric_csr(n: int, edges: dict[tuple[int, int], float]) -> sp.csr_matrix:
    """Build a CSR adjacency from {(i, j): w} with i < j, mirrored both ways."""
    if not edges:
        return sp.csr_matrix((n, n))
    rows, cols, data = [], [], []
    for (i, j), w in edges.items():
        rows.extend((i, j))
        cols.extend((j, i))
        data.extend((w, w))
    return sp.coo_matrix((data, (rows, cols)), shape=(n, n)).tocsr()


def _paper_labels(records: Sequence[PaperRecord], taxonomy: Taxonomy) -> np.ndarray:
    return np.array([taxonomy.id_of(r.taxonomy_label) for r in records], dtype=np.int64)


def build_text_graph(
    records: Sequence[PaperRecord],
    taxonomy: Taxonomy,
    window_size: int = DEFAULT_WINDOW_SIZE,
) -> AttributedGraph:
    """Heterogeneous paper/word graph.

    Paper-word edges carry the word's TF-IDF in that paper's combined
    title+summary text; word-word edges carry positive PMI over sliding
    windows. Features are all ones (papers and words alike), and word nodes
    are labeled with the reserved extra class id len(taxonomy).
    """
    if not records:
        raise ValidationError("cannot build a graph from zero records")
    docs = [clean_tokenize(r.title) + clean_tokenize(r.summary) for r in records]
    vocab = Vocabulary.from_docs(docs)
    if len(vocab) == 0:
        raise ValidationError("text graph vocabulary is empty after cleaning")

    n_papers = len(records)
    n = n_papers + len(vocab)
    word_offset = n_papers
    index = vocab.index

    edges: dict[tuple[int, int], float] = {}
    tfidf_block, _ = tfidf(docs)
    paper_rows, word_cols = np.nonzero(tfidf_block > 0)
    for p, t in zip(paper_rows, word_cols):
        edges[(int(p), word_offset + int(t))] = float(tfidf_block[p, t])

    stats = sliding_window_stats(docs, window_size)
    for (a, b), count in stats.pair_counts.items():
        if count == 0:
            continue
        value = pmi(stats, a, b)
        if value is not None:
            ia, ib = word_offset + index[a], word_offset + index[b]
            edges[(min(ia, ib), max(ia, ib))] = value

    labels = np.concatenate(
        [
            _paper_labels(records, taxonomy),
            np.full(len(vocab), taxonomy.num_classes, dtype=np.int64),
        ]
    )
    roles = np.concatenate(
        [
            np.full(n_papers, ROLE_PAPER, dtype=np.int8),
            np.full(len(vocab), ROLE_WORD, dtype=np.int8),
        ]
    )
    features = FeatureMatrix(values=np.ones((n, n)), blocks={"ones": (0, n)})
    node_ids = tuple(r.paper_id for r in records) + vocab.tokens
    return AttributedGraph(
        adjacency=_symmetric_csr(n, edges),
        features=features,
        labels=labels,
        roles=roles,
        node_ids=node_ids,
    )


_AUTHOR_JUNK_RE = re.compile(r"[^a-z0-9 ]+")


def normalize_author(name: str) -> str:
    """Lowercase, strip punctuation, collapse whitespace. Exact match after this."""
    return " ".join(_AUTHOR_JUNK_RE.sub(" ", name.lower()).split())


def _pairs_sharing(groups: Iterable[Sequence[int]]) -> set[tuple[int, int]]:
    pairs: set[tuple[int, int]] = set()
    for members in groups:
        ordered = sorted(members)
        for a in range(len(ordered)):
            for b in range(a + 1, len(ordered)):
                pairs.add((ordered[a], ordered[b]))
    return pairs


def build_co_author_graph(
    records: Sequence[PaperRecord], taxonomy: Taxonomy
) -> AttributedGraph:
    """Unit-weight edge between papers sharing at least one normalized author name."""
    if not records:
        raise ValidationError("cannot build a graph from zero records")
    by_author: dict[str, list[int]] = {}
    for i, r in enumerate(records):
        for author in r.authors:
            by_author.setdefault(normalize_author(author), []).append(i)
    pairs = _pairs_sharing(by_author.values())
    return _paper_graph(records, taxonomy, pairs)


def build_co_category_graph(
    records: Sequence[PaperRecord],
    taxonomy: Taxonomy,
    removed_categories: frozenset[str] | set[str] = frozenset(),
) -> AttributedGraph:
    """Unit-weight edge between papers sharing at least one remaining arXiv category.

    Categories in removed_categories are deleted from every record before
    both edge construction and the one-hot feature block; the block keeps the
    full original category universe as columns, so removal zeroes columns
    without changing the feature dimension. Removing a category nobody holds
    is a bit-exact no-op.
    """
    if not records:
        raise ValidationError("cannot build a graph from zero records")
    removed = set(removed_categories)
    by_category: dict[str, list[int]] = {}
    for i, r in enumerate(records):
        for cat in r.categories:
            if cat not in removed:
                by_category.setdefault(cat, []).append(i)
    pairs = _pairs_sharing(by_category.values())
    return _paper_graph(records, taxonomy, pairs, removed_categories=removed)


def _paper_graph(
    records: Sequence[PaperRecord],
    taxonomy: Taxonomy,
    pairs: set[tuple[int, int]],
    removed_categories: set[str] | None = None,
) -> AttributedGraph:
    title_block, _ = tfidf([clean_tokenize(r.title) for r in records])
    summary_block, _ = tfidf([clean_tokenize(r.summary) for r in records])
    universe = category_universe(records)
    cat_block = one_hot_categories(records, universe)
    if removed_categories:
        for col, cat in enumerate(universe):
            if cat in removed_categories:
                cat_block[:, col] = 0.0
    features = FeatureMatrix.concat(
        [
            ("title-tfidf", title_block),
            ("summary-tfidf", summary_block),
            ("category-onehot", cat_block),
        ]
    )
    n = len(records)
    return AttributedGraph(
        adjacency=_symmetric_csr(n, {p: 1.0 for p in pairs}),
        features=features,
        labels=_paper_labels(records, taxonomy),
        roles=np.full(n, ROLE_PAPER, dtype=np.int8),
        node_ids=tuple(r.paper_id for r in records),
    )


def normalize(graph: AttributedGraph) -> NormalizedAdjacency:
    """Symmetric renormalization with self-loops added.

    Entries are computed as a_ij * (dinv_i * dinv_j), which keeps the stored
    matrix bit-exactly symmetric.
    """
    a = graph.adjacency
    n = a.shape[0]
    degree = np.asarray(a.sum(axis=1)).ravel()
    dinv = 1.0 / np.sqrt(degree + 1.0)
    tilde = (a + sp.identity(n, format="csr")).tocoo()
    data = tilde.data * (dinv[tilde.row] * dinv[tilde.col])
    matrix = sp.coo_matrix((data, (tilde.row, tilde.col)), shape=(n, n)).tocsr()
    return NormalizedAdjacency(matrix=matrix)


@dataclass(frozen=True)
class GraphStats:
    """Node/edge/feature/class counts; edges come in both counting conventions."""

    nodes: int
    edges_undirected: int
    edges_directed: int
    feature_dim: int
    class_count: int

    def to_json_dict(self) -> dict:
        return {
            "nodes": self.nodes,
            "edges_undirected": self.edges_undirected,
            "edges_directed": self.edges_directed,
            "feature_dim": self.feature_dim,
            "class_count": self.class_count,
        }


def graph_stats(graph: AttributedGraph) -> GraphStats:
    nnz = graph.adjacency.nnz
    return GraphStats(
        nodes=graph.n,
        edges_undirected=nnz // 2,
        edges_directed=nnz,
        feature_dim=graph.features.cols,
        class_count=len(np.unique(graph.labels)),
    )


def write_edge_tsv(graph: AttributedGraph, path: str | Path) -> None:
    """Edge list (src_id, dst_id, weight), one row per undirected pair."""
    coo = graph.adjacency.tocoo()
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("src_id\tdst_id\tweight\n")
        order = np.lexsort((coo.col, coo.row))
        for k in order:
            i, j = int(coo.row[k]), int(coo.col[k])
            if i < j:
                fh.write(f"{graph.node_ids[i]}\t{graph.node_ids[j]}\t{coo.data[k]!r}\n")


def write_node_csv(graph: AttributedGraph, path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["node_id", "role", "label"])
        for node_id, role, label in zip(graph.node_ids, graph.roles, graph.labels):
            writer.writerow(
                [node_id, "paper" if role == ROLE_PAPER else "word", int(label)]
            )
