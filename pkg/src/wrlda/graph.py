"""Symmetric word-similarity graph used by the smoothness penalty."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

import numpy as np
import scipy.sparse as sp

from .corpus import Vocabulary
from .errors import CorpusFormatError, DataError


@dataclass(frozen=True)
class WordGraph:
    """Undirected weighted graph over ``n_words`` vocabulary ids.

    Each unordered edge is stored once with ``rows < cols``; all weights are
    strictly positive and there are no self-loops.
    """

    n_words: int
    rows: np.ndarray
    cols: np.ndarray
    weights: np.ndarray
    _matrix: sp.csr_matrix = field(init=False, repr=False, compare=False)
    _degree: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        rows = np.asarray(self.rows, dtype=np.int64)
        cols = np.asarray(self.cols, dtype=np.int64)
        weights = np.asarray(self.weights, dtype=np.float64)
        if not (rows.shape == cols.shape == weights.shape) or rows.ndim != 1:
            raise DataError("edge arrays must be 1-d and equal length")
        if rows.size:
            if np.any(rows >= cols):
                raise DataError("edges must be stored once with row < col")
            if rows.min() < 0 or cols.max() >= self.n_words:
                raise DataError("edge endpoint out of range")
            if not np.all(weights > 0) or not np.all(np.isfinite(weights)):
                raise DataError("edge weights must be finite and > 0")
            key = rows * self.n_words + cols
            if np.unique(key).size != key.size:
                raise DataError("duplicate edge")
        for name, arr in (("rows", rows), ("cols", cols), ("weights", weights)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        upper = sp.coo_matrix((weights, (rows, cols)), shape=(self.n_words, self.n_words))
        matrix = (upper + upper.T).tocsr()
        object.__setattr__(self, "_matrix", matrix)
        object.__setattr__(self, "_degree", np.asarray(matrix.sum(axis=1)).ravel())

    @classmethod
    def from_edges(cls, n_words: int, edges: Iterable[tuple[int, int, float]]) -> "WordGraph":
        """Symmetrize raw ``(i, j, w)`` triples; duplicates keep the max weight.

        Self-loops and zero weights are dropped; negative weights raise.
        """
        merged: dict[tuple[int, int], float] = {}
        for i, j, w in edges:
            if w < 0:
                raise DataError(f"negative weight {w} on edge ({i}, {j})")
            if i == j or w == 0:
                continue
            key = (i, j) if i < j else (j, i)
            if w > merged.get(key, 0.0):
                merged[key] = w
        if not merged:
            return cls.empty(n_words)
        keys = sorted(merged)
        rows, cols = zip(*keys)
        return cls(n_words, np.array(rows), np.array(cols), np.array([merged[k] for k in keys]))

    @classmethod
    def empty(cls, n_words: int) -> "WordGraph":
        z = np.zeros(0)
        return cls(n_words, z.astype(np.int64), z.astype(np.int64), z)

    @property
    def n_edges(self) -> int:
        return self.rows.size

    @property
    def matrix(self) -> sp.csr_matrix:
        """Symmetric V x V weight matrix (read-only use)."""
        return self._matrix

    @property
    def degree(self) -> np.ndarray:
        return self._degree

    def weight(self, i: int, j: int) -> float:
        return float(self._matrix[i, j])

    def edges(self):
        return zip(self.rows.tolist(), self.cols.tolist(), self.weights.tolist())

    def subgraph(self, mask: np.ndarray) -> "WordGraph":
        """Keep the edges where ``mask`` is true, weights unchanged."""
        mask = np.asarray(mask, dtype=bool)
        return WordGraph(self.n_words, self.rows[mask], self.cols[mask], self.weights[mask])

    def validate(self):
        """Re-check the stored invariants; raises DataError on violation."""
        m = self._matrix
        if (m - m.T).count_nonzero():
            raise DataError("graph is not symmetric")
        if m.nnz and m.data.min() < 0:
            raise DataError("negative weight")
        if m.diagonal().any():
            raise DataError("self-loop present")
        if not np.allclose(self._degree, np.asarray(m.sum(axis=1)).ravel(), rtol=0, atol=1e-12):
            raise DataError("degree cache out of date")

    def stats(self, vocab: Vocabulary | None = None) -> dict:
        deg_counts = np.bincount(np.diff(self._matrix.indptr), minlength=1)
        out = {
            "n_words": self.n_words,
            "n_edges": self.n_edges,
            "total_weight": float(self.weights.sum()),
            "isolated_words": int(np.sum(self._degree == 0)),
            "degree_histogram": {int(k): int(v) for k, v in enumerate(deg_counts) if v},
            "cross_lingual_fraction": 0.0,
        }
        if vocab is not None and vocab.lang is not None and self.n_edges:
            lang = np.array(vocab.lang)
            out["cross_lingual_fraction"] = float(np.mean(lang[self.rows] != lang[self.cols]))
        return out


def _split_line(line):
    parts = line.split("\t") if "\t" in line else line.split()
    return [p.strip() for p in parts]


def read_graph_lines(path) -> list[tuple[int, str, str, float]]:
    """Parse ``token1<TAB>token2<TAB>weight`` lines into (lineno, a, b, w)."""
    out = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip() or line.startswith("#"):
                continue
            parts = _split_line(line.rstrip("\n"))
            if len(parts) != 3:
                raise CorpusFormatError("expected token1<TAB>token2<TAB>weight", path, lineno)
            try:
                w = float(parts[2])
            except ValueError:
                raise CorpusFormatError(f"bad weight {parts[2]!r}", path, lineno) from None
            if not np.isfinite(w):
                raise CorpusFormatError(f"non-finite weight {parts[2]!r}", path, lineno)
            out.append((lineno, parts[0], parts[1], w))
    return out


def load_graph(path, vocab: Vocabulary) -> WordGraph:
    """Load an edge list over tokens of ``vocab``.

    Pairs listed in both directions or repeatedly are merged by taking the
    maximum weight.
    """
    lines = read_graph_lines(path)
    unknown = sorted({t for _, a, b, _ in lines for t in (a, b) if t not in vocab.index})
    if unknown:
        raise DataError(f"{path}: unknown tokens: {', '.join(unknown[:20])}")
    negative = [ln for ln, _, _, w in lines if w < 0]
    if negative:
        raise DataError(f"{path}: negative weights on lines {negative[:20]}")
    return WordGraph.from_edges(len(vocab), ((vocab.index[a], vocab.index[b], w) for _, a, b, w in lines))


def save_graph(graph: WordGraph, vocab: Vocabulary, path):
    with open(path, "w", encoding="utf-8") as fh:
        for i, j, w in graph.edges():
            fh.write(f"{vocab.tokens[i]}\t{vocab.tokens[j]}\t{w!r}\n")


def load_dictionary(path) -> list[tuple[str, str]]:
    """Read ``source<TAB>target`` translation pairs."""
    pairs = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip() or line.startswith("#"):
                continue
            parts = _split_line(line.rstrip("\n"))
            if len(parts) != 2:
                raise CorpusFormatError("expected source<TAB>target", path, lineno)
            pairs.append((parts[0], parts[1]))
    return pairs


def build_dictionary_graph(dict_pairs, vocab: Vocabulary) -> tuple[WordGraph, int]:
    """Unit-weight edge for each translation pair with both words in ``vocab``.

    Returns the graph and the number of skipped pairs.
    """
    edges = []
    skipped = 0
    for src, tgt in dict_pairs:
        if src in vocab.index and tgt in vocab.index:
            edges.append((vocab.index[src], vocab.index[tgt], 1.0))
        else:
            skipped += 1
    return WordGraph.from_edges(len(vocab), edges), skipped


def restrict_cross_lingual(graph: WordGraph, vocab: Vocabulary) -> WordGraph:
    """Keep only edges joining words with different language tags."""
    if vocab.lang is None:
        raise DataError("vocabulary has no language tags")
    if len(vocab) != graph.n_words:
        raise DataError("graph and vocabulary sizes differ")
    lang = np.array(vocab.lang, dtype=object)
    return graph.subgraph(lang[graph.rows] != lang[graph.cols])


def project_graph(graph: WordGraph, old_vocab: Vocabulary, new_vocab: Vocabulary) -> WordGraph:
    """Re-express ``graph`` over ``new_vocab``, dropping edges to words it lacks."""
    remap = np.array([new_vocab.index.get(t, -1) for t in old_vocab.tokens], dtype=np.int64)
    r, c = remap[graph.rows], remap[graph.cols]
    keep = (r >= 0) & (c >= 0)
    return WordGraph.from_edges(len(new_vocab), zip(r[keep].tolist(), c[keep].tolist(), graph.weights[keep].tolist()))


def validate_graph_file(path, vocab: Vocabulary) -> list[str]:
    """Problems found in a raw graph file, one message per offending line."""
    problems = []
    try:
        lines = read_graph_lines(path)
    except CorpusFormatError as exc:
        return [str(exc)]
    seen: dict[tuple[str, str], tuple[int, float]] = {}
    for lineno, a, b, w in lines:
        for t in (a, b):
            if t not in vocab.index:
                problems.append(f"line {lineno}: unknown token {t!r}")
        if w < 0:
            problems.append(f"line {lineno}: negative weight {w}")
        rev = seen.get((b, a))
        if rev is not None and rev[1] != w:
            problems.append(f"line {lineno}: asymmetric weight {w} vs {rev[1]} on line {rev[0]}")
        seen[(a, b)] = (lineno, w)
    return problems
