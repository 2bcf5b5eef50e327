"""Vocabulary and sparse bag-of-words corpus, readers and frequency filters."""
from __future__ import annotations

import logging
import re
import warnings
from collections import Counter
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import CorpusFormatError, DataError

log = logging.getLogger(__name__)

_ANNOTATION = re.compile(r"^#(label|pair)=(-?\d+)$")


@dataclass(frozen=True)
class Vocabulary:
    """Ordered unique tokens with dense ids and optional language tags."""

    tokens: tuple[str, ...]
    lang: tuple[str, ...] | None = None
    index: dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        tokens = tuple(self.tokens)
        object.__setattr__(self, "tokens", tokens)
        index = {tok: i for i, tok in enumerate(tokens)}
        if len(index) != len(tokens):
            dupes = [t for t, c in Counter(tokens).items() if c > 1]
            raise DataError(f"duplicate tokens in vocabulary: {dupes[:5]}")
        object.__setattr__(self, "index", index)
        if self.lang is not None:
            lang = tuple(self.lang)
            if len(lang) != len(tokens):
                raise DataError("language tags must match vocabulary length")
            object.__setattr__(self, "lang", lang)

    def __len__(self):
        return len(self.tokens)

    def __contains__(self, token):
        return token in self.index

    def __getitem__(self, i):
        return self.tokens[i]

    def id(self, token):
        return self.index[token]

    def subset(self, keep_ids: Sequence[int]) -> "Vocabulary":
        tokens = [self.tokens[i] for i in keep_ids]
        lang = None if self.lang is None else [self.lang[i] for i in keep_ids]
        return Vocabulary(tokens, lang)

    @classmethod
    def range(cls, n):
        """Placeholder vocabulary ``"0" .. "n-1"`` for id-only corpora."""
        return cls([str(i) for i in range(n)])


@dataclass(frozen=True)
class Corpus:
    """Documents as CSR-style arrays over a shared vocabulary.

    Document ``d`` owns entries ``doc_ptr[d]:doc_ptr[d+1]`` of ``word_ids``
    and ``counts``; word ids are unique within a document.
    """

    vocab: Vocabulary
    doc_ptr: np.ndarray
    word_ids: np.ndarray
    counts: np.ndarray
    labels: tuple[int | None, ...] | None = None
    pairs: tuple[int | None, ...] | None = None

    def __post_init__(self):
        doc_ptr = np.ascontiguousarray(self.doc_ptr, dtype=np.int64)
        word_ids = np.ascontiguousarray(self.word_ids, dtype=np.int64)
        counts = np.ascontiguousarray(self.counts, dtype=np.float64)
        for name, arr in (("doc_ptr", doc_ptr), ("word_ids", word_ids), ("counts", counts)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if doc_ptr.ndim != 1 or doc_ptr[0] != 0 or doc_ptr[-1] != word_ids.size:
            raise DataError("inconsistent doc_ptr")
        if word_ids.size != counts.size:
            raise DataError("word_ids and counts differ in length")
        if word_ids.size and (word_ids.min() < 0 or word_ids.max() >= len(self.vocab)):
            raise DataError(f"word id out of range for vocabulary of size {len(self.vocab)}")
        if np.any(counts < 1) or np.any(counts != np.round(counts)):
            raise DataError("counts must be positive integers")
        if np.any(np.diff(doc_ptr) <= 0):
            raise DataError(f"document {int(np.argmin(np.diff(doc_ptr)))} has no tokens")
        for name in ("labels", "pairs"):
            value = getattr(self, name)
            if value is not None:
                value = tuple(value)
                if len(value) != self.n_docs:
                    raise DataError(f"{name} must have one entry per document")
                object.__setattr__(self, name, value)

    @property
    def n_docs(self) -> int:
        return self.doc_ptr.size - 1

    @property
    def n_words(self) -> int:
        return len(self.vocab)

    @property
    def doc_lengths(self) -> np.ndarray:
        """Token totals N_d."""
        return np.add.reduceat(self.counts, self.doc_ptr[:-1]) if self.n_docs and self.counts.size \
            else np.zeros(self.n_docs)

    def doc(self, d):
        """Return ``(word_ids, counts)`` of document ``d``."""
        start, stop = self.doc_ptr[d], self.doc_ptr[d + 1]
        return self.word_ids[start:stop], self.counts[start:stop]

    def __len__(self):
        return self.n_docs

    def __iter__(self):
        for d in range(self.n_docs):
            yield self.doc(d)

    def term_totals(self) -> np.ndarray:
        return np.bincount(self.word_ids, weights=self.counts, minlength=self.n_words)

    def doc_frequency(self) -> np.ndarray:
        return np.bincount(self.word_ids, minlength=self.n_words).astype(np.int64)

    def paired_docs(self) -> list[tuple[int, int]]:
        """Pairs of document indices sharing a pair id, in order of first appearance."""
        if self.pairs is None:
            raise DataError("corpus has no pair annotations")
        groups: dict[int, list[int]] = {}
        for d, p in enumerate(self.pairs):
            if p is not None:
                groups.setdefault(p, []).append(d)
        out = []
        for p, members in groups.items():
            if len(members) != 2:
                raise DataError(f"pair id {p} has {len(members)} documents, expected 2")
            out.append((members[0], members[1]))
        return out

    def with_docs(self, docs: Sequence[int]) -> "Corpus":
        """Sub-corpus with the selected documents, vocabulary unchanged."""
        bags = [dict(zip(*map(np.ndarray.tolist, self.doc(d)))) for d in docs]
        sub = lambda v: None if v is None else [v[d] for d in docs]  # noqa: E731
        return from_bags(bags, self.vocab, labels=sub(self.labels), pairs=sub(self.pairs))


def from_bags(bags: Sequence[dict[int, int]], vocab: Vocabulary, labels=None, pairs=None) -> Corpus:
    """Build a corpus from per-document ``{word_id: count}`` mappings."""
    doc_ptr = [0]
    ids: list[int] = []
    cts: list[int] = []
    for bag in bags:
        for w in sorted(bag):
            ids.append(w)
            cts.append(bag[w])
        doc_ptr.append(len(ids))
    return Corpus(vocab, np.array(doc_ptr), np.array(ids, dtype=np.int64),
                  np.array(cts, dtype=np.float64), labels=labels, pairs=pairs)


def from_token_lists(docs: Iterable[Sequence[str]], vocab: Vocabulary | None = None,
                     labels=None, pairs=None) -> Corpus:
    """Count tokens per document; builds the vocabulary in first-seen order if not given."""
    docs = [list(d) for d in docs]
    if vocab is None:
        seen: dict[str, None] = {}
        for doc in docs:
            for tok in doc:
                seen.setdefault(tok, None)
        vocab = Vocabulary(list(seen))
    bags = []
    for d, doc in enumerate(docs):
        try:
            bags.append(Counter(vocab.index[t] for t in doc))
        except KeyError as exc:
            raise DataError(f"document {d}: token {exc.args[0]!r} not in vocabulary") from None
    return from_bags(bags, vocab, labels=labels, pairs=pairs)


def _split_annotations(fields, path, lineno):
    label = pair = None
    body = []
    for f in fields:
        m = _ANNOTATION.match(f)
        if m:
            if m.group(1) == "label":
                label = int(m.group(2))
            else:
                pair = int(m.group(2))
        elif f.startswith("#"):
            raise CorpusFormatError(f"unknown annotation {f!r}", path, lineno)
        else:
            body.append(f)
    return body, label, pair


def load_vocab(path) -> Vocabulary:
    """Read ``token[<TAB>lang]`` lines."""
    tokens, langs = [], []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            parts = line.split("\t")
            if len(parts) > 2:
                raise CorpusFormatError("expected token[<TAB>lang]", path, lineno)
            tokens.append(parts[0])
            langs.append(parts[1] if len(parts) == 2 else None)
    if any(lang is None for lang in langs):
        if any(lang is not None for lang in langs):
            raise CorpusFormatError("language tags must be given for all tokens or none", path)
        return Vocabulary(tokens)
    return Vocabulary(tokens, langs)


def save_vocab(vocab: Vocabulary, path):
    with open(path, "w", encoding="utf-8") as fh:
        for i, tok in enumerate(vocab.tokens):
            fh.write(tok if vocab.lang is None else f"{tok}\t{vocab.lang[i]}")
            fh.write("\n")


def _load_bow(path, vocab):
    with open(path, encoding="utf-8") as fh:
        lines = [(i, ln.strip()) for i, ln in enumerate(fh, 1)]
    lines = [(i, ln) for i, ln in lines if ln]
    if not lines:
        raise CorpusFormatError("no documents", path)
    lineno, header = lines[0]
    try:
        n_docs, n_words = (int(x) for x in header.split())
    except ValueError:
        raise CorpusFormatError(f"bad header {header!r}, expected 'M V'", path, lineno) from None
    if n_docs < 1:
        raise CorpusFormatError("no documents", path, lineno)
    body = lines[1:]
    if len(body) != n_docs:
        raise CorpusFormatError(f"header declares {n_docs} documents, found {len(body)}", path)
    if vocab is None:
        vocab = Vocabulary.range(n_words)
    elif len(vocab) != n_words:
        raise DataError(f"vocabulary has {len(vocab)} tokens but corpus header says V={n_words}")

    bags, labels, pairs = [], [], []
    for lineno, line in body:
        fields, label, pair = _split_annotations(line.split(), path, lineno)
        bag: Counter = Counter()
        for f in fields:
            try:
                w, c = f.split(":")
                w, c = int(w), int(c)
            except ValueError:
                raise CorpusFormatError(f"bad entry {f!r}, expected wordId:count", path, lineno) from None
            if not 0 <= w < n_words:
                raise DataError(f"{path}:{lineno}: word id {w} out of range [0, {n_words})")
            if c < 1:
                raise CorpusFormatError(f"count must be >= 1, got {c}", path, lineno)
            bag[w] += c
        if not bag:
            raise CorpusFormatError("document has no tokens", path, lineno)
        bags.append(bag)
        labels.append(label)
        pairs.append(pair)
    return bags, vocab, labels, pairs


def _load_token_lines(path, vocab):
    docs, labels, pairs = [], [], []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            fields, label, pair = _split_annotations(line.split(), path, lineno)
            if not fields:
                if line.strip():
                    raise CorpusFormatError("document has no tokens", path, lineno)
                continue
            if vocab is not None:
                unknown = [t for t in fields if t not in vocab.index]
                if unknown:
                    raise DataError(f"{path}:{lineno}: tokens not in vocabulary: {unknown[:5]}")
            docs.append(fields)
            labels.append(label)
            pairs.append(pair)
    if not docs:
        raise CorpusFormatError("no documents", path)
    if vocab is None:
        seen: dict[str, None] = {}
        for doc in docs:
            for tok in doc:
                seen.setdefault(tok, None)
        vocab = Vocabulary(list(seen))
    bags = [Counter(vocab.index[t] for t in doc) for doc in docs]
    return bags, vocab, labels, pairs


def load_corpus(path, format: str = "bow", vocab: Vocabulary | None = None) -> Corpus:
    """Read a corpus file.

    ``bow``: a ``M V`` header, then one document per line of ``wordId:count``
    pairs. ``token-lines``: one whitespace-tokenized document per line.
    Either may end a line with ``#label=<int>`` and/or ``#pair=<int>``.
    """
    path = Path(path)
    if format == "bow":
        bags, vocab, labels, pairs = _load_bow(path, vocab)
    elif format in ("token-lines", "tokens"):
        bags, vocab, labels, pairs = _load_token_lines(path, vocab)
    else:
        raise ValueError(f"unknown corpus format {format!r}")
    return from_bags(
        bags, vocab,
        labels=labels if any(x is not None for x in labels) else None,
        pairs=pairs if any(x is not None for x in pairs) else None,
    )


def save_bow(corpus: Corpus, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{corpus.n_docs} {corpus.n_words}\n")
        for d in range(corpus.n_docs):
            ids, cts = corpus.doc(d)
            fields = [f"{w}:{int(c)}" for w, c in zip(ids, cts)]
            if corpus.labels is not None and corpus.labels[d] is not None:
                fields.append(f"#label={corpus.labels[d]}")
            if corpus.pairs is not None and corpus.pairs[d] is not None:
                fields.append(f"#pair={corpus.pairs[d]}")
            fh.write(" ".join(fields) + "\n")


def load_stopwords(path=None) -> frozenset[str]:
    """One token per line; ``None`` loads the bundled English list."""
    if path is None:
        text = resources.files("wrlda").joinpath("data/stopwords_en.txt").read_text(encoding="utf-8")
    else:
        text = Path(path).read_text(encoding="utf-8")
    return frozenset(w.strip() for w in text.splitlines() if w.strip() and not w.startswith("#"))


def _filter_once(corpus, stopwords, min_count, max_doc_frac, frequency):
    totals = corpus.term_totals()
    keep = totals >= min_count
    if stopwords:
        keep &= np.array([t not in stopwords for t in corpus.vocab.tokens], dtype=bool)
    if max_doc_frac < 1:
        freq = totals if frequency == "occurrences" else corpus.doc_frequency()
        keep &= ~(freq > max_doc_frac * corpus.n_docs)

    keep_ids = np.flatnonzero(keep)
    remap = np.full(corpus.n_words, -1, dtype=np.int64)
    remap[keep_ids] = np.arange(keep_ids.size)
    bags, kept_docs, dropped = [], [], []
    for d in range(corpus.n_docs):
        ids, cts = corpus.doc(d)
        new = remap[ids]
        mask = new >= 0
        if not mask.any():
            dropped.append(d)
            continue
        bags.append(dict(zip(new[mask].tolist(), cts[mask].astype(int).tolist())))
        kept_docs.append(d)
    if not bags:
        raise DataError("all documents are empty after filtering")
    sub = lambda v: None if v is None else [v[d] for d in kept_docs]  # noqa: E731
    out = from_bags(bags, corpus.vocab.subset(keep_ids), labels=sub(corpus.labels), pairs=sub(corpus.pairs))
    return out, kept_docs, dropped


def preprocess(corpus: Corpus, stopwords: Iterable[str] = (), min_count: int = 0,
               max_doc_frac: float = 1.0, frequency: str = "occurrences") -> Corpus:
    """Drop stopwords, rare tokens and over-frequent tokens, then reindex.

    A token is removed if its total count is below ``min_count`` or if its
    frequency exceeds ``max_doc_frac * M``. ``frequency`` selects what is
    compared: total ``"occurrences"`` (default) or ``"documents"`` containing
    the token. ``max_doc_frac=1`` disables the cap, so the call with
    ``min_count=0``, ``max_doc_frac=1`` and no stopwords is the identity
    even for tokens occurring more than M times. Documents left empty are dropped with a warning. Filtering is
    repeated until nothing changes, since dropping documents lowers M and
    therefore the frequency cap; the result is a fixed point, so applying
    ``preprocess`` again returns the same corpus.
    """
    if min_count < 0:
        raise ValueError("min_count must be >= 0")
    if not 0 < max_doc_frac <= 1:
        raise ValueError("max_doc_frac must be in (0, 1]")
    if frequency not in ("occurrences", "documents"):
        raise ValueError("frequency must be 'occurrences' or 'documents'")
    stopwords = frozenset(stopwords)
    origin = list(range(corpus.n_docs))
    dropped_all: list[int] = []
    while True:
        out, kept, dropped = _filter_once(corpus, stopwords, min_count, max_doc_frac, frequency)
        dropped_all.extend(origin[d] for d in dropped)
        origin = [origin[d] for d in kept]
        unchanged = out.n_words == corpus.n_words and out.n_docs == corpus.n_docs
        corpus = out
        if unchanged:
            break
    if dropped_all:
        warnings.warn(f"dropped {len(dropped_all)} empty documents: {sorted(dropped_all)}", stacklevel=2)
        log.info("dropped documents %s", sorted(dropped_all))
    return corpus
