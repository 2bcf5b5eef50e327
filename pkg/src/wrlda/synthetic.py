"""Synthetic corpora drawn from the LDA generative process."""
from __future__ import annotations

import numpy as np

from .corpus import Vocabulary, from_bags
from .graph import WordGraph


def lda_corpus(n_docs, n_words, n_topics, seed=0, alpha=0.5, topic_conc=0.1, doc_len=(40, 80)):
    """Documents from LDA with Dir(topic_conc) topics.

    Returns ``(corpus, true_beta, true_theta)``. Words absent from every
    document are kept in the vocabulary; the E-step is fine with that.
    """
    rng = np.random.default_rng(seed)
    beta = rng.dirichlet(np.full(n_words, topic_conc), size=n_topics)
    theta = rng.dirichlet(np.full(n_topics, alpha), size=n_docs)
    bags = []
    for d in range(n_docs):
        n = int(rng.integers(doc_len[0], doc_len[1] + 1))
        z = rng.choice(n_topics, size=n, p=theta[d])
        counts = np.zeros(n_words, dtype=np.int64)
        for k in np.unique(z):
            counts += rng.multinomial(int(np.sum(z == k)), beta[k])
        bags.append({int(w): int(c) for w, c in enumerate(counts) if c})
    vocab = Vocabulary([f"w{i}" for i in range(n_words)])
    return from_bags(bags, vocab), beta, theta


def random_graph(n_words, n_edges, seed=0, weight_range=(0.1, 1.0)) -> WordGraph:
    rng = np.random.default_rng(seed)
    edges = {}
    while len(edges) < n_edges:
        i, j = rng.integers(n_words, size=2)
        if i != j:
            edges[(min(i, j), max(i, j))] = float(rng.uniform(*weight_range))
    return WordGraph.from_edges(n_words, ((i, j, w) for (i, j), w in edges.items()))


def bilingual_corpus(n_pairs=200, n_topics=5, words_per_lang=100, seed=0, alpha=0.3,
                     doc_len=(20, 40), block_conc=5.0, background=0.02, mono_edges_per_word=2):
    """Paired monolingual documents from shared topic proportions.

    Languages ``en`` and ``zh`` each get ``words_per_lang`` words, split into
    one contiguous block per topic. English word ``i`` and Chinese word ``i``
    are translations and have the same topic-word probability. Each pair
    shares ``theta`` but draws its tokens independently.

    Returns ``(corpus, vocab, dictionary_pairs, mono_graph_edges, info)``;
    ``mono_graph_edges`` are unit edges between random same-topic words of
    one language (a stand-in for monolingual similarity).
    """
    rng = np.random.default_rng(seed)
    V = words_per_lang
    block = V // n_topics
    shared = np.full((n_topics, V), background / V)
    for k in range(n_topics):
        lo, hi = k * block, (k + 1) * block if k < n_topics - 1 else V
        shared[k, lo:hi] += (1 - background) * rng.dirichlet(np.full(hi - lo, block_conc))
    shared /= shared.sum(axis=1, keepdims=True)

    tokens = [f"en{i}" for i in range(V)] + [f"zh{i}" for i in range(V)]
    vocab = Vocabulary(tokens, ["en"] * V + ["zh"] * V)
    theta = rng.dirichlet(np.full(n_topics, alpha), size=n_pairs)
    bags, pairs = [], []
    for p in range(n_pairs):
        for offset in (0, V):
            n = int(rng.integers(doc_len[0], doc_len[1] + 1))
            z = rng.choice(n_topics, size=n, p=theta[p])
            counts = np.zeros(V, dtype=np.int64)
            for k in np.unique(z):
                counts += rng.multinomial(int(np.sum(z == k)), shared[k])
            bags.append({int(w) + offset: int(c) for w, c in enumerate(counts) if c})
            pairs.append(p)
    corpus = from_bags(bags, vocab, pairs=pairs)
    dictionary = [(f"en{i}", f"zh{i}") for i in range(V)]

    mono = []
    owner = np.argmax(shared, axis=0)
    for lang, offset in (("en", 0), ("zh", V)):
        for i in range(V):
            same = np.flatnonzero((owner == owner[i]) & (np.arange(V) != i))
            for j in rng.choice(same, size=min(mono_edges_per_word, same.size), replace=False):
                mono.append((f"{lang}{i}", f"{lang}{j}"))
    info = {"beta": shared, "theta": theta}
    return corpus, vocab, dictionary, mono, info


def bilingual_graph(vocab, dictionary, mono):
    """All correlations: dictionary edges plus monolingual same-topic edges."""
    idx = vocab.index
    edges = [(idx[a], idx[b], 1.0) for a, b in list(dictionary) + list(mono)]
    return WordGraph.from_edges(len(vocab), edges)
