import warnings

import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from wrlda.corpus import (Corpus, Vocabulary, from_bags, from_token_lists, load_corpus, load_stopwords,
                          load_vocab, preprocess, save_bow, save_vocab)
from wrlda.errors import CorpusFormatError, DataError


def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text, encoding="utf-8")
    return p


def bag_of(corpus, d):
    ids, cts = corpus.doc(d)
    return {corpus.vocab.tokens[i]: int(c) for i, c in zip(ids, cts)}


def test_bow_two_documents(tmp_path):
    c = load_corpus(write(tmp_path, "c.bow", "2 3\n0:3 2:1\n1:2\n"))
    assert c.n_docs == 2 and c.n_words == 3
    np.testing.assert_array_equal(c.doc_lengths, [4, 2])


def test_empty_file_has_no_documents(tmp_path):
    for fmt in ("bow", "token-lines"):
        with pytest.raises(CorpusFormatError, match="no documents"):
            load_corpus(write(tmp_path, "e.txt", ""), format=fmt)


def test_token_lines(tmp_path):
    c = load_corpus(write(tmp_path, "t.txt", "a a b\nb c\n"), format="token-lines")
    assert c.vocab.tokens == ("a", "b", "c")
    assert bag_of(c, 0) == {"a": 2, "b": 1}
    assert bag_of(c, 1) == {"b": 1, "c": 1}


def test_annotations(tmp_path):
    c = load_corpus(write(tmp_path, "c.bow", "3 2\n0:1 #label=1 #pair=7\n1:1 #pair=7\n0:2 #label=0\n"))
    assert c.labels == (1, None, 0)
    assert c.pairs == (7, 7, None)
    assert c.paired_docs() == [(0, 1)]


@pytest.mark.parametrize("text,line", [
    ("2 3\n0:3 2:x\n1:2\n", 2),
    ("2 3\n0:3\n1;2\n", 3),
    ("2 3\n0:3\n1:0\n", 3),
    ("two 3\n0:1\n", 1),
])
def test_parse_error_cites_line(tmp_path, text, line):
    with pytest.raises(CorpusFormatError) as exc:
        load_corpus(write(tmp_path, "bad.bow", text))
    assert exc.value.line == line
    assert f":{line}:" in str(exc.value)


def test_out_of_range_id(tmp_path):
    with pytest.raises(DataError, match="out of range"):
        load_corpus(write(tmp_path, "c.bow", "1 3\n0:1 3:1\n"))


def test_document_count_mismatch(tmp_path):
    with pytest.raises(CorpusFormatError, match="declares 3"):
        load_corpus(write(tmp_path, "c.bow", "3 3\n0:1\n1:1\n"))


def test_duplicate_ids_merge(tmp_path):
    c = load_corpus(write(tmp_path, "c.bow", "1 3\n0:1 0:2 1:1\n"))
    assert bag_of(c, 0) == {"0": 3, "1": 1}


def test_token_lines_with_vocab_rejects_unknown(tmp_path):
    with pytest.raises(DataError, match="not in vocabulary"):
        load_corpus(write(tmp_path, "t.txt", "a z\n"), format="token-lines", vocab=Vocabulary(["a", "b"]))


def test_vocab_roundtrip(tmp_path):
    v = Vocabulary(["good", "好"], ["en", "zh"])
    save_vocab(v, tmp_path / "v.txt")
    assert load_vocab(tmp_path / "v.txt") == v


def test_bow_roundtrip(tmp_path, small_corpus):
    save_bow(small_corpus, tmp_path / "c.bow")
    back = load_corpus(tmp_path / "c.bow")
    np.testing.assert_array_equal(back.doc_ptr, small_corpus.doc_ptr)
    np.testing.assert_array_equal(back.word_ids, small_corpus.word_ids)
    np.testing.assert_array_equal(back.counts, small_corpus.counts)


def test_vocabulary_rejects_duplicates():
    with pytest.raises(DataError, match="duplicate"):
        Vocabulary(["a", "b", "a"])


def test_corpus_invariants_enforced():
    v = Vocabulary(["a", "b"])
    with pytest.raises(DataError):
        from_bags([{2: 1}], v)
    with pytest.raises(DataError):
        from_bags([{0: 0}], v)
    with pytest.raises(DataError, match="no tokens"):
        from_bags([{0: 1}, {}], v)


def test_corpus_is_read_only(small_corpus):
    with pytest.raises(ValueError):
        small_corpus.counts[0] = 5


def test_bundled_stopwords():
    stop = load_stopwords()
    assert {"the", "and", "of"} <= stop
    assert not any(w.startswith("#") for w in stop)


# preprocess ---------------------------------------------------------------

def test_min_count_removes_rare_token():
    c = from_token_lists([["a", "a", "b", "x"], ["b", "a", "c"], ["c", "b", "x", "a"]])
    out = preprocess(c, min_count=3)
    assert "x" not in out.vocab and "c" not in out.vocab
    assert set(out.vocab.tokens) == {"a", "b"}


def test_identity_filter(small_corpus):
    out = preprocess(small_corpus, stopwords=set(), min_count=0, max_doc_frac=1.0)
    assert out.vocab == small_corpus.vocab
    np.testing.assert_array_equal(out.word_ids, small_corpus.word_ids)
    np.testing.assert_array_equal(out.counts, small_corpus.counts)


def test_frequency_cap_twenty_documents():
    docs = [["w", f"u{d}"] if d < 3 else [f"u{d}"] for d in range(20)]
    c = from_token_lists(docs)
    out = preprocess(c, max_doc_frac=0.1, frequency="documents")
    assert "w" not in out.vocab
    out = preprocess(c, max_doc_frac=0.1)
    assert "w" not in out.vocab
    assert "u5" in out.vocab


def test_occurrence_vs_document_frequency():
    # "w" is in 2 of 20 documents but occurs 5 times
    docs = [["w", "w", "w", "a"], ["w", "w", "b"]] + [[f"u{d}"] for d in range(18)]
    c = from_token_lists(docs)
    assert "w" in preprocess(c, max_doc_frac=0.1, frequency="documents").vocab
    assert "w" not in preprocess(c, max_doc_frac=0.1, frequency="occurrences").vocab


def test_stopwords_and_empty_docs_dropped():
    c = from_token_lists([["the", "cat"], ["the", "of"], ["dog"]], labels=[0, 1, 2])
    with pytest.warns(UserWarning, match=r"\[1\]"):
        out = preprocess(c, stopwords={"the", "of"})
    assert out.n_docs == 2
    assert out.labels == (0, 2)
    assert bag_of(out, 0) == {"cat": 1}


def test_all_empty_raises():
    c = from_token_lists([["a"], ["b"]])
    with pytest.raises(DataError, match="empty"):
        preprocess(c, stopwords={"a", "b"})


def test_reindexing_preserves_counts(small_corpus):
    out = preprocess(small_corpus, min_count=5)
    kept = set(out.vocab.tokens)
    for d in range(out.n_docs):
        original = {t: c for t, c in bag_of(small_corpus, d).items() if t in kept}
        assert bag_of(out, d) == original


@pytest.mark.parametrize("kwargs", [dict(min_count=-1), dict(max_doc_frac=0), dict(max_doc_frac=1.5),
                                    dict(frequency="tf-idf")])
def test_bad_preprocess_arguments(small_corpus, kwargs):
    with pytest.raises(ValueError):
        preprocess(small_corpus, **kwargs)


bags = st.lists(st.dictionaries(st.integers(0, 11), st.integers(1, 6), min_size=1, max_size=6),
                min_size=2, max_size=25)


@settings(max_examples=80, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(bags=bags, min_count=st.integers(0, 6), frac=st.floats(0.05, 1.0),
       freq=st.sampled_from(["occurrences", "documents"]), stop=st.sets(st.sampled_from("0123456789"), max_size=3))
def test_preprocess_idempotent_and_bounds_hold(bags, min_count, frac, freq, stop):
    corpus = from_bags(bags, Vocabulary.range(12))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        try:
            once = preprocess(corpus, stop, min_count, frac, freq)
        except DataError:
            return
        twice = preprocess(once, stop, min_count, frac, freq)
    assert twice.vocab == once.vocab
    np.testing.assert_array_equal(twice.doc_ptr, once.doc_ptr)
    np.testing.assert_array_equal(twice.word_ids, once.word_ids)
    np.testing.assert_array_equal(twice.counts, once.counts)
    # rescan: every retained token satisfies both bounds
    totals = once.term_totals()
    assert np.all(totals >= min_count)
    if frac < 1:
        f = totals if freq == "occurrences" else once.doc_frequency()
        assert np.all(f <= frac * once.n_docs)
    assert not set(once.vocab.tokens) & stop


def test_corpus_type_exposes_csr(small_corpus):
    assert isinstance(small_corpus, Corpus)
    assert small_corpus.doc_ptr[-1] == small_corpus.word_ids.size
