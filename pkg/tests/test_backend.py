import os
import subprocess
import sys

import numpy as np
import pytest

from wrlda import _backend, _pykernels
from wrlda.lda import safe_log
from wrlda.synthetic import lda_corpus, random_graph
from wrlda.wr import FitConfig, fit

kernels = pytest.importorskip("wrlda._kernels")


@pytest.fixture(scope="module")
def problem():
    corpus, _, _ = lda_corpus(60, 80, 4, seed=11)
    rng = np.random.default_rng(2)
    alpha = rng.uniform(0.1, 1.0, 4)
    log_beta = np.ascontiguousarray(safe_log(rng.dirichlet(np.full(80, 0.3), size=4)))
    return corpus, alpha, log_beta


@pytest.mark.parametrize("warm", [False, True])
def test_e_step_kernels_agree(problem, warm):
    corpus, alpha, log_beta = problem
    g0 = np.ascontiguousarray(np.random.default_rng(0).uniform(0.5, 5, (corpus.n_docs, 4))) if warm else None
    args = (corpus.doc_ptr, corpus.word_ids, corpus.counts, alpha, log_beta, 1e-10, 500, g0)
    a, b = kernels.e_step_corpus(*args), _pykernels.e_step_corpus(*args)
    for x, y in zip(a[:3], b[:3]):
        np.testing.assert_allclose(x, y, rtol=1e-10, atol=1e-10)
    assert a[4] == b[4] == -1


def test_bad_document_reported_by_both(problem):
    corpus, alpha, log_beta = problem
    lb = log_beta.copy()
    w = corpus.word_ids[corpus.doc_ptr[7]]
    lb[:, w] = np.nan
    first = min(d for d in range(corpus.n_docs) if w in corpus.doc(d)[0])
    args = (corpus.doc_ptr, corpus.word_ids, corpus.counts, alpha, lb, 1e-6, 50)
    assert kernels.e_step_corpus(*args)[4] == first
    assert _pykernels.e_step_corpus(*args)[4] == first


def test_full_fit_agrees_across_backends(problem, monkeypatch):
    corpus, _, _ = problem
    graph = random_graph(corpus.n_words, 100, seed=4)
    cfg = FitConfig(n_topics=4, lam=0.05, max_em_iter=8)
    monkeypatch.setattr(_backend, "e_step_corpus", kernels.e_step_corpus)
    a = fit(corpus, graph, cfg)
    monkeypatch.setattr(_backend, "e_step_corpus", _pykernels.e_step_corpus)
    b = fit(corpus, graph, cfg)
    np.testing.assert_allclose(a.params.beta, b.params.beta, rtol=1e-8, atol=1e-12)
    assert a.trace[-1].O == pytest.approx(b.trace[-1].O, rel=1e-10)


def test_pure_python_switch():
    env = dict(os.environ, WRLDA_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "import wrlda; print(wrlda.backend)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
    assert _backend.NAME == "cython"
