"""Variational inference for LDA: E-step, bound, and the standard M-step.

phi is kept per distinct word of each document (rows aligned with
``Corpus.word_ids``); a word occurring ``c`` times contributes ``c * phi``.
"""
from __future__ import annotations

import logging
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from . import _backend
from .corpus import Corpus
from .errors import DataError, NumericalError
from .special import digamma, trigamma

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class ModelParams:
    alpha: np.ndarray
    beta: np.ndarray

    def __post_init__(self):
        alpha = np.asarray(self.alpha, dtype=np.float64)
        beta = np.asarray(self.beta, dtype=np.float64)
        if alpha.ndim != 1 or beta.ndim != 2 or beta.shape[0] != alpha.size:
            raise DataError(f"alpha {alpha.shape} and beta {beta.shape} are inconsistent")
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "beta", beta)

    @property
    def n_topics(self):
        return self.alpha.size

    @property
    def n_words(self):
        return self.beta.shape[1]

    def check(self, tol=1e-9):
        if not np.all(self.alpha > 0):
            raise DataError("alpha must be positive")
        if np.any(self.beta < 0) or not np.allclose(self.beta.sum(axis=1), 1.0, rtol=0, atol=tol):
            raise DataError("beta rows must be probability distributions")


@dataclass(frozen=True)
class VariationalState:
    gamma: np.ndarray  # M x K
    phi: np.ndarray  # nnz x K, aligned with Corpus.word_ids


@dataclass(frozen=True)
class SufficientStats:
    """E-step output needed by the M-step.

    ``alpha_ss[k] = sum_d (digamma(gamma_dk) - digamma(sum_j gamma_dj))``.
    ``elbo_offset`` is the bound with the ``sum beta_num * log(beta)`` term
    removed, so ``L(beta') = elbo_offset + sum(beta_num * log(beta'))`` for
    any beta' with gamma, phi, alpha held fixed.
    """

    beta_num: np.ndarray
    alpha_ss: np.ndarray
    n_docs: int
    elbo_offset: float = 0.0

    def __add__(self, other):
        return SufficientStats(self.beta_num + other.beta_num, self.alpha_ss + other.alpha_ss,
                               self.n_docs + other.n_docs, self.elbo_offset + other.elbo_offset)


def dirichlet_expectation(gamma):
    """E[log theta] under Dir(gamma), row-wise."""
    gamma = np.asarray(gamma, dtype=np.float64)
    if gamma.ndim == 1:
        return digamma(gamma) - digamma(gamma.sum())
    return digamma(gamma) - digamma(gamma.sum(axis=1))[:, None]


def safe_log(x):
    with np.errstate(divide="ignore"):
        return np.log(x)


def _xlogy(x, y):
    """x * log(y) with 0 * log(0) = 0."""
    out = np.zeros(np.broadcast(x, y).shape)
    nz = np.broadcast_to(x, out.shape) != 0
    with np.errstate(divide="ignore"):
        out[nz] = (np.broadcast_to(x, out.shape)[nz] * np.log(np.broadcast_to(y, out.shape)[nz]))
    return out


def e_step_doc(word_ids, counts, alpha, beta, tol=1e-5, max_iter=100, doc=None, gamma_init=None):
    """Fit (gamma, phi) for one document by fixed-point iteration.

    Starts from phi = 1/K, gamma = alpha + N/K (or from ``gamma_init``) and
    alternates
    ``phi_wk ~ beta_kw exp(digamma(gamma_k))`` with
    ``gamma = alpha + sum_w count_w phi_w`` until the mean absolute change of
    gamma drops below ``tol`` or ``max_iter`` sweeps are done.
    """
    word_ids = np.ascontiguousarray(word_ids, dtype=np.int64)
    counts = np.ascontiguousarray(counts, dtype=np.float64)
    doc_ptr = np.array([0, word_ids.size], dtype=np.int64)
    alpha = np.ascontiguousarray(alpha, dtype=np.float64)
    log_beta = np.ascontiguousarray(safe_log(np.asarray(beta, dtype=np.float64)))
    if gamma_init is not None:
        gamma_init = np.ascontiguousarray(np.reshape(gamma_init, (1, -1)), dtype=np.float64)
    gamma, phi, _, _, bad = _backend.e_step_corpus(doc_ptr, word_ids, counts, alpha, log_beta,
                                                   float(tol), int(max_iter), gamma_init)
    if bad >= 0:
        raise NumericalError("non-finite variational update", doc=doc if doc is not None else 0)
    return gamma[0], phi


def _e_step_chunk(corpus, lo, hi, alpha, log_beta, tol, max_iter, gamma_init):
    ptr = corpus.doc_ptr[lo:hi + 1]
    start, stop = ptr[0], ptr[-1]
    g0 = None if gamma_init is None else np.ascontiguousarray(gamma_init[lo:hi])
    out = _backend.e_step_corpus(np.ascontiguousarray(ptr - start), corpus.word_ids[start:stop],
                                 corpus.counts[start:stop], alpha, log_beta, tol, max_iter, g0)
    return lo, out


def _select_docs(corpus: Corpus, docs):
    """CSR slices (doc_ptr, word_ids, counts, entry_index) for a subset of documents."""
    starts = corpus.doc_ptr[docs]
    lens = corpus.doc_ptr[np.asarray(docs) + 1] - starts
    entry = np.concatenate([np.arange(s, s + n) for s, n in zip(starts, lens)]) if len(docs) else \
        np.zeros(0, dtype=np.int64)
    ptr = np.concatenate([[0], np.cumsum(lens)]).astype(np.int64)
    return ptr, np.ascontiguousarray(corpus.word_ids[entry]), np.ascontiguousarray(corpus.counts[entry]), entry


def e_step(corpus: Corpus, params: ModelParams, tol=1e-5, max_iter=100, workers=1, gamma_init=None,
           previous: VariationalState | None = None):
    """Run the E-step over every document.

    Each document starts from ``gamma = alpha + N_d/K`` (or ``gamma_init``).
    When ``previous`` is given, any document whose resulting bound is lower
    than the bound of its previous (gamma, phi) under ``params`` is re-fitted
    starting from its previous gamma; coordinate ascent from there cannot go
    below the previous value, so the corpus bound never decreases across EM
    iterations. Fresh starts are kept otherwise because they escape the
    small-alpha fixed points a pure warm start tends to get stuck in.

    Returns ``(VariationalState, SufficientStats)``. With ``workers > 1`` the
    documents are split into contiguous chunks evaluated on threads (the
    compiled kernel releases the GIL); per-chunk statistics are summed in
    chunk order.
    """
    if corpus.n_words != params.n_words:
        raise DataError(f"corpus has V={corpus.n_words}, model has V={params.n_words}")
    alpha = np.ascontiguousarray(params.alpha)
    log_beta = np.ascontiguousarray(safe_log(params.beta))
    n_docs = corpus.n_docs
    workers = max(1, min(int(workers), n_docs))
    bounds = np.linspace(0, n_docs, workers + 1).astype(int)
    jobs = [(lo, hi) for lo, hi in zip(bounds[:-1], bounds[1:]) if hi > lo]
    if gamma_init is not None:
        gamma_init = np.ascontiguousarray(gamma_init, dtype=np.float64)
        if gamma_init.shape != (n_docs, params.n_topics):
            raise DataError("gamma_init does not match corpus/model shapes")
    run = lambda j: _e_step_chunk(corpus, j[0], j[1], alpha, log_beta,  # noqa: E731
                                  float(tol), int(max_iter), gamma_init)
    if len(jobs) == 1:
        results = [run(jobs[0])]
    else:
        with ThreadPoolExecutor(len(jobs)) as pool:
            results = list(pool.map(run, jobs))
    gammas, phis = [], []
    beta_num = None
    for lo, (gamma, phi, num, _iters, bad) in results:
        if bad >= 0:
            raise NumericalError("non-finite variational update", doc=lo + bad)
        gammas.append(gamma)
        phis.append(phi)
        beta_num = num if beta_num is None else beta_num + num
    state = VariationalState(np.vstack(gammas), np.vstack(phis))

    if previous is not None:
        state, refitted = _guard_against_previous(corpus, params, state, previous, alpha, log_beta,
                                                  float(tol), int(max_iter))
        if refitted:
            log.debug("E-step: %d documents restarted from previous gamma", refitted)
            beta_num = expected_counts(corpus, state.phi)

    elog = dirichlet_expectation(state.gamma)
    offset = elbo(corpus, state, params) - float(_xlogy(beta_num, params.beta).sum())
    return state, SufficientStats(beta_num, elog.sum(axis=0), n_docs, offset)


def _guard_against_previous(corpus, params, state, previous, alpha, log_beta, tol, max_iter):
    now = elbo(corpus, state, params, per_doc=True)
    before = elbo(corpus, previous, params, per_doc=True)
    worse = np.flatnonzero(now < before)
    if worse.size == 0:
        return state, 0
    ptr, ids, cts, entry = _select_docs(corpus, worse)
    g0 = np.ascontiguousarray(previous.gamma[worse])
    gamma, phi, _, _, bad = _backend.e_step_corpus(ptr, ids, cts, alpha, log_beta, tol, max_iter, g0)
    if bad >= 0:
        raise NumericalError("non-finite variational update", doc=int(worse[bad]))
    new_gamma = state.gamma.copy()
    new_phi = state.phi.copy()
    new_gamma[worse] = gamma
    new_phi[entry] = phi
    return VariationalState(new_gamma, new_phi), worse.size


def expected_counts(corpus: Corpus, phi):
    """K x V matrix of sum_d count_dw * phi_dwk."""
    weighted = corpus.counts[:, None] * phi
    return np.stack([np.bincount(corpus.word_ids, weights=weighted[:, k], minlength=corpus.n_words)
                     for k in range(phi.shape[1])])


def elbo(corpus: Corpus, state: VariationalState, params: ModelParams, per_doc=False):
    """Variational lower bound on the corpus log likelihood.

    Sum over documents of E[log p(theta|alpha)] + E[log p(z|theta)]
    + E[log p(w|z,beta)] - E[log q(theta)] - E[log q(z)].
    """
    gamma, phi = state.gamma, state.phi
    alpha, beta = params.alpha, params.beta
    if gamma.shape != (corpus.n_docs, params.n_topics) or phi.shape != (corpus.word_ids.size, params.n_topics):
        raise DataError("variational state does not match corpus/model shapes")
    if beta.shape[1] != corpus.n_words:
        raise DataError("beta does not match corpus vocabulary")
    elog = dirichlet_expectation(gamma)
    doc_of = np.repeat(np.arange(corpus.n_docs), np.diff(corpus.doc_ptr))
    wphi = corpus.counts[:, None] * phi

    theta_p = gammaln(alpha.sum()) - gammaln(alpha).sum() + elog @ (alpha - 1.0)
    theta_q = gammaln(gamma.sum(axis=1)) - gammaln(gamma).sum(axis=1) + ((gamma - 1.0) * elog).sum(axis=1)
    entry = (wphi * elog[doc_of]).sum(axis=1)
    entry += _xlogy(wphi, beta[:, corpus.word_ids].T).sum(axis=1)
    entry -= _xlogy(wphi, phi).sum(axis=1)
    words = np.bincount(doc_of, weights=entry, minlength=corpus.n_docs)
    docs = theta_p - theta_q + words
    if per_doc:
        return docs
    return float(docs.sum())


def mstep_beta_mle(beta_num, eta=1e-8):
    """beta_kw proportional to eta + expected count of word w in topic k."""
    beta_num = np.asarray(getattr(beta_num, "beta_num", beta_num), dtype=np.float64)
    if eta < 0:
        raise ValueError("eta must be >= 0")
    num = beta_num + eta
    totals = num.sum(axis=1, keepdims=True)
    if np.any(totals <= 0):
        raise NumericalError("topic with zero expected count and eta = 0")
    return num / totals


def alpha_objective(alpha, alpha_ss, n_docs):
    """The alpha-dependent part of the bound."""
    alpha = np.asarray(alpha, dtype=np.float64)
    return float(n_docs * (gammaln(alpha.sum()) - gammaln(alpha).sum()) + (alpha - 1.0) @ alpha_ss)


def alpha_gradient(alpha, alpha_ss, n_docs):
    alpha = np.asarray(alpha, dtype=np.float64)
    return n_docs * (digamma(alpha.sum()) - digamma(alpha)) + alpha_ss


def alpha_hessian_parts(alpha, n_docs):
    """Hessian = diag(h) + z * 1 1^T; returns (h, z)."""
    alpha = np.asarray(alpha, dtype=np.float64)
    return -n_docs * trigamma(alpha), n_docs * trigamma(alpha.sum())


def newton_direction(grad, h, z):
    """H^{-1} grad for H = diag(h) + z 1 1^T, in O(K)."""
    c = np.sum(grad / h) / (1.0 / z + np.sum(1.0 / h))
    return (grad - c) / h


def update_alpha_newton(alpha, alpha_ss, n_docs, tol=1e-8, max_iter=100):
    """Newton-Raphson on the Dirichlet hyperparameter.

    Each step is halved (up to 32 times) until alpha stays positive and the
    objective does not decrease. Stops when ``max |delta alpha| < tol``.
    """
    alpha = np.array(alpha, dtype=np.float64)
    alpha_ss = np.asarray(alpha_ss, dtype=np.float64)
    if not np.all(alpha > 0):
        raise ValueError("alpha must be positive")
    f = alpha_objective(alpha, alpha_ss, n_docs)
    for _ in range(max_iter):
        g = alpha_gradient(alpha, alpha_ss, n_docs)
        h, z = alpha_hessian_parts(alpha, n_docs)
        step = newton_direction(g, h, z)
        if np.max(np.abs(step)) < tol and np.all(alpha - step > 0):
            return alpha - step
        for _halving in range(33):
            candidate = alpha - step
            if np.all(candidate > 0) and np.all(np.isfinite(candidate)):
                f_new = alpha_objective(candidate, alpha_ss, n_docs)
                if f_new >= f:
                    break
            step = step / 2
        else:
            warnings.warn("alpha update: no improving positive step after 32 halvings", RuntimeWarning,
                          stacklevel=2)
            return alpha
        delta = np.max(np.abs(candidate - alpha))
        alpha, f = candidate, f_new
        if delta < tol:
            break
    return alpha
