"""WR-LDA: LDA whose topic-word M-step is pulled toward a word graph.

The fitted objective is ``O = wL * L - wR * R`` where ``L`` is the
variational bound and ``R(beta) = sum over edges of
kappa_ij * sum_k (beta_ki - beta_kj)**2``. With ``lam`` in [0, 1] the weights
are ``(lam, 1 - lam)``; ``weights=(wL, wR)`` overrides them for sweeps on
an unbounded scale.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .corpus import Corpus
from .errors import ConfigError, NumericalError
from .graph import WordGraph
from .lda import (ModelParams, SufficientStats, VariationalState, _xlogy, e_step, elbo,
                  mstep_beta_mle, update_alpha_newton)

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class FitConfig:
    n_topics: int
    lam: float = 0.5
    rho: float = 0.5
    eta: float = 1e-8
    e_tol: float = 1e-5
    em_tol: float = 1e-6
    max_e_iter: int = 100
    max_em_iter: int = 200
    max_smooth_iter: int = 50
    alpha_tol: float = 1e-8
    max_alpha_iter: int = 100
    seed: int = 0
    weights: tuple[float, float] | None = None
    workers: int = 1

    def __post_init__(self):
        if int(self.n_topics) < 1:
            raise ConfigError("n_topics must be >= 1")
        if not 0 <= self.lam <= 1:
            raise ConfigError("lam must be in [0, 1]")
        if not 0 <= self.rho <= 1:
            raise ConfigError("rho must be in [0, 1]")
        if self.eta < 0:
            raise ConfigError("eta must be >= 0")
        for name in ("max_e_iter", "max_em_iter", "max_smooth_iter", "max_alpha_iter", "workers"):
            if int(getattr(self, name)) < 1:
                raise ConfigError(f"{name} must be >= 1")
        for name in ("e_tol", "em_tol", "alpha_tol"):
            if not getattr(self, name) >= 0:
                raise ConfigError(f"{name} must be >= 0")
        if self.weights is not None:
            wl, wr = self.weights
            if wl < 0 or wr < 0 or wl + wr == 0:
                raise ConfigError("weights must be nonnegative and not both zero")
            object.__setattr__(self, "weights", (float(wl), float(wr)))

    @property
    def likelihood_weight(self) -> float:
        return self.weights[0] if self.weights is not None else float(self.lam)

    @property
    def loss_weight(self) -> float:
        return self.weights[1] if self.weights is not None else 1.0 - float(self.lam)


@dataclass(frozen=True)
class IterationRecord:
    iteration: int
    L: float
    R: float
    O: float
    delta: float
    # generalized M-step bookkeeping, evaluated with gamma, phi, alpha fixed
    o_start: float = float("nan")
    o_accepted: float = float("nan")
    r_start: float = float("nan")
    r_accepted: float = float("nan")
    smooth_steps: int = 0


@dataclass(frozen=True)
class FitResult:
    params: ModelParams
    state: VariationalState
    trace: list[IterationRecord] = field(default_factory=list)
    converged: bool = False

    def trace_array(self):
        return np.array([(r.L, r.R, r.O) for r in self.trace])


def loss_r(beta, graph: WordGraph) -> float:
    """Graph smoothness penalty; each unordered edge counted once."""
    beta = np.asarray(beta, dtype=np.float64)
    if beta.ndim != 2 or beta.shape[1] != graph.n_words:
        raise ValueError(f"beta has shape {beta.shape}, graph has {graph.n_words} words")
    if graph.n_edges == 0:
        return 0.0
    diff = beta[:, graph.rows] - beta[:, graph.cols]
    return float((diff * diff).sum(axis=0) @ graph.weights)


def objective_o(L, R, lam=None, weights=None):
    """``lam * L - (1 - lam) * R``, or ``wL * L - wR * R`` with explicit weights."""
    if weights is None:
        if lam is None:
            raise ValueError("give lam or weights")
        weights = (lam, 1.0 - lam)
    wl, wr = weights
    # skip the product when a weight is zero so an infinite term cannot produce nan
    return (wl * L if wl else 0.0) - (wr * R if wr else 0.0)


def smooth_beta_step(beta, graph: WordGraph, rho: float):
    """One synchronous neighbour-averaging sweep, then row renormalization.

    ``beta_kw <- rho beta_kw + (1 - rho) sum_w' kappa_ww' beta_kw' / deg(w)``
    for every word with positive degree; isolated words keep their value.
    """
    beta = np.asarray(beta, dtype=np.float64)
    if graph.n_edges == 0 or rho == 1.0:
        out = beta.copy()
    else:
        deg = graph.degree
        linked = deg > 0
        neigh = np.asarray(graph.matrix @ beta.T).T  # K x V
        out = beta.copy()
        out[:, linked] = rho * beta[:, linked] + (1.0 - rho) * neigh[:, linked] / deg[linked]
    return out / out.sum(axis=1, keepdims=True)


@dataclass(frozen=True)
class BetaUpdate:
    beta: np.ndarray
    beta_start: np.ndarray
    o_start: float
    o_accepted: float
    r_start: float
    r_accepted: float
    steps: int


def _beta_objective(beta, stats: SufficientStats, graph, wl, wr):
    L = stats.elbo_offset + float(_xlogy(stats.beta_num, beta).sum())
    R = loss_r(beta, graph)
    return objective_o(L, R, weights=(wl, wr)), L, R


def mstep_beta_wr(stats: SufficientStats, graph: WordGraph, config: FitConfig,
                  beta_prev=None) -> BetaUpdate:
    """Generalized M-step for beta.

    Starts from the maximum-likelihood beta, then applies smoothing sweeps
    while the objective (gamma, phi, alpha fixed) does not decrease. The
    returned beta is the last accepted iterate, so its objective is never
    below the starting one. If ``beta_prev`` scores higher than that iterate
    it is returned instead, so the objective never falls across EM
    iterations.
    """
    wl, wr = config.likelihood_weight, config.loss_weight
    beta0 = mstep_beta_mle(stats.beta_num, config.eta)
    o0, _, r0 = _beta_objective(beta0, stats, graph, wl, wr)
    if wr == 0 or graph.n_edges == 0:
        return BetaUpdate(beta0, beta0, o0, o0, r0, r0, 0)
    best, o_best, r_best = beta0, o0, r0
    steps = 0
    for _ in range(config.max_smooth_iter):
        cand = smooth_beta_step(best, graph, config.rho)
        o_c, _, r_c = _beta_objective(cand, stats, graph, wl, wr)
        if not o_c >= o_best:
            break
        best, o_best, r_best = cand, o_c, r_c
        steps += 1
    if beta_prev is not None:
        o_p, _, r_p = _beta_objective(beta_prev, stats, graph, wl, wr)
        if o_p > o_best:
            best, o_best, r_best = np.asarray(beta_prev, dtype=np.float64), o_p, r_p
    return BetaUpdate(best, beta0, o0, o_best, r0, r_best, steps)


def init_params(n_topics: int, n_words: int, seed: int) -> ModelParams:
    """alpha = 1/K; beta rows = uniform(0, 1) + 1 noise, normalized."""
    rng = np.random.default_rng(seed)
    beta = rng.uniform(size=(n_topics, n_words)) + 1.0
    beta /= beta.sum(axis=1, keepdims=True)
    return ModelParams(np.full(n_topics, 1.0 / n_topics), beta)


def _run_em(corpus: Corpus, graph: WordGraph, config: FitConfig, beta_step, weights) -> FitResult:
    params = init_params(config.n_topics, corpus.n_words, config.seed)
    wl, wr = weights
    trace: list[IterationRecord] = []
    prev_o = None
    converged = False
    state = None
    for it in range(1, config.max_em_iter + 1):
        try:
            state, stats = e_step(corpus, params, config.e_tol, config.max_e_iter, config.workers,
                                  previous=state)
        except NumericalError as exc:
            raise NumericalError(exc.message, doc=exc.doc, iteration=it) from exc
        upd = beta_step(stats, params.beta)
        alpha = update_alpha_newton(params.alpha, stats.alpha_ss, stats.n_docs,
                                    config.alpha_tol, config.max_alpha_iter)
        params = ModelParams(alpha, upd.beta)
        L = elbo(corpus, state, params)
        R = loss_r(params.beta, graph)
        O = objective_o(L, R, weights=(wl, wr))
        if not np.isfinite(O):
            raise NumericalError("objective is not finite", iteration=it)
        delta = float("nan") if prev_o is None else abs(O - prev_o) / max(abs(prev_o), 1e-300)
        trace.append(IterationRecord(it, L, R, O, delta, upd.o_start, upd.o_accepted,
                                     upd.r_start, upd.r_accepted, upd.steps))
        log.debug("iter %d L=%.6f R=%.6g O=%.6f delta=%.3g", it, L, R, O, delta)
        if prev_o is not None and delta < config.em_tol:
            converged = True
            break
        prev_o = O
    return FitResult(params, state, trace, converged)


def fit(corpus: Corpus, graph: WordGraph | None, config: FitConfig) -> FitResult:
    """Variational EM for WR-LDA (E-step, penalized beta step, alpha step)."""
    if corpus.n_docs == 0:
        raise ConfigError("corpus is empty")
    if graph is None:
        graph = WordGraph.empty(corpus.n_words)
    if graph.n_words != corpus.n_words:
        raise ConfigError(f"graph has {graph.n_words} words, corpus has {corpus.n_words}")
    return _run_em(corpus, graph, config, lambda stats, prev: mstep_beta_wr(stats, graph, config, prev),
                   (config.likelihood_weight, config.loss_weight))


def fit_lda(corpus: Corpus, config: FitConfig) -> FitResult:
    """Standard LDA: the same EM loop with the plain maximum-likelihood beta step."""
    if corpus.n_docs == 0:
        raise ConfigError("corpus is empty")
    graph = WordGraph.empty(corpus.n_words)

    def beta_step(stats, _prev):
        beta = mstep_beta_mle(stats.beta_num, config.eta)
        L = stats.elbo_offset + float(_xlogy(stats.beta_num, beta).sum())
        return BetaUpdate(beta, beta, L, L, 0.0, 0.0, 0)

    return _run_em(corpus, graph, config, beta_step, (1.0, 0.0))
