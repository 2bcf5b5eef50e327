"""Variational LDA and WR-LDA, a variant whose topic-word step is smoothed over a word graph."""
from ._backend import NAME as backend
from .corpus import Corpus, Vocabulary, load_corpus, load_stopwords, preprocess
from .errors import ConfigError, CorpusFormatError, DataError, NumericalError, WRLDAError
from .evaluation import kl_divergence, pair_metrics, top_words, topic_proportions, tune_metric_m
from .graph import WordGraph, build_dictionary_graph, load_graph, restrict_cross_lingual
from .lda import ModelParams, SufficientStats, VariationalState, e_step, elbo, update_alpha_newton
from .wr import FitConfig, FitResult, fit, fit_lda, loss_r, mstep_beta_wr, objective_o, smooth_beta_step

__version__ = "0.1.0"

__all__ = [
    "backend", "Corpus", "Vocabulary", "load_corpus", "load_stopwords", "preprocess",
    "ConfigError", "CorpusFormatError", "DataError", "NumericalError", "WRLDAError",
    "kl_divergence", "pair_metrics", "top_words", "topic_proportions", "tune_metric_m",
    "WordGraph", "build_dictionary_graph", "load_graph", "restrict_cross_lingual",
    "ModelParams", "SufficientStats", "VariationalState", "e_step", "elbo", "update_alpha_newton",
    "FitConfig", "FitResult", "fit", "fit_lda", "loss_r", "mstep_beta_wr", "objective_o",
    "smooth_beta_step", "__version__",
]
