"""Command-line interface: ``wrlda fit | eval | topics | graph``.

Exit codes: 0 success, 1 configuration error, 2 data error, 3 numerical
failure. Diagnostics go to standard error.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import logging
import sys
import time
from pathlib import Path


from . import __version__
from ._backend import NAME as BACKEND
from .corpus import load_corpus, load_stopwords, load_vocab, preprocess, save_bow, save_vocab
from .errors import ConfigError, DataError, NumericalError
from .evaluation import EvalReport, pair_metrics, top_words, topic_proportions, tune_metric_m
from .graph import (WordGraph, build_dictionary_graph, load_dictionary, load_graph, project_graph,
                    restrict_cross_lingual, save_graph, validate_graph_file)
from .lda import e_step
from .persist import load_model, read_matrix_csv, save_model, write_matrix_csv, write_trace_csv
from .wr import FitConfig, fit

log = logging.getLogger("wrlda")

EXIT_CONFIG, EXIT_DATA, EXIT_NUMERIC = 1, 2, 3


class _Parser(argparse.ArgumentParser):
    # usage mistakes are configuration errors, not data errors
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _warn(msg):
    print(f"warning: {msg}", file=sys.stderr)


def _sha256(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _read_corpus(args, vocab=None):
    if vocab is None and getattr(args, "vocab", None):
        vocab = load_vocab(args.vocab)
    return load_corpus(args.corpus, format=args.format, vocab=vocab)


def cmd_fit(args) -> int:
    timings = {}
    t0 = time.perf_counter()
    corpus = raw = _read_corpus(args)
    if args.stopwords or args.default_stopwords or args.min_count or args.max_doc_frac < 1:
        stop = set()
        if args.default_stopwords:
            stop |= load_stopwords()
        if args.stopwords:
            stop |= load_stopwords(args.stopwords)
        corpus = preprocess(corpus, stop, args.min_count, args.max_doc_frac, args.frequency)
    timings["load"] = time.perf_counter() - t0

    if args.weights is not None and args.lam is not None:
        raise ConfigError("give either --lambda or --weights, not both")
    lam = 0.5 if args.lam is None else args.lam
    config = FitConfig(n_topics=args.topics, lam=lam, rho=args.rho, eta=args.eta, em_tol=args.tol,
                       max_em_iter=args.max_iters, max_smooth_iter=args.max_smooth_iters,
                       e_tol=args.e_tol, max_e_iter=args.max_e_iters, seed=args.seed,
                       weights=tuple(args.weights) if args.weights else None, workers=args.workers)

    t0 = time.perf_counter()
    if args.graph:
        graph = load_graph(args.graph, raw.vocab)
        if corpus is not raw:
            graph = project_graph(graph, raw.vocab, corpus.vocab)
        if args.cross_lingual_only:
            graph = restrict_cross_lingual(graph, corpus.vocab)
    else:
        if args.cross_lingual_only:
            raise ConfigError("--cross-lingual-only needs --graph")
        graph = WordGraph.empty(corpus.n_words)
        if config.loss_weight > 0:
            _warn("empty graph: R≡0, fitting standard LDA")
    timings["graph"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    result = fit(corpus, graph, config)
    timings["fit"] = time.perf_counter() - t0

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    save_model(out / "model.bin", result.params, corpus.vocab)
    write_matrix_csv(out / "gamma.csv", result.state.gamma, [f"topic{k}" for k in range(config.n_topics)])
    write_trace_csv(out / "trace.csv", result.trace)
    save_vocab(corpus.vocab, out / "vocab.txt")
    save_bow(corpus, out / "corpus.bow")
    inputs = {"corpus": {"path": str(args.corpus), "sha256": _sha256(args.corpus)}}
    for name in ("graph", "vocab", "stopwords"):
        path = getattr(args, name)
        if path:
            inputs[name] = {"path": str(path), "sha256": _sha256(path)}
    cfg = {k: (list(v) if isinstance(v, tuple) else v) for k, v in vars(config).items()}
    manifest = {
        "version": __version__, "backend": BACKEND, "seed": config.seed, "config": cfg,
        "cross_lingual_only": bool(args.cross_lingual_only),
        "preprocess": {"min_count": args.min_count, "max_doc_frac": args.max_doc_frac,
                       "frequency": args.frequency, "default_stopwords": bool(args.default_stopwords)},
        "inputs": inputs, "n_docs": corpus.n_docs, "n_words": corpus.n_words, "n_edges": graph.n_edges,
        "iterations": len(result.trace), "converged": result.converged,
        "final": {"L": result.trace[-1].L, "R": result.trace[-1].R, "O": result.trace[-1].O},
        "timings_sec": timings,
    }
    with open(out / "manifest.json", "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"{len(result.trace)} iterations, O={result.trace[-1].O:.6f}, "
          f"{'converged' if result.converged else 'iteration cap reached'}; wrote {out}")
    return 0


def _read_pairs(path):
    pairs = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            parts = line.replace(",", " ").split()
            if not parts:
                continue
            try:
                a, b = (int(x) for x in parts)
            except ValueError:
                raise DataError(f"{path}:{lineno}: expected two document indices") from None
            pairs.append((a, b))
    return pairs


def _read_labels(path):
    with open(path, encoding="utf-8") as fh:
        return [int(x) for x in fh.read().split()]


def cmd_eval(args) -> int:
    params, vocab = load_model(args.model)
    corpus = _read_corpus(args, vocab)
    if args.gamma:
        gamma = read_matrix_csv(args.gamma)
        if gamma.shape != (corpus.n_docs, params.n_topics):
            raise DataError(f"gamma is {gamma.shape}, expected ({corpus.n_docs}, {params.n_topics})")
    else:
        gamma = e_step(corpus, params, args.e_tol, args.max_e_iters)[0].gamma
    props = topic_proportions(gamma)

    want_pairs = args.pairs is not None
    want_labels = args.labels is not None
    if not (want_pairs or want_labels):
        want_pairs, want_labels = corpus.pairs is not None, corpus.labels is not None
        if not (want_pairs or want_labels):
            raise DataError("corpus has neither pair nor label annotations")

    report = EvalReport()
    if want_pairs:
        pairs = _read_pairs(args.pairs) if args.pairs else corpus.paired_docs()
        report = pair_metrics(props, props, pairs)
    if want_labels:
        if not args.labels:
            if corpus.labels is None or any(x is None for x in corpus.labels):
                raise DataError("corpus is missing #label annotations")
            labels = list(corpus.labels)
        else:
            labels = _read_labels(args.labels)
        if len(labels) != corpus.n_docs:
            raise DataError(f"{len(labels)} labels for {corpus.n_docs} documents")
        report.m_score = tune_metric_m(props, labels)

    if args.out:
        report.write_json(args.out)
    else:
        json.dump(report.to_dict(), sys.stdout, indent=2, sort_keys=True)
        print()
    if args.detail:
        if not report.details:
            raise DataError("--detail needs pair annotations")
        report.write_details(args.detail)
    return 0


def cmd_topics(args) -> int:
    params, vocab = load_model(args.model)
    n = args.n
    if n > len(vocab):
        _warn(f"--n {n} exceeds vocabulary size {len(vocab)}; using {len(vocab)}")
        n = len(vocab)
    rows = [(k, top_words(params.beta, k, n, vocab), top_words(params.beta, k, n)) for k in range(params.n_topics)]
    if args.csv:
        print("topic,rank,token,prob")
        for k, toks, ids in rows:
            for r, (t, i) in enumerate(zip(toks, ids)):
                print(f"{k},{r},{t},{params.beta[k, i]!r}")
    else:
        width = len(str(params.n_topics - 1))
        for k, toks, _ in rows:
            print(f"topic {k:>{width}}: {' '.join(toks)}")
    return 0


def cmd_graph(args) -> int:
    vocab = load_vocab(args.vocab)
    if args.graph_cmd == "build-dict":
        graph, skipped = build_dictionary_graph(load_dictionary(args.dict), vocab)
        save_graph(graph, vocab, args.out)
        print(f"{graph.n_edges} edges, {skipped} pairs skipped")
    elif args.graph_cmd == "validate":
        problems = validate_graph_file(args.graph, vocab)
        if problems:
            for p in problems:
                print(p, file=sys.stderr)
            return EXIT_DATA
        load_graph(args.graph, vocab).validate()
        print("ok")
    else:
        stats = load_graph(args.graph, vocab).stats(vocab)
        json.dump(stats, sys.stdout, indent=2, sort_keys=True)
        print()
    return 0


def _add_corpus_args(p):
    p.add_argument("--format", choices=["bow", "token-lines"], default="bow")
    p.add_argument("--vocab", help="vocabulary file (token[<TAB>lang] per line)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="wrlda", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__} ({BACKEND} kernels)")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="cmd", required=True, parser_class=_Parser)

    p = sub.add_parser("fit", help="fit LDA / WR-LDA")
    p.add_argument("corpus")
    _add_corpus_args(p)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--topics", type=int, required=True)
    p.add_argument("--lambda", dest="lam", type=float, default=None,
                   help="likelihood weight in [0, 1] (default 0.5)")
    p.add_argument("--weights", type=float, nargs=2, metavar=("WL", "WR"),
                   help="raw weights for O = WL*L - WR*R instead of --lambda")
    p.add_argument("--rho", type=float, default=0.5)
    p.add_argument("--eta", type=float, default=1e-8)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-iters", type=int, default=200)
    p.add_argument("--tol", type=float, default=1e-6, help="relative objective change to stop EM")
    p.add_argument("--e-tol", type=float, default=1e-5)
    p.add_argument("--max-e-iters", type=int, default=100)
    p.add_argument("--max-smooth-iters", type=int, default=50)
    p.add_argument("--graph", help="edge list token1<TAB>token2<TAB>weight")
    p.add_argument("--cross-lingual-only", action="store_true",
                   help="keep only edges between words of different languages")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--stopwords", help="stopword file to remove")
    p.add_argument("--default-stopwords", action="store_true", help="remove the bundled English stopwords")
    p.add_argument("--min-count", type=int, default=0)
    p.add_argument("--max-doc-frac", type=float, default=1.0)
    p.add_argument("--frequency", choices=["occurrences", "documents"], default="occurrences")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("eval", help="pair distances / agreement and class-separation score")
    p.add_argument("--model", required=True)
    p.add_argument("--corpus", required=True)
    p.add_argument("--format", choices=["bow", "token-lines"], default="bow")
    p.add_argument("--gamma", help="gamma CSV from fit (default: infer with the model)")
    p.add_argument("--pairs", nargs="?", const="", default=None,
                   help="pair metrics; optional file of 'docA docB' lines (default: #pair annotations)")
    p.add_argument("--labels", nargs="?", const="", default=None,
                   help="class-separation score; optional file of labels (default: #label annotations)")
    p.add_argument("--out", help="report JSON path (default: stdout)")
    p.add_argument("--detail", help="per-pair CSV path")
    p.add_argument("--e-tol", type=float, default=1e-5)
    p.add_argument("--max-e-iters", type=int, default=100)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("topics", help="top words per topic")
    p.add_argument("--model", required=True)
    p.add_argument("--n", type=int, default=10)
    p.add_argument("--csv", action="store_true")
    p.set_defaults(func=cmd_topics)

    p = sub.add_parser("graph", help="build, validate, or summarize a word graph")
    gsub = p.add_subparsers(dest="graph_cmd", required=True, parser_class=_Parser)
    g = gsub.add_parser("build-dict", help="unit edges from a source<TAB>target dictionary")
    g.add_argument("--dict", required=True)
    g.add_argument("--vocab", required=True)
    g.add_argument("--out", required=True)
    for name in ("validate", "stats"):
        g = gsub.add_parser(name)
        g.add_argument("--graph", required=True)
        g.add_argument("--vocab", required=True)
    p.set_defaults(func=cmd_graph)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.cmd == "topics" and args.n < 1:
            raise ConfigError("--n must be >= 1")
        return args.func(args)
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (DataError, OSError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
