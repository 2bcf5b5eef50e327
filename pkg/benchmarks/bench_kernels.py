"""Time the compiled kernels against the numpy fallback.

    python benchmarks/bench_kernels.py --docs 500 --words 2000 --topics 20
"""
import argparse
import sys
import timeit

import numpy as np

from wrlda import _pykernels
from wrlda.synthetic import lda_corpus

try:
    from wrlda import _kernels
except ImportError:
    _kernels = None


def best_of(fn, repeat):
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--docs", type=int, default=300)
    ap.add_argument("--words", type=int, default=1000)
    ap.add_argument("--topics", type=int, default=20)
    ap.add_argument("--points", type=int, default=200_000, help="digamma/trigamma input size")
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    if _kernels is None:
        print("compiled extension not built; nothing to compare", file=sys.stderr)
        return 1

    corpus, beta, _ = lda_corpus(args.docs, args.words, args.topics, seed=args.seed)
    rng = np.random.default_rng(args.seed)
    alpha = np.full(args.topics, 0.5)
    log_beta = np.ascontiguousarray(np.log(beta))
    x = rng.uniform(1e-3, 50.0, args.points)

    cases = {
        "e_step_corpus": lambda m: m.e_step_corpus(corpus.doc_ptr, corpus.word_ids, corpus.counts,
                                                   alpha, log_beta, 1e-6, 100),
        "digamma": lambda m: m.digamma(x),
        "trigamma": lambda m: m.trigamma(x),
    }
    print(f"docs={args.docs} words={args.words} topics={args.topics} nnz={corpus.word_ids.size} "
          f"points={args.points}")
    print(f"{'kernel':<16}{'numpy [s]':>12}{'cython [s]':>12}{'speedup':>10}")
    for name, call in cases.items():
        t_py = best_of(lambda: call(_pykernels), args.repeat)
        t_cy = best_of(lambda: call(_kernels), args.repeat)
        print(f"{name:<16}{t_py:>12.4f}{t_cy:>12.4f}{t_py / t_cy:>9.1f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
