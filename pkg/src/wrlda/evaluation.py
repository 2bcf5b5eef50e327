"""Topic-proportion distances, topic agreement, and the class-separation score."""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .corpus import Vocabulary
from .errors import DataError

KL_FLOOR = 1e-12


def topic_proportions(gamma):
    """Normalize each row of gamma to sum to one."""
    gamma = np.asarray(gamma, dtype=np.float64)
    return gamma / gamma.sum(axis=-1, keepdims=True)


def _floor(p, floor):
    p = np.maximum(np.asarray(p, dtype=np.float64), floor)
    if p.ndim == 1:
        return p / math.fsum(p)
    return p / np.array([math.fsum(row) for row in p])[:, None]


def _log(p):
    # math.log per entry keeps results identical to a scalar recomputation
    return np.array([math.log(x) for x in p.ravel()]).reshape(p.shape)


def _row_fsum(terms):
    return np.array([math.fsum(row) for row in terms])


def kl_divergence(p, q, floor=KL_FLOOR) -> float:
    """KL(p || q) after flooring both arguments at ``floor`` and renormalizing."""
    p = np.asarray(p, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    if p.shape != q.shape:
        raise ValueError(f"length mismatch: {p.shape} vs {q.shape}")
    p, q = _floor(p, floor), _floor(q, floor)
    return math.fsum(p * (_log(p) - _log(q)))


def kl_matrix(props, floor=KL_FLOOR):
    """``out[i, j] = KL(props[i] || props[j])``."""
    p = _floor(props, floor)
    logp = _log(p)
    out = np.empty((p.shape[0], p.shape[0]))
    for i in range(p.shape[0]):
        out[i] = _row_fsum(p[i] * (logp[i] - logp))
    return out


def _sigmoid(x):
    return 1.0 / (1.0 + math.exp(-x))


def tune_metric_m(props, labels, floor=KL_FLOOR) -> float:
    """Class-separation score used to pick the smoothing weight.

    Mean of ``1 - sigmoid(KL)`` over ordered same-class pairs plus mean of
    ``sigmoid(KL)`` over ordered cross-class pairs (self-pairs excluded).
    Equals 1 when all proportions coincide and approaches 1.5 as classes
    separate; values below 1 mean same-class documents are further apart
    than cross-class ones.
    All sums are correctly rounded (``math.fsum``).
    """
    props = np.asarray(props, dtype=np.float64)
    labels = np.asarray(labels)
    if props.ndim != 2 or labels.shape != (props.shape[0],):
        raise ValueError("need one label per document")
    if np.unique(labels).size < 2:
        raise DataError("need at least two classes")
    kl = kl_matrix(props, floor)
    within, cross = [], []
    for i in range(kl.shape[0]):
        for j in range(kl.shape[0]):
            if i == j:
                continue
            s = _sigmoid(kl[i, j])
            if labels[i] == labels[j]:
                within.append(1.0 - s)
            else:
                cross.append(s)
    first = math.fsum(within) / len(within) if within else 0.0
    return first + math.fsum(cross) / len(cross)


def top_k_topics(p, k):
    """Indices of the ``k`` largest entries, ties broken by lower index."""
    return np.argsort(-np.asarray(p), kind="stable")[:k]


@dataclass
class EvalReport:
    l2d: float = float("nan")
    hd: float = float("nan")
    a1: float = float("nan")
    a5: float = float("nan")
    m_score: float = float("nan")
    n_pairs: int = 0
    top_n: int = 5
    details: list[tuple] = field(default_factory=list, repr=False)

    def to_dict(self):
        d = asdict(self)
        d.pop("details")
        return {k: (None if isinstance(v, float) and np.isnan(v) else v) for k, v in d.items()}

    def write_json(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")

    def write_details(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("docA,docB,l2,hellinger,agree1,agree5\n")
            for a, b, l2, hd, g1, g5 in self.details:
                fh.write(f"{a},{b},{l2!r},{hd!r},{int(g1)},{int(g5)}\n")


def pair_metrics(props_a, props_b, pairs, top_n=5) -> EvalReport:
    """Distances and topic agreement between paired documents.

    ``props_a[i]`` is compared with ``props_b[j]`` for each ``(i, j)`` in
    ``pairs``. L2-D is the mean Euclidean distance, H-D the mean of
    ``sum_k (sqrt(p_k) - sqrt(q_k))**2`` (range [0, 2]), A-1 the fraction of
    pairs with the same top topic and A-5 the mean overlap of the top
    ``min(top_n, K)`` topic sets. Sums are correctly rounded, so the values
    do not depend on summation order.
    """
    pa = np.asarray(props_a, dtype=np.float64)
    pb = np.asarray(props_b, dtype=np.float64)
    pairs = list(pairs)
    if not pairs:
        raise DataError("no document pairs")
    if pa.shape[1] != pb.shape[1]:
        raise ValueError("topic counts differ")
    ia = np.array([i for i, _ in pairs])
    ib = np.array([j for _, j in pairs])
    if ia.min() < 0 or ia.max() >= len(pa) or ib.min() < 0 or ib.max() >= len(pb):
        raise DataError("pair index out of range")
    n = min(top_n, pa.shape[1])
    x, y = pa[ia], pb[ib]
    d = x - y
    l2 = np.sqrt(_row_fsum(d * d))
    h = np.sqrt(x) - np.sqrt(y)
    hd = _row_fsum(h * h)
    order_x = np.argsort(-x, axis=1, kind="stable")
    order_y = np.argsort(-y, axis=1, kind="stable")
    agree1 = order_x[:, 0] == order_y[:, 0]
    agree5 = np.array([len(set(tx[:n]) & set(ty[:n])) for tx, ty in zip(order_x, order_y)])
    details = [(int(a), int(b), float(l), float(h), bool(g1), int(g5))
               for a, b, l, h, g1, g5 in zip(ia, ib, l2, hd, agree1, agree5)]
    m = len(pairs)
    return EvalReport(l2d=math.fsum(l2) / m, hd=math.fsum(hd) / m, a1=int(agree1.sum()) / m,
                      a5=int(agree5.sum()) / m, n_pairs=m, top_n=n, details=details)


def top_words(beta, topic: int, n: int, vocab: Vocabulary | None = None):
    """The ``n`` most probable words of a topic, ties broken by word id."""
    beta = np.asarray(beta)
    if not 0 <= topic < beta.shape[0]:
        raise IndexError(f"topic {topic} out of range [0, {beta.shape[0]})")
    if n > beta.shape[1]:
        raise ValueError(f"n={n} exceeds vocabulary size {beta.shape[1]}")
    ids = top_k_topics(beta[topic], n)
    if vocab is None:
        return ids.tolist()
    return [vocab.tokens[i] for i in ids]


def translation_gap(beta, word_pairs):
    """Mean over word pairs of ``sum_k |beta_k,a - beta_k,b|``."""
    beta = np.asarray(beta)
    a = np.array([i for i, _ in word_pairs])
    b = np.array([j for _, j in word_pairs])
    return float(np.abs(beta[:, a] - beta[:, b]).sum(axis=0).mean())
