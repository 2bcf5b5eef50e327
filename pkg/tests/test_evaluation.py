import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import bruteforce
from wrlda.corpus import Vocabulary
from wrlda.errors import DataError
from wrlda.evaluation import (kl_divergence, pair_metrics, top_words, topic_proportions, translation_gap,
                              tune_metric_m)


def test_kl_self_is_zero():
    assert kl_divergence([0.2, 0.3, 0.5], [0.2, 0.3, 0.5]) == 0.0


def test_kl_point_mass_vs_uniform():
    assert kl_divergence([1.0, 0.0], [0.5, 0.5]) == pytest.approx(math.log(2), abs=1e-10)


def test_kl_is_asymmetric():
    # mirror-image pair: equal by symmetry of the pair, not of KL
    assert kl_divergence([0.8, 0.2], [0.2, 0.8]) == pytest.approx(0.6 * math.log(4), rel=1e-12)
    c = [0.5, 0.3, 0.2]
    d = [0.1, 0.1, 0.8]
    assert kl_divergence(c, d) != pytest.approx(kl_divergence(d, c))


def test_kl_floor_keeps_it_finite():
    assert np.isfinite(kl_divergence([0.5, 0.5], [1.0, 0.0]))


def test_kl_length_mismatch():
    with pytest.raises(ValueError, match="length"):
        kl_divergence([0.5, 0.5], [1.0, 0.0, 0.0])


def test_m_identical_proportions():
    props = np.tile([0.2, 0.3, 0.5], (6, 1))
    assert tune_metric_m(props, [0, 0, 1, 1, 2, 2]) == 1.0


def test_m_separated_classes():
    eps = 1e-6
    props = np.array([[1 - eps, eps]] * 3 + [[eps, 1 - eps]] * 3)
    m = tune_metric_m(props, [0, 0, 0, 1, 1, 1])
    assert 1.0 < m < 1.5
    assert m > 1.49


def test_m_label_aligned_beats_random():
    rng = np.random.default_rng(0)
    labels = np.repeat([0, 1], 10)
    aligned = np.where(labels[:, None] == 0, [0.85, 0.1, 0.05], [0.05, 0.15, 0.8])
    aligned = aligned + rng.uniform(0, 0.05, aligned.shape)
    aligned /= aligned.sum(axis=1, keepdims=True)
    random = rng.dirichlet(np.ones(3), size=20)
    assert tune_metric_m(aligned, labels) > tune_metric_m(random, labels)


def test_m_needs_two_classes():
    with pytest.raises(DataError, match="two classes"):
        tune_metric_m(np.full((3, 2), 0.5), [1, 1, 1])


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.permutations(range(3)))
def test_m_invariant_to_class_relabeling(seed, perm):
    rng = np.random.default_rng(seed)
    props = rng.dirichlet(np.ones(4), size=9)
    labels = rng.integers(0, 3, 9)
    if np.unique(labels).size < 2:
        labels[0] = (labels[1] + 1) % 3
    relabeled = np.array(perm)[labels]
    assert tune_metric_m(props, relabeled) == tune_metric_m(props, labels)


def test_pairs_identical():
    p = np.random.default_rng(1).dirichlet(np.ones(6), size=4)
    r = pair_metrics(p, p, [(i, i) for i in range(4)])
    assert (r.l2d, r.hd, r.a1, r.a5) == (0.0, 0.0, 1.0, 5.0)


def test_pairs_disjoint_point_masses():
    r = pair_metrics(np.array([[1.0, 0.0]]), np.array([[0.0, 1.0]]), [(0, 0)])
    assert r.l2d == pytest.approx(math.sqrt(2), rel=1e-15)
    assert r.hd == 2.0 and r.a1 == 0.0 and r.a5 == 2.0


def test_pairs_tie_rule():
    # every topic tied: argmax is topic 0 on both sides
    r = pair_metrics(np.full((1, 7), 1 / 7), np.array([[0.1, 0.2, 0.1, 0.2, 0.1, 0.2, 0.1]]), [(0, 0)])
    assert r.a1 == 0.0  # 0 vs 1
    assert r.a5 == 4.0  # {0,1,2,3,4} vs {1,3,5,0,2}


def test_pairs_empty():
    with pytest.raises(DataError):
        pair_metrics(np.ones((1, 2)) / 2, np.ones((1, 2)) / 2, [])


@pytest.mark.parametrize("seed", range(10))
def test_pairs_match_bruteforce(seed):
    rng = np.random.default_rng(seed)
    K = int(rng.integers(2, 9))
    pa, pb = rng.dirichlet(np.full(K, 0.5), size=12), rng.dirichlet(np.full(K, 0.5), size=12)
    pairs = [tuple(x) for x in rng.integers(0, 12, size=(10, 2))]
    got = pair_metrics(pa, pb, pairs)
    want = bruteforce.pairs_report(pa.tolist(), pb.tolist(), pairs)
    assert {"l2d": got.l2d, "hd": got.hd, "a1": got.a1, "a5": got.a5} == want


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_pair_metrics_bounds_and_topic_permutation(seed):
    rng = np.random.default_rng(seed)
    K = int(rng.integers(2, 8))
    pa, pb = rng.dirichlet(np.full(K, 0.3), size=6), rng.dirichlet(np.full(K, 0.3), size=6)
    pairs = [(i, (i + 1) % 6) for i in range(6)]
    r = pair_metrics(pa, pb, pairs)
    assert 0 <= r.hd <= 2 and 0 <= r.l2d <= math.sqrt(2) + 1e-15
    assert 0 <= r.a1 <= 1 and 0 <= r.a5 <= min(5, K)
    perm = rng.permutation(K)
    q = pair_metrics(pa[:, perm], pb[:, perm], pairs)
    assert q.l2d == pytest.approx(r.l2d, rel=1e-12) and q.hd == pytest.approx(r.hd, rel=1e-12)
    # ties are measure-zero for continuous draws, so agreement counts are permutation invariant
    assert (q.a1, q.a5) == (r.a1, r.a5)


def test_report_files(tmp_path):
    p = np.array([[0.6, 0.4], [0.3, 0.7]])
    r = pair_metrics(p, p, [(0, 1)])
    r.write_json(tmp_path / "r.json")
    data = json.loads((tmp_path / "r.json").read_text())
    assert data["a1"] == 0.0 and data["m_score"] is None and data["n_pairs"] == 1
    r.write_details(tmp_path / "d.csv")
    lines = (tmp_path / "d.csv").read_text().splitlines()
    assert lines[0] == "docA,docB,l2,hellinger,agree1,agree5"
    assert lines[1].startswith("0,1,") and lines[1].endswith(",0,2")


def test_top_words():
    v = Vocabulary(["a", "b", "c"])
    assert top_words(np.array([[0.5, 0.3, 0.2]]), 0, 2, v) == ["a", "b"]
    beta = np.array([[0.2, 0.5, 0.3]])
    assert sorted(top_words(beta, 0, 3, v)) == ["a", "b", "c"]
    assert top_words(np.full((1, 3), 1 / 3), 0, 3, v) == ["a", "b", "c"]
    with pytest.raises(IndexError):
        top_words(beta, 1, 2, v)


def test_topic_proportions_sum_to_one():
    g = np.random.default_rng(0).uniform(0.1, 5, (5, 4))
    np.testing.assert_allclose(topic_proportions(g).sum(axis=1), 1.0, atol=1e-12)


def test_translation_gap():
    beta = np.array([[0.4, 0.1, 0.4, 0.1], [0.1, 0.4, 0.2, 0.3]])
    assert translation_gap(beta, [(0, 2), (1, 3)]) == pytest.approx(0.1, rel=1e-14)
