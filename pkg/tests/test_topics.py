import math

import numpy as np
import pytest

from dialect_insights.schemas import Document, DocumentSet, EmbeddingMatrix
from dialect_insights.topics import (
    CoherenceReport,
    TopicConfig,
    build_ctfidf,
    class_keywords,
    cluster,
    coherence,
    ctfidf_keywords,
    fit_topics,
    reduce_dimensions,
    topic_report,
)

from conftest import BLOB_CENTERS, make_blobs
from oracles import dbscan_oracle


def _emb(values):
    values = np.asarray(values, dtype=float)
    return EmbeddingMatrix(values, [f"p{i}" for i in range(values.shape[0])])


# ---------------------------------------------------------------------------
# dimension reduction


def test_reduce_identity_when_target_covers_input():
    emb = _emb(np.random.default_rng(0).normal(size=(6, 4)))
    assert reduce_dimensions(emb, 4) is emb
    assert reduce_dimensions(emb, 9) is emb


def test_reduce_collinear_points_keep_all_variance():
    t = np.linspace(-2, 2, 9)
    emb = _emb(np.stack([t, 2 * t], axis=1))
    reduced = reduce_dimensions(emb, 1)
    assert reduced.dim == 1
    total = emb.values.var(axis=0).sum()
    kept = reduced.values.var(axis=0).sum()
    assert abs(total - kept) < 1e-9


def test_reduce_sign_convention_is_deterministic():
    # spread along direction (-3, 1); the fixed sign makes the dominant
    # coordinate positive, so that direction flips to (3, -1)/sqrt(10)
    emb = _emb([[-3.0, 1.0], [3.0, -1.0], [-6.0, 2.0], [6.0, -2.0], [0.0, 0.0]])
    reduced = reduce_dimensions(emb, 1)
    assert reduced.values[0, 0] == pytest.approx(-math.sqrt(10.0))
    assert reduced.values[1, 0] == pytest.approx(math.sqrt(10.0))


def test_reduce_duplicate_points_succeed():
    emb = _emb([[1.0, 2.0, 3.0], [1.0, 2.0, 3.0], [4.0, 5.0, 6.0], [4.0, 5.0, 6.0]])
    reduced = reduce_dimensions(emb, 2)
    assert reduced.values[:, 1].var() < 1e-18  # rank 1 after centering
    same = _emb(np.ones((3, 3)))
    assert np.allclose(reduce_dimensions(same, 2).values, 0.0)


def test_reduce_validation():
    emb = _emb(np.zeros((1, 4)))
    with pytest.raises(ValueError, match="at least 2"):
        reduce_dimensions(emb, 2)
    with pytest.raises(ValueError, match="positive"):
        reduce_dimensions(_emb(np.zeros((3, 3))), 0)


# ---------------------------------------------------------------------------
# clustering


def test_cluster_three_blobs_with_isolated_noise():
    rows = make_blobs(np.array([[0.0, 0.0], [2.0, 0.0], [0.0, 2.0]]), 6, 0.05, seed=3)
    rows = np.vstack([rows, [10.0, 10.0]])
    assignment = cluster(_emb(rows), eps=0.3, min_pts=4)
    labels = [assignment.mapping[f"p{i}"] for i in range(19)]
    assert labels[:6] == [0] * 6
    assert labels[6:12] == [1] * 6
    assert labels[12:18] == [2] * 6
    assert labels[18] == -1
    assert assignment.k == 3 and assignment.outlier_ids == ["p18"]


def test_cluster_identical_points_form_one_topic():
    assignment = cluster(_emb(np.zeros((7, 3))), eps=0.3, min_pts=4)
    assert set(assignment.mapping.values()) == {0}


def test_cluster_single_point_min_pts_one():
    assignment = cluster(_emb([[1.0, 1.0]]), eps=0.5, min_pts=1)
    assert assignment.mapping == {"p0": 0}
    assert cluster(_emb([[1.0, 1.0]]), eps=0.5, min_pts=2).mapping == {"p0": -1}


def test_cluster_validation():
    with pytest.raises(ValueError):
        cluster(_emb([[0.0]]), eps=0.0)
    with pytest.raises(ValueError):
        cluster(_emb([[0.0]]), eps=0.5, min_pts=0)


def test_cluster_matches_oracle_on_random_corpora():
    rng = np.random.default_rng(77)
    for trial in range(30):
        dim = int(rng.integers(2, 8))
        n_blobs = int(rng.integers(1, 4))
        centers = rng.uniform(-4, 4, size=(n_blobs, dim))
        per_blob = int(rng.integers(3, 25))
        points = make_blobs(centers, per_blob, float(rng.uniform(0.05, 0.6)), seed=trial)
        noise = rng.uniform(-5, 5, size=(int(rng.integers(0, 8)), dim))
        points = np.vstack([points, noise]) if noise.size else points
        eps = float(rng.uniform(0.2, 1.5))
        min_pts = int(rng.integers(1, 7))
        got = cluster(_emb(points), eps, min_pts)
        want = dbscan_oracle([list(row) for row in points], eps, min_pts)
        labels = [got.mapping[f"p{i}"] for i in range(points.shape[0])]
        assert labels == want, f"trial {trial} (n={points.shape[0]}, dim={dim})"


# ---------------------------------------------------------------------------
# class-based TF-IDF


def test_ctfidf_fixture_weights():
    docs_by_topic = {0: [["x"], ["x"], ["y"]], 1: [["y"], ["y"], ["z"]]}
    model = build_ctfidf(docs_by_topic)
    assert model.avg_tokens == 3.0
    assert model.corpus_freq == {"x": 2, "y": 3, "z": 1}
    assert model.weight("x", 0) == pytest.approx(2 * math.log(2.5))
    assert model.weight("z", 1) == pytest.approx(math.log(4.0))
    assert model.weight("y", 0) == pytest.approx(math.log(2.0))
    assert model.weight("z", 0) == 0.0


def test_ctfidf_single_class():
    model = build_ctfidf({0: [["a"], ["a"], ["a"]]})
    assert model.weight("a", 0) == pytest.approx(3 * math.log(2.0))


def test_ctfidf_exclusive_term_outranks_shared_term():
    docs_by_topic = {0: [["u", "v"]], 1: [["u", "w"]]}
    ranked = class_keywords(build_ctfidf(docs_by_topic), 0, n=2)
    assert [term for term, _w in ranked] == ["v", "u"]


def test_ctfidf_ranking_invariant_under_uniform_scaling():
    docs_by_topic = {0: [["x", "x", "y"], ["y", "z"]], 1: [["z", "z"], ["x", "w"]]}
    scaled = {cls: docs * 3 for cls, docs in docs_by_topic.items()}
    for cls in docs_by_topic:
        base = [t for t, _w in class_keywords(build_ctfidf(docs_by_topic), cls, n=10)]
        big = [t for t, _w in class_keywords(build_ctfidf(scaled), cls, n=10)]
        assert base == big


def test_ctfidf_tie_break_lexicographic():
    ranked = class_keywords(build_ctfidf({0: [["b", "a"]]}), 0, n=2)
    assert [term for term, _w in ranked] == ["a", "b"]


def test_ctfidf_empty_class_errors():
    with pytest.raises(ValueError, match="no classes"):
        build_ctfidf({})
    with pytest.raises(ValueError, match="class 1 has no tokens"):
        build_ctfidf({0: [["x"]], 1: [[]]})


# ---------------------------------------------------------------------------
# coherence


def test_coherence_pair_fixture():
    # w1 in 4 of 5 docs, w2 in the same 4: log((4+1)/4)
    docs = [["w1", "w2"]] * 4 + [["zz"]]
    report = coherence({0: ["w1", "w2"]}, docs)
    assert report.per_topic[0] == pytest.approx(math.log(5 / 4))
    assert report.mean == pytest.approx(math.log(5 / 4))
    assert report.skipped_pairs == 0


def test_coherence_disjoint_pair_fixture():
    docs = [["w1"]] * 5 + [["w2"]]
    report = coherence({0: ["w1", "w2"]}, docs)
    assert report.per_topic[0] == pytest.approx(math.log(1 / 5))


def test_coherence_identical_word_pair_positive():
    docs = [["w", "x"]] * 3 + [["y"]]
    report = coherence({0: ["w", "w"]}, docs)
    assert report.per_topic[0] == pytest.approx(math.log(4 / 3))
    assert report.per_topic[0] > 0


def test_coherence_unseen_reference_is_skipped_not_inf():
    docs = [["w1"]] * 3
    report = coherence({0: ["ghost", "w1"]}, docs)
    # pair (w1, ghost) has D(ghost)=0: skipped; nothing else contributes
    assert report.skipped_pairs == 1
    assert report.per_topic[0] == 0.0
    assert math.isfinite(report.mean)


def test_coherence_respects_top_m_and_rank_order():
    docs = [["a", "b", "c"]] * 2 + [["a"]]
    full = coherence({0: ["a", "b", "c"]}, docs, top_m=3)
    trimmed = coherence({0: ["a", "b", "c"]}, docs, top_m=2)
    # trimming drops the pairs that involve c
    assert trimmed.per_topic[0] == pytest.approx(math.log(3 / 3))
    assert full.per_topic[0] != trimmed.per_topic[0]
    assert coherence({}, docs).mean == 0.0


# ---------------------------------------------------------------------------
# full fit


def test_fit_topics_requires_alignment(synthetic_corpus):
    docs, emb = synthetic_corpus
    shuffled = EmbeddingMatrix(emb.values, list(reversed(emb.doc_ids)))
    with pytest.raises(ValueError, match="aligned"):
        fit_topics(docs, shuffled)


def test_fit_topics_recovers_synthetic_blobs(synthetic_corpus):
    docs, emb = synthetic_corpus
    assignment, topics, coherence_report = fit_topics(docs, emb, TopicConfig(eps=0.5, min_pts=4))
    assert assignment.k == 3
    assert len(assignment.outlier_ids) == 0
    # blob membership is exact: doc ids share the blob name prefix
    for topic in topics:
        prefixes = {doc_id.rstrip("0123456789") for doc_id in topic.member_doc_ids}
        assert len(prefixes) == 1
        assert topic.size == 20
        assert len(topic.keywords) == 5
    assert set(coherence_report.per_topic) == {0, 1, 2}


def test_fit_topics_blob_keywords_are_blob_vocabulary(synthetic_corpus):
    from conftest import BLOB_NAMES, BLOB_VOCAB, SHARED_TERM

    docs, emb = synthetic_corpus
    _assignment, topics, _report = fit_topics(docs, emb, TopicConfig(eps=0.5, min_pts=4))
    for topic in topics:
        blob = BLOB_NAMES.index(topic.member_doc_ids[0].rstrip("0123456789"))
        terms = [term for term, _w in topic.keywords]
        # the blob's dominant head term wins outright; the shared filler term
        # appears in every topic's list (dedup happens downstream)
        assert terms[0] == BLOB_VOCAB[blob][0]
        assert SHARED_TERM in terms
        assert set(terms) <= set(BLOB_VOCAB[blob]) | {SHARED_TERM}


def test_fit_topics_single_document():
    docs = DocumentSet([Document("d0", "يوم جميل اليوم")], "tiny")
    emb = EmbeddingMatrix(np.array([[0.5, 0.5]]), ["d0"])
    assignment, topics, _report = fit_topics(docs, emb, TopicConfig(min_pts=1))
    assert assignment.mapping == {"d0": 0}
    assert topics[0].size == 1


def test_fit_topics_rerun_is_identical(synthetic_corpus):
    docs, emb = synthetic_corpus
    config = TopicConfig(eps=0.5, min_pts=4)
    first = fit_topics(docs, emb, config)
    second = fit_topics(docs, emb, config)
    assert first[0].mapping == second[0].mapping
    r1 = topic_report(first[0], first[1], first[2])
    r2 = topic_report(second[0], second[1], second[2])
    assert r1 == r2


def test_topic_report_shape():
    rows = make_blobs(BLOB_CENTERS[:1], 5, 0.01, seed=1)
    emb = _emb(rows)
    docs = DocumentSet([Document(f"p{i}", "كرة قدم اليوم") for i in range(5)], "t")
    assignment, topics, coherence_report = fit_topics(docs, emb, TopicConfig(min_pts=2))
    report = topic_report(assignment, topics, coherence_report, {"eps": 0.5})
    assert set(report) == {"k", "outliers", "topics", "mean_coherence", "params"}
    assert report["k"] == 1 and report["outliers"] == 0
    entry = report["topics"][0]
    assert set(entry) == {"id", "size", "keywords", "coherence"}
    assert report["params"]["eps"] == 0.5
    assert report["params"]["clustering"] == "dbscan"
    assert report["params"]["coherence_skipped_pairs"] == 0


def test_topic_config_validation():
    with pytest.raises(ValueError):
        TopicConfig(target_dim=0)
    with pytest.raises(ValueError):
        TopicConfig(eps=-1.0)
    with pytest.raises(ValueError):
        TopicConfig(min_pts=0)
    with pytest.raises(ValueError):
        TopicConfig(n_keywords=0)


def test_ctfidf_keywords_covers_all_classes():
    ranked = ctfidf_keywords({0: [["x"]], 1: [["y"]]}, n=1)
    assert set(ranked) == {0, 1}
