"""Topic discovery over document embeddings.

Embeddings are PCA-reduced, clustered with density-based scanning (noise
points become outliers labeled -1), and each cluster is described by
class-based TF-IDF keywords: weight(t, c) = tf(t, c) * ln(1 + A / f(t))
where A is the mean token count per class and f(t) the corpus-wide count.
Topic quality is scored with a pairwise log co-occurrence coherence over
the top keywords.
"""

from __future__ import annotations

import math
from collections import Counter, deque
from dataclasses import dataclass, field, replace

import numpy as np

from .schemas import DocumentSet, EmbeddingMatrix, Topic, TopicAssignment
from .textnorm import NormalizationConfig, normalize


@dataclass
class TopicConfig:
    """Knobs for the reduce -> cluster -> describe pipeline."""

    target_dim: int = 5
    eps: float = 0.5
    min_pts: int = 5
    n_keywords: int = 5
    top_m: int = 5
    min_token_chars: int = 2
    seed: int = 0

    def __post_init__(self) -> None:
        if self.target_dim < 1:
            raise ValueError("target_dim must be positive")
        if self.eps <= 0:
            raise ValueError("eps must be positive")
        if self.min_pts < 1:
            raise ValueError("min_pts must be at least 1")
        if self.n_keywords < 1 or self.top_m < 1:
            raise ValueError("keyword counts must be positive")


@dataclass
class CtfidfModel:
    """Sufficient statistics for class-based TF-IDF scoring."""

    classes: list[int]
    tf: dict[int, dict[str, int]]
    corpus_freq: dict[str, int]
    avg_tokens: float

    @property
    def vocabulary(self) -> list[str]:
        return sorted(self.corpus_freq)

    def weight(self, term: str, cls: int) -> float:
        count = self.tf[cls].get(term, 0)
        if count == 0:
            return 0.0
        return count * math.log(1.0 + self.avg_tokens / self.corpus_freq[term])


@dataclass
class CoherenceReport:
    per_topic: dict[int, float]
    mean: float
    skipped_pairs: int = 0


def reduce_dimensions(emb: EmbeddingMatrix, target_dim: int, seed: int = 0) -> EmbeddingMatrix:
    """Project embeddings onto their top principal components.

    Components are ordered by descending explained variance, with each
    component's sign fixed so its largest-magnitude coordinate is positive.
    When target_dim >= dim the input is returned unchanged. The solver is
    exact, so `seed` only exists to keep stage signatures uniform.
    """
    if target_dim < 1:
        raise ValueError("target_dim must be positive")
    if target_dim >= emb.dim:
        return emb
    if emb.count < 2:
        raise ValueError("dimension reduction needs at least 2 points")
    centered = emb.values - emb.values.mean(axis=0)
    _, _, vt = np.linalg.svd(centered, full_matrices=True)
    components = vt[:target_dim].copy()
    for row in components:
        anchor = np.argmax(np.abs(row))
        if row[anchor] < 0:
            row *= -1.0
    return EmbeddingMatrix(centered @ components.T, list(emb.doc_ids))


def _pairwise_sq_distances(points: np.ndarray) -> np.ndarray:
    # Differences summed per pair (not the |x|^2 expansion) so results match
    # a plain per-coordinate accumulation bit for bit at small dims.
    n = points.shape[0]
    d2 = np.empty((n, n), dtype=np.float64)
    for i in range(n):
        d2[i] = ((points - points[i]) ** 2).sum(axis=1)
    return d2


def cluster(emb: EmbeddingMatrix, eps: float = 0.5, min_pts: int = 5) -> TopicAssignment:
    """Density-based clustering with Euclidean distances.

    A point is core when its eps-ball (itself included) holds at least
    min_pts points. Clusters are grown from core points scanned in row
    order, expanding neighbor lists in ascending index order, so labels are
    deterministic: cluster ids count up from 0 in discovery order and noise
    points get -1.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    if min_pts < 1:
        raise ValueError("min_pts must be at least 1")
    n = emb.count
    if n == 0:
        raise ValueError("cannot cluster an empty matrix")
    d2 = _pairwise_sq_distances(emb.values)
    threshold = eps * eps
    neighbors = [np.flatnonzero(d2[i] <= threshold) for i in range(n)]
    core = np.array([len(nb) >= min_pts for nb in neighbors])

    UNVISITED = -2
    labels = np.full(n, UNVISITED, dtype=int)
    next_id = 0
    for i in range(n):
        if labels[i] != UNVISITED:
            continue
        if not core[i]:
            labels[i] = -1
            continue
        labels[i] = next_id
        queue = deque(int(j) for j in neighbors[i])
        while queue:
            j = queue.popleft()
            if labels[j] == -1:
                labels[j] = next_id  # noise point reachable from a core: border
            if labels[j] != UNVISITED:
                continue
            labels[j] = next_id
            if core[j]:
                queue.extend(int(m) for m in neighbors[j])
        next_id += 1
    return TopicAssignment({doc_id: int(label) for doc_id, label in zip(emb.doc_ids, labels)})


def build_ctfidf(docs_by_topic: dict[int, list[list[str]]]) -> CtfidfModel:
    """Accumulate per-class term counts and corpus statistics."""
    if not docs_by_topic:
        raise ValueError("no classes given")
    tf: dict[int, dict[str, int]] = {}
    totals: dict[int, int] = {}
    for cls, docs in docs_by_topic.items():
        counts: Counter[str] = Counter()
        for doc in docs:
            counts.update(doc)
        if not counts:
            raise ValueError(f"class {cls} has no tokens after filtering")
        tf[cls] = dict(counts)
        totals[cls] = sum(counts.values())
    corpus_freq: Counter[str] = Counter()
    for counts in tf.values():
        corpus_freq.update(counts)
    avg_tokens = sum(totals.values()) / len(totals)
    return CtfidfModel(sorted(tf), tf, dict(corpus_freq), avg_tokens)


def class_keywords(model: CtfidfModel, cls: int, n: int = 5) -> list[tuple[str, float]]:
    """Top-n terms of one class by weight, ties broken lexicographically."""
    scored = [(term, model.weight(term, cls)) for term in model.tf[cls]]
    scored.sort(key=lambda pair: (-pair[1], pair[0]))
    return scored[:n]


def ctfidf_keywords(
    docs_by_topic: dict[int, list[list[str]]], n: int = 5
) -> dict[int, list[tuple[str, float]]]:
    model = build_ctfidf(docs_by_topic)
    return {cls: class_keywords(model, cls, n) for cls in model.classes}


def coherence(
    topic_terms: dict[int, list[str]],
    token_docs: list[list[str]],
    top_m: int = 5,
) -> CoherenceReport:
    """Pairwise log co-occurrence coherence of topic keywords.

    For keywords w_1..w_m in rank order the topic scores
    sum over i>j of log((D(w_i, w_j) + 1) / D(w_j)) where D counts documents.
    Pairs whose reference keyword w_j never occurs are skipped and tallied
    in the report instead of producing -inf.
    """
    doc_sets = [set(doc) for doc in token_docs]
    doc_freq: Counter[str] = Counter()
    for members in doc_sets:
        doc_freq.update(members)

    per_topic: dict[int, float] = {}
    skipped = 0
    for topic_id, terms in topic_terms.items():
        terms = terms[:top_m]
        total = 0.0
        for i in range(1, len(terms)):
            for j in range(i):
                ref_count = doc_freq.get(terms[j], 0)
                if ref_count == 0:
                    skipped += 1
                    continue
                both = sum(1 for members in doc_sets if terms[i] in members and terms[j] in members)
                total += math.log((both + 1) / ref_count)
        per_topic[topic_id] = total
    mean = sum(per_topic.values()) / len(per_topic) if per_topic else 0.0
    return CoherenceReport(per_topic, mean, skipped)


def fit_topics(
    corpus: DocumentSet,
    embeddings: EmbeddingMatrix,
    config: TopicConfig | None = None,
    norm_config: NormalizationConfig | None = None,
) -> tuple[TopicAssignment, list[Topic], CoherenceReport]:
    """Full topic pass: reduce, cluster, keyword extraction, coherence.

    The corpus and embedding matrix must be aligned row for row. Documents
    are re-normalized in topic mode here; tokens shorter than
    config.min_token_chars are dropped before keyword counting.
    """
    config = config or TopicConfig()
    if norm_config is None:
        norm_config = NormalizationConfig(mode="topic")
    elif norm_config.mode != "topic":
        norm_config = replace(norm_config, mode="topic")
    if embeddings.doc_ids != corpus.ids:
        raise ValueError("embeddings are not aligned with the corpus")

    if embeddings.count >= 2:
        reduced = reduce_dimensions(embeddings, config.target_dim, config.seed)
    else:
        reduced = embeddings
    assignment = cluster(reduced, config.eps, config.min_pts)

    token_docs = []
    for doc in corpus:
        tokens = normalize(doc.text, norm_config, source_id=doc.id).tokens
        token_docs.append([t for t in tokens if len(t) >= config.min_token_chars])

    members: dict[int, list[str]] = {}
    docs_by_topic: dict[int, list[list[str]]] = {}
    for row, doc_id in enumerate(corpus.ids):
        topic_id = assignment.mapping[doc_id]
        if topic_id < 0:
            continue
        members.setdefault(topic_id, []).append(doc_id)
        docs_by_topic.setdefault(topic_id, []).append(token_docs[row])

    if docs_by_topic:
        keywords = ctfidf_keywords(docs_by_topic, config.n_keywords)
    else:
        keywords = {}
    topics = [
        Topic(topic_id, members[topic_id], keywords[topic_id]) for topic_id in sorted(members)
    ]
    terms = {t.topic_id: [term for term, _w in t.keywords] for t in topics}
    coherence_report = coherence(terms, token_docs, config.top_m)
    return assignment, topics, coherence_report


def topic_report(
    assignment: TopicAssignment,
    topics: list[Topic],
    coherence_report: CoherenceReport,
    params: dict | None = None,
) -> dict:
    """Assemble the serializable topic report."""
    params = dict(params or {})
    params.setdefault("clustering", "dbscan")
    params.setdefault("coherence_skipped_pairs", coherence_report.skipped_pairs)
    return {
        "k": assignment.k,
        "outliers": len(assignment.outlier_ids),
        "topics": [
            {
                "id": topic.topic_id,
                "size": topic.size,
                "keywords": [[term, weight] for term, weight in topic.keywords],
                "coherence": coherence_report.per_topic.get(topic.topic_id, 0.0),
            }
            for topic in topics
        ],
        "mean_coherence": coherence_report.mean,
        "params": params,
    }
