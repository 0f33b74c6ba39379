"""Corpus-level aggregation of classifier output.

Scores are simple count ratios: sentiment_score maps positive/negative
counts onto [-1, 1] and hate_rate onto [0, 1]; both define the empty case
as 0. Views bucket those scores over time (UTC days), over topics, and
across corpora, always in a deterministic order so reports are
byte-reproducible.
"""

from __future__ import annotations

from collections import Counter

from .schemas import (
    AnalysisReport,
    DocumentSet,
    PredictionSet,
    TemporalPoint,
    Topic,
    TopicAssignment,
    TopicInterpretation,
    TopicScore,
)
from .textnorm import NormalizationConfig, normalize


def sentiment_score(positive: int, negative: int) -> float:
    """(pos - neg) / (pos + neg), or 0.0 when there are no classified posts."""
    if positive < 0 or negative < 0:
        raise ValueError("counts must be non-negative")
    total = positive + negative
    if total == 0:
        return 0.0
    return (positive - negative) / total


def hate_rate(hate: int, total: int) -> float:
    """hate / total, or 0.0 when there are no classified posts."""
    if hate < 0 or total < 0:
        raise ValueError("counts must be non-negative")
    if hate > total:
        raise ValueError(f"hate count {hate} exceeds total {total}")
    if total == 0:
        return 0.0
    return hate / total


def share_ratio(a: float, b: float) -> float | None:
    """a / b for cross-corpus comparison: None when b is 0, exactly 1.0 when equal."""
    if b == 0:
        return None
    if a == b:
        return 1.0
    return a / b


def _bucket_key(timestamp, bucket: str) -> str:
    if bucket == "day":
        return timestamp.strftime("%Y-%m-%d")
    if bucket == "month":
        return timestamp.strftime("%Y-%m-01")
    raise ValueError(f"unknown bucket {bucket!r}, expected 'day' or 'month'")


def temporal_view(
    docs: DocumentSet,
    sentiment_preds: PredictionSet | None = None,
    hate_preds: PredictionSet | None = None,
    bucket: str = "day",
) -> tuple[list[TemporalPoint], int]:
    """Scores per time bucket, dates ascending.

    Documents without a timestamp contribute nowhere; their count is
    returned alongside the series as a diagnostic. A bucket's count is the
    number of dated documents in it, whether or not they were classified.
    """
    sentiment_label = sentiment_preds.label_of() if sentiment_preds else {}
    hate_label = hate_preds.label_of() if hate_preds else {}
    buckets: dict[str, dict[str, int]] = {}
    undated = 0
    for doc in docs:
        if doc.timestamp is None:
            undated += 1
            continue
        key = _bucket_key(doc.timestamp, bucket)
        stats = buckets.setdefault(
            key, {"count": 0, "pos": 0, "neg": 0, "hate": 0, "hate_total": 0}
        )
        stats["count"] += 1
        label = sentiment_label.get(doc.id)
        if label is not None:
            stats["pos" if label == "positive" else "neg"] += 1
        label = hate_label.get(doc.id)
        if label is not None:
            stats["hate_total"] += 1
            if label == "hate":
                stats["hate"] += 1
    series = [
        TemporalPoint(
            date=key,
            sentiment=sentiment_score(stats["pos"], stats["neg"]),
            hate=hate_rate(stats["hate"], stats["hate_total"]),
            count=stats["count"],
        )
        for key, stats in sorted(buckets.items())
    ]
    return series, undated


def _top_phrase(interp: TopicInterpretation | None) -> str:
    if interp is None:
        return ""
    pool = [
        (text, score)
        for phrases in interp.phrases_by_length.values()
        for text, score in phrases
    ]
    if not pool:
        return ""
    pool.sort(key=lambda pair: (-pair[1], pair[0]))
    return pool[0][0]


def topic_view(
    topics: list[Topic],
    interpretations: list[TopicInterpretation],
    sentiment_preds: PredictionSet | None = None,
    hate_preds: PredictionSet | None = None,
) -> tuple[list[TopicScore], list[int]]:
    """Scores per topic, ids ascending; outliers are never rows.

    Each row is labeled with the topic's top interpretation phrase (empty
    string when it has none). Topics whose members carry no predictions at
    all score 0 and are listed in the second return value.
    """
    sentiment_label = sentiment_preds.label_of() if sentiment_preds else {}
    hate_label = hate_preds.label_of() if hate_preds else {}
    by_id = {interp.topic_id: interp for interp in interpretations}
    scores: list[TopicScore] = []
    unclassified: list[int] = []
    for topic in sorted(topics, key=lambda t: t.topic_id):
        pos = neg = hateful = hate_total = 0
        for doc_id in topic.member_doc_ids:
            label = sentiment_label.get(doc_id)
            if label is not None:
                if label == "positive":
                    pos += 1
                else:
                    neg += 1
            label = hate_label.get(doc_id)
            if label is not None:
                hate_total += 1
                if label == "hate":
                    hateful += 1
        if pos + neg + hate_total == 0:
            unclassified.append(topic.topic_id)
        scores.append(
            TopicScore(
                topic_id=topic.topic_id,
                label=_top_phrase(by_id.get(topic.topic_id)),
                sentiment=sentiment_score(pos, neg),
                hate=hate_rate(hateful, hate_total),
                size=topic.size,
            )
        )
    return scores, unclassified


def dialect_summary(
    sentiment_preds: PredictionSet | None = None,
    hate_preds: PredictionSet | None = None,
) -> dict[str, float]:
    """Corpus-level negative and hate shares over the classified posts."""
    negative = sum(1 for r in sentiment_preds.records if r.label == "negative") if sentiment_preds else 0
    n_sent = len(sentiment_preds.records) if sentiment_preds else 0
    hateful = sum(1 for r in hate_preds.records if r.label == "hate") if hate_preds else 0
    n_hate = len(hate_preds.records) if hate_preds else 0
    return {
        "negative_share": negative / n_sent if n_sent else 0.0,
        "hate_share": hate_rate(hateful, n_hate),
    }


def dialect_view(reports: list[AnalysisReport]) -> dict:
    """Cross-corpus comparison table with pairwise share ratios.

    A single report yields its one row and no ratios. Ratios are keyed
    "a/b"; a zero denominator gives None rather than infinity.
    """
    rows = [
        {
            "corpus": report.name,
            "negative_share": report.dialect_summary.get("negative_share", 0.0),
            "hate_share": report.dialect_summary.get("hate_share", 0.0),
        }
        for report in reports
    ]
    ratios: dict[str, dict[str, float | None]] = {"negative_share": {}, "hate_share": {}}
    for i, a in enumerate(rows):
        for b in rows[i + 1 :]:
            for key in ("negative_share", "hate_share"):
                pair = f"{a['corpus']}/{b['corpus']}"
                ratios[key][pair] = share_ratio(a[key], b[key])
    return {"rows": rows, "ratios": ratios}


def word_frequencies(
    docs: DocumentSet,
    preds: PredictionSet,
    norm_config: NormalizationConfig | None = None,
    top_words: int = 50,
) -> dict[str, list[tuple[str, int]]]:
    """Most frequent topic-mode tokens per predicted class.

    Counts include multiplicity. Ranking is count descending with
    lexicographic ties, truncated to top_words per class.
    """
    if norm_config is None:
        norm_config = NormalizationConfig(mode="topic")
    labels = preds.label_of()
    counts: dict[str, Counter[str]] = {}
    for doc in docs:
        label = labels.get(doc.id)
        if label is None:
            continue
        tokens = normalize(doc.text, norm_config, source_id=doc.id).tokens
        counts.setdefault(label, Counter()).update(tokens)
    ranked: dict[str, list[tuple[str, int]]] = {}
    for label, counter in counts.items():
        ordered = sorted(counter.items(), key=lambda pair: (-pair[1], pair[0]))
        ranked[label] = ordered[:top_words]
    return ranked


def build_report(
    name: str,
    docs: DocumentSet,
    topics: list[Topic],
    assignment: TopicAssignment,
    interpretations: list[TopicInterpretation],
    sentiment_preds: PredictionSet | None = None,
    hate_preds: PredictionSet | None = None,
    norm_config: NormalizationConfig | None = None,
    bucket: str = "day",
    top_words: int = 50,
) -> AnalysisReport:
    """Assemble the full corpus report from pipeline artifacts."""
    outliers = len(assignment.outlier_ids)
    covered = sum(topic.size for topic in topics) + outliers
    if covered != len(assignment.mapping):
        raise ValueError(
            f"topic sizes plus outliers cover {covered} documents, expected {len(assignment.mapping)}"
        )
    series, undated = temporal_view(docs, sentiment_preds, hate_preds, bucket)
    scores, unclassified = topic_view(topics, interpretations, sentiment_preds, hate_preds)
    frequencies: dict[str, list[tuple[str, int]]] = {}
    for preds in (sentiment_preds, hate_preds):
        if preds is not None and preds.records:
            frequencies.update(word_frequencies(docs, preds, norm_config, top_words))
    return AnalysisReport(
        name=name,
        temporal_series=series,
        topic_scores=scores,
        dialect_summary=dialect_summary(sentiment_preds, hate_preds),
        word_frequencies=frequencies,
        diagnostics={
            "corpus_size": len(docs),
            "undated_docs": undated,
            "outliers": outliers,
            "unclassified_topics": len(unclassified),
            "sentiment_predictions": len(sentiment_preds.records) if sentiment_preds else 0,
            "hate_predictions": len(hate_preds.records) if hate_preds else 0,
        },
    )
