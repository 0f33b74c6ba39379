"""Shared data shapes for the pipeline.

Every artifact that crosses a module boundary is defined here, so loaders,
algorithms, and the CLI all agree on one set of invariants. Validation is
eager: constructing an instance with inconsistent fields raises ValueError.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import datetime, timezone

import numpy as np

# Canonical class order per task. Model columns, metric tables, and report
# rows all follow this order.
TASK_CLASSES: dict[str, tuple[str, ...]] = {
    "sentiment": ("positive", "negative"),
    "hate": ("hate", "non-hate"),
}

TIMESTAMP_FORMAT = "%Y-%m-%dT%H:%M:%SZ"


class CorpusFormatError(ValueError):
    """Raised when an on-disk artifact violates its schema."""


def parse_timestamp(raw: str) -> datetime:
    """Parse a UTC timestamp of the form 2021-03-05T17:00:00Z."""
    try:
        dt = datetime.strptime(raw, TIMESTAMP_FORMAT)
    except ValueError as exc:
        raise CorpusFormatError(f"bad timestamp {raw!r}: {exc}") from exc
    return dt.replace(tzinfo=timezone.utc)


def format_timestamp(dt: datetime) -> str:
    return dt.astimezone(timezone.utc).strftime(TIMESTAMP_FORMAT)


@dataclass
class Document:
    """One social-media post with optional metadata."""

    id: str
    text: str
    timestamp: datetime | None = None
    dialect: str | None = None
    region: str | None = None
    label: str | None = None

    def __post_init__(self) -> None:
        if not isinstance(self.id, str) or not self.id:
            raise ValueError("document id must be a non-empty string")
        if not isinstance(self.text, str) or not self.text.strip():
            raise ValueError(f"document {self.id!r}: text is empty")


@dataclass
class DocumentSet:
    """An ordered corpus of documents with unique ids."""

    documents: list[Document]
    name: str = ""

    def __post_init__(self) -> None:
        seen: set[str] = set()
        for doc in self.documents:
            if doc.id in seen:
                raise ValueError(f"duplicate document id {doc.id!r}")
            seen.add(doc.id)

    def __len__(self) -> int:
        return len(self.documents)

    def __iter__(self):
        return iter(self.documents)

    @property
    def ids(self) -> list[str]:
        return [doc.id for doc in self.documents]

    def by_id(self, doc_id: str) -> Document:
        for doc in self.documents:
            if doc.id == doc_id:
                return doc
        raise KeyError(doc_id)

    def subset(self, ids: set[str] | frozenset[str], name: str = "") -> "DocumentSet":
        """Keep only documents whose id is in `ids`, preserving corpus order."""
        kept = [doc for doc in self.documents if doc.id in ids]
        return DocumentSet(kept, name or self.name)


@dataclass
class EmbeddingMatrix:
    """Dense document embeddings aligned with a list of document ids.

    Values are held as float64 in memory so downstream numerics keep full
    precision; the on-disk format stores float32.
    """

    values: np.ndarray
    doc_ids: list[str]

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.ndim != 2:
            raise ValueError(f"embeddings must be 2-D, got shape {self.values.shape}")
        if self.values.shape[1] < 1:
            raise ValueError("embedding dim must be positive")
        if len(self.doc_ids) != self.values.shape[0]:
            raise ValueError(
                f"{len(self.doc_ids)} doc ids for {self.values.shape[0]} embedding rows"
            )
        if len(set(self.doc_ids)) != len(self.doc_ids):
            raise ValueError("duplicate doc ids in embedding matrix")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("embedding matrix contains non-finite values")

    @property
    def count(self) -> int:
        return self.values.shape[0]

    @property
    def dim(self) -> int:
        return self.values.shape[1]

    def rows_for(self, ids: list[str]) -> "EmbeddingMatrix":
        """Select rows by document id, in the order given."""
        index = {doc_id: i for i, doc_id in enumerate(self.doc_ids)}
        missing = [i for i in ids if i not in index]
        if missing:
            raise KeyError(f"ids missing from embedding matrix: {missing[:5]}")
        rows = np.array([index[i] for i in ids], dtype=int)
        return EmbeddingMatrix(self.values[rows], list(ids))


@dataclass
class PredictionRecord:
    doc_id: str
    label: str
    confidence: float


@dataclass
class PredictionSet:
    """Classifier output for one task over a corpus."""

    task: str
    records: list[PredictionRecord]

    def __post_init__(self) -> None:
        if self.task not in TASK_CLASSES:
            raise ValueError(f"unknown task {self.task!r}")
        classes = set(TASK_CLASSES[self.task])
        seen: set[str] = set()
        for rec in self.records:
            if rec.label not in classes:
                raise ValueError(
                    f"prediction for {rec.doc_id!r} has label {rec.label!r}, "
                    f"expected one of {sorted(classes)}"
                )
            if not (0.0 <= rec.confidence <= 1.0):
                raise ValueError(
                    f"prediction for {rec.doc_id!r} has confidence {rec.confidence} "
                    "outside [0, 1]"
                )
            if rec.doc_id in seen:
                raise ValueError(f"duplicate prediction for doc id {rec.doc_id!r}")
            seen.add(rec.doc_id)

    def __len__(self) -> int:
        return len(self.records)

    def label_of(self) -> dict[str, str]:
        return {rec.doc_id: rec.label for rec in self.records}


@dataclass
class Topic:
    """A discovered topic: its members and ranked keywords."""

    topic_id: int
    member_doc_ids: list[str]
    keywords: list[tuple[str, float]] = field(default_factory=list)

    def __post_init__(self) -> None:
        if self.topic_id < 0:
            raise ValueError("topic_id must be non-negative")
        for i in range(1, len(self.keywords)):
            prev, cur = self.keywords[i - 1], self.keywords[i]
            if (-prev[1], prev[0]) > (-cur[1], cur[0]):
                raise ValueError("topic keywords must be sorted by weight desc, term asc")

    @property
    def size(self) -> int:
        return len(self.member_doc_ids)


@dataclass
class TopicAssignment:
    """doc_id -> topic id; -1 marks outliers, clusters are 0..k-1."""

    mapping: dict[str, int]

    def __post_init__(self) -> None:
        cluster_ids = sorted({t for t in self.mapping.values() if t >= 0})
        if cluster_ids != list(range(len(cluster_ids))):
            raise ValueError(f"cluster ids must be contiguous from 0, got {cluster_ids}")
        if any(t < -1 for t in self.mapping.values()):
            raise ValueError("topic ids below -1 are not allowed")

    @property
    def k(self) -> int:
        return len({t for t in self.mapping.values() if t >= 0})

    @property
    def outlier_ids(self) -> list[str]:
        return [d for d, t in self.mapping.items() if t == -1]

    def members_of(self, topic_id: int) -> list[str]:
        return [d for d, t in self.mapping.items() if t == topic_id]


@dataclass
class TopicInterpretation:
    """Representative phrases for one topic, grouped by phrase length."""

    topic_id: int
    keywords: list[tuple[str, float]]
    phrases_by_length: dict[int, list[tuple[str, float]]]
    representative_length: int | None
    diagnostic: str | None = None

    def __post_init__(self) -> None:
        for length, phrases in self.phrases_by_length.items():
            if length < 2:
                raise ValueError(f"phrase length {length} below minimum of 2")
            for text, _score in phrases:
                if len(text.split()) != length:
                    raise ValueError(
                        f"phrase {text!r} filed under length {length}"
                    )
        if self.representative_length is not None and self.representative_length < 2:
            raise ValueError("representative length must be >= 2")


@dataclass
class ClassMetrics:
    precision: float
    recall: float
    f_score: float
    support: int


@dataclass
class Metrics:
    """Per-class precision/recall/F plus accuracy and raw confusion counts."""

    accuracy: float
    per_class: dict[str, ClassMetrics]
    confusion: dict[str, dict[str, int]]

    def to_dict(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "per_class": {
                c: {
                    "precision": m.precision,
                    "recall": m.recall,
                    "f_score": m.f_score,
                    "support": m.support,
                }
                for c, m in self.per_class.items()
            },
            "confusion": self.confusion,
        }

    @staticmethod
    def from_dict(raw: dict) -> "Metrics":
        per_class = {
            c: ClassMetrics(m["precision"], m["recall"], m["f_score"], m["support"])
            for c, m in raw["per_class"].items()
        }
        return Metrics(raw["accuracy"], per_class, raw["confusion"])


@dataclass
class TemporalPoint:
    """Aggregate scores for one time bucket (date is the bucket start)."""

    date: str
    sentiment: float
    hate: float
    count: int


@dataclass
class TopicScore:
    topic_id: int
    label: str
    sentiment: float
    hate: float
    size: int


@dataclass
class AnalysisReport:
    """Corpus-level analysis: time series, per-topic scores, and summaries."""

    name: str
    temporal_series: list[TemporalPoint]
    topic_scores: list[TopicScore]
    dialect_summary: dict[str, float]
    word_frequencies: dict[str, list[tuple[str, int]]]
    diagnostics: dict[str, int]

    def __post_init__(self) -> None:
        for point in self.temporal_series:
            if not (-1.0 <= point.sentiment <= 1.0):
                raise ValueError(f"sentiment score {point.sentiment} outside [-1, 1]")
            if not (0.0 <= point.hate <= 1.0):
                raise ValueError(f"hate rate {point.hate} outside [0, 1]")
        for score in self.topic_scores:
            if not (-1.0 <= score.sentiment <= 1.0):
                raise ValueError(f"sentiment score {score.sentiment} outside [-1, 1]")
            if not (0.0 <= score.hate <= 1.0):
                raise ValueError(f"hate rate {score.hate} outside [0, 1]")
        for key in ("negative_share", "hate_share"):
            if key in self.dialect_summary:
                share = self.dialect_summary[key]
                if not (0.0 <= share <= 1.0):
                    raise ValueError(f"{key} {share} outside [0, 1]")
