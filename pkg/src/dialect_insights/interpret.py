"""Turn topic keyword lists into representative phrases.

Keywords shared by two or more topics are dropped from all of them first,
so each topic is described only by what sets it apart. Phrases are mined
from the topic's own documents (phrase-mode normalization keeps stopwords
as split points), kept when they have at least two words and contain a
surviving keyword, and grouped around the modal phrase length.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, replace

from .rake import METRIC_DEGREE, PhraseCandidate, RakeConfig, rake
from .schemas import DocumentSet, Topic, TopicInterpretation
from .textnorm import NormalizationConfig, normalize_corpus

MIN_PHRASE_TOKENS = 2


@dataclass
class InterpretConfig:
    """Phrase mining settings for topic interpretation."""

    phrases_per_length: int = 5
    metric: str = METRIC_DEGREE
    norm: NormalizationConfig | None = None

    def __post_init__(self) -> None:
        if self.phrases_per_length < 1:
            raise ValueError("phrases_per_length must be positive")
        if self.norm is None:
            self.norm = NormalizationConfig(mode="phrase")
        elif self.norm.mode != "phrase":
            self.norm = replace(self.norm, mode="phrase")

    def rake_config(self) -> RakeConfig:
        return RakeConfig(metric=self.metric, stopwords=frozenset(self.norm.stopwords))


def dedup_topic_keywords(topics: list[Topic]) -> tuple[list[Topic], set[int]]:
    """Remove keywords that appear in two or more topics, from all of them.

    Returns the rewritten topics plus the ids of topics left with no
    keywords at all. Applying this twice changes nothing: after one pass
    every surviving term belongs to exactly one topic.
    """
    owners: Counter[str] = Counter()
    for topic in topics:
        for term, _weight in topic.keywords:
            owners[term] += 1
    shared = {term for term, count in owners.items() if count >= 2}
    deduped = [
        Topic(
            topic.topic_id,
            topic.member_doc_ids,
            [(term, weight) for term, weight in topic.keywords if term not in shared],
        )
        for topic in topics
    ]
    flagged = {topic.topic_id for topic in deduped if not topic.keywords}
    return deduped, flagged


def select_topic_phrases(
    phrases: list[PhraseCandidate], keyword_terms: set[str]
) -> list[PhraseCandidate]:
    """Keep phrases of two or more words that contain a topic keyword."""
    selected = [
        p for p in phrases if p.length >= MIN_PHRASE_TOKENS and set(p.tokens) & keyword_terms
    ]
    selected.sort(key=lambda c: (-c.score, c.text))
    return selected


def length_window(phrases: list[PhraseCandidate]) -> tuple[int, list[int]]:
    """Modal phrase length (ties go to the shorter) and its +/-1 window.

    The window keeps only lengths that actually occur and never dips below
    the two-word minimum.
    """
    if not phrases:
        raise ValueError("no phrases to take a length window over")
    counts = Counter(p.length for p in phrases)
    mode = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))[0][0]
    window = [
        length
        for length in (mode - 1, mode, mode + 1)
        if length in counts and length >= MIN_PHRASE_TOKENS
    ]
    return mode, window


def interpret_topic(
    topic: Topic, corpus: DocumentSet, config: InterpretConfig | None = None
) -> TopicInterpretation:
    """Mine representative phrases for one topic from its member documents.

    The topic's keywords are assumed to be already deduplicated; a topic
    with no keywords (or no keyword-anchored phrase) yields an empty
    interpretation carrying a diagnostic instead of failing.
    """
    config = config or InterpretConfig()
    if not topic.keywords:
        return TopicInterpretation(
            topic.topic_id, [], {}, None, diagnostic="no unique keywords after deduplication"
        )
    member_docs = corpus.subset(set(topic.member_doc_ids))
    sequences = normalize_corpus(member_docs, config.norm)
    ranked = rake(sequences, config.rake_config())
    keyword_terms = {term for term, _weight in topic.keywords}
    selected = select_topic_phrases(ranked, keyword_terms)
    if not selected:
        return TopicInterpretation(
            topic.topic_id,
            list(topic.keywords),
            {},
            None,
            diagnostic="no phrase of two or more words contains a topic keyword",
        )
    mode, window = length_window(selected)
    phrases_by_length: dict[int, list[tuple[str, float]]] = {}
    for length in window:
        bucket = [p for p in selected if p.length == length][: config.phrases_per_length]
        phrases_by_length[length] = [(p.text, p.score) for p in bucket]
    return TopicInterpretation(topic.topic_id, list(topic.keywords), phrases_by_length, mode)


def interpret_topics(
    topics: list[Topic], corpus: DocumentSet, config: InterpretConfig | None = None
) -> list[TopicInterpretation]:
    """Deduplicate keywords across topics, then interpret each topic."""
    config = config or InterpretConfig()
    deduped, _flagged = dedup_topic_keywords(topics)
    return [interpret_topic(topic, corpus, config) for topic in deduped]


def interpretation_to_dict(interp: TopicInterpretation) -> dict:
    entry: dict = {
        "topic_id": interp.topic_id,
        "keywords": [[term, weight] for term, weight in interp.keywords],
        "representative_length": interp.representative_length,
        "phrases": {
            str(length): [[text, score] for text, score in phrases]
            for length, phrases in sorted(interp.phrases_by_length.items())
        },
    }
    if interp.diagnostic is not None:
        entry["diagnostic"] = interp.diagnostic
    return entry


def interpretation_from_dict(raw: dict) -> TopicInterpretation:
    return TopicInterpretation(
        topic_id=raw["topic_id"],
        keywords=[(term, weight) for term, weight in raw["keywords"]],
        phrases_by_length={
            int(length): [(text, score) for text, score in phrases]
            for length, phrases in raw["phrases"].items()
        },
        representative_length=raw["representative_length"],
        diagnostic=raw.get("diagnostic"),
    )
