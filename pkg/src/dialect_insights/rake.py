"""Keyword-phrase extraction over stopword-delimited token runs.

Candidates are maximal runs of tokens containing no stopword and no
delimiter token. Word statistics are gathered over every candidate
occurrence: freq(w) counts occurrences of w, deg(w) adds the length of the
containing candidate for each occurrence, so deg(w) >= freq(w) always and
they are equal exactly when w only ever appears in single-word candidates.
A phrase scores the sum of its word scores under the configured metric.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .textnorm import TokenSequence

METRIC_DEGREE = "degree"
METRIC_FREQUENCY = "frequency"
METRIC_RATIO = "degree_over_frequency"
METRICS = (METRIC_DEGREE, METRIC_FREQUENCY, METRIC_RATIO)

# Sentence punctuation that ends a candidate run even when it survives
# tokenization (raw token streams; the normalizer already drops these).
DEFAULT_DELIMITERS = frozenset({".", ",", "!", "?", ";", ":", "،", "؛", "؟", "…"})


@dataclass
class PhraseCandidate:
    """A candidate phrase, its score, and the documents it was seen in."""

    tokens: tuple[str, ...]
    score: float = 0.0
    source_doc_ids: frozenset[str] = frozenset()

    @property
    def length(self) -> int:
        return len(self.tokens)

    @property
    def text(self) -> str:
        return " ".join(self.tokens)


@dataclass
class CooccurrenceGraph:
    """Word occurrence statistics over a pool of candidates."""

    freq: dict[str, int] = field(default_factory=dict)
    deg: dict[str, int] = field(default_factory=dict)

    @property
    def vocabulary(self) -> set[str]:
        return set(self.freq)


@dataclass
class RakeConfig:
    metric: str = METRIC_DEGREE
    stopwords: frozenset[str] | set[str] = frozenset()
    delimiters: frozenset[str] | set[str] = DEFAULT_DELIMITERS
    min_length: int = 1

    def __post_init__(self) -> None:
        if self.metric not in METRICS:
            raise ValueError(f"unknown metric {self.metric!r}, expected one of {METRICS}")
        if self.min_length < 1:
            raise ValueError("min_length must be at least 1")


def extract_candidates(
    seq: TokenSequence,
    stopwords: frozenset[str] | set[str],
    delimiters: frozenset[str] | set[str] = DEFAULT_DELIMITERS,
    min_length: int = 1,
) -> list[PhraseCandidate]:
    """Split one token stream into candidate phrases, in order of appearance."""
    candidates: list[PhraseCandidate] = []
    run: list[str] = []
    source = frozenset({seq.source_id} if seq.source_id else set())
    for token in seq:
        if token in stopwords or token in delimiters:
            if len(run) >= min_length:
                candidates.append(PhraseCandidate(tuple(run), 0.0, source))
            run = []
        else:
            run.append(token)
    if len(run) >= min_length:
        candidates.append(PhraseCandidate(tuple(run), 0.0, source))
    return candidates


def build_cooccurrence(candidates: list[PhraseCandidate]) -> CooccurrenceGraph:
    """Accumulate freq and degree over every candidate occurrence."""
    graph = CooccurrenceGraph()
    for candidate in candidates:
        length = candidate.length
        for word in candidate.tokens:
            graph.freq[word] = graph.freq.get(word, 0) + 1
            graph.deg[word] = graph.deg.get(word, 0) + length
    return graph


def word_scores(graph: CooccurrenceGraph, metric: str = METRIC_DEGREE) -> dict[str, float]:
    if metric == METRIC_DEGREE:
        return {w: float(d) for w, d in graph.deg.items()}
    if metric == METRIC_FREQUENCY:
        return {w: float(f) for w, f in graph.freq.items()}
    if metric == METRIC_RATIO:
        return {w: graph.deg[w] / graph.freq[w] for w in graph.freq}
    raise ValueError(f"unknown metric {metric!r}, expected one of {METRICS}")


def rake(documents: list[TokenSequence], config: RakeConfig | None = None) -> list[PhraseCandidate]:
    """Extract and rank phrases over a corpus of token streams.

    Duplicate phrases across the corpus are merged into one entry whose
    source ids are the union over occurrences. Ranking is score descending
    with lexicographic order on the phrase text as the tie-break.
    """
    config = config or RakeConfig()
    pool: list[PhraseCandidate] = []
    for seq in documents:
        pool.extend(extract_candidates(seq, config.stopwords, config.delimiters, config.min_length))
    if not pool:
        return []
    graph = build_cooccurrence(pool)
    scores = word_scores(graph, config.metric)
    merged: dict[tuple[str, ...], set[str]] = {}
    for candidate in pool:
        merged.setdefault(candidate.tokens, set()).update(candidate.source_doc_ids)
    ranked = [
        PhraseCandidate(tokens, sum(scores[w] for w in tokens), frozenset(sources))
        for tokens, sources in merged.items()
    ]
    ranked.sort(key=lambda c: (-c.score, c.text))
    return ranked
