import pytest

from dialect_insights.analysis import (
    build_report,
    dialect_summary,
    dialect_view,
    hate_rate,
    sentiment_score,
    share_ratio,
    temporal_view,
    topic_view,
    word_frequencies,
)
from dialect_insights.schemas import (
    AnalysisReport,
    Document,
    DocumentSet,
    PredictionRecord,
    PredictionSet,
    Topic,
    TopicAssignment,
    TopicInterpretation,
    parse_timestamp,
)
from dialect_insights.textnorm import NormalizationConfig


def test_sentiment_score_fixtures():
    assert sentiment_score(10, 10) == 0.0
    assert sentiment_score(0, 7) == -1.0
    assert sentiment_score(13, 87) == -0.74
    assert sentiment_score(0, 0) == 0.0
    with pytest.raises(ValueError):
        sentiment_score(-1, 0)


def test_hate_rate_fixtures():
    assert hate_rate(18, 100) == 0.18
    assert hate_rate(0, 0) == 0.0
    with pytest.raises(ValueError):
        hate_rate(5, 4)
    with pytest.raises(ValueError):
        hate_rate(-1, 4)


def test_share_ratio_fixtures():
    assert share_ratio(0.18, 0.07) == pytest.approx(18 / 7)
    assert share_ratio(0.3, 0.0) is None
    assert share_ratio(0.0, 0.4) == 0.0
    assert share_ratio(0.21, 0.21) == 1.0


def _dated_docs():
    docs = []
    for i in range(4):
        docs.append(Document(f"a{i}", "نص", parse_timestamp("2021-03-01T09:00:00Z")))
    for i in range(4):
        docs.append(Document(f"b{i}", "نص", parse_timestamp("2021-03-02T09:00:00Z")))
    return DocumentSet(docs, "two-days")


def _sentiment(labels_by_id):
    return PredictionSet(
        "sentiment", [PredictionRecord(i, label, 0.9) for i, label in labels_by_id.items()]
    )


def _hate(labels_by_id):
    return PredictionSet(
        "hate", [PredictionRecord(i, label, 0.9) for i, label in labels_by_id.items()]
    )


def test_temporal_view_two_day_fixture():
    docs = _dated_docs()
    sentiment = _sentiment(
        {
            "a0": "positive", "a1": "positive", "a2": "positive", "a3": "negative",
            "b0": "positive", "b1": "negative", "b2": "negative", "b3": "negative",
        }
    )
    hate = _hate({"b0": "hate", "b1": "non-hate"})
    series, undated = temporal_view(docs, sentiment, hate)
    assert undated == 0
    assert [p.date for p in series] == ["2021-03-01", "2021-03-02"]
    assert [p.sentiment for p in series] == [0.5, -0.5]
    assert series[0].hate == 0.0
    assert series[1].hate == 0.5  # one of two hate-classified posts
    assert [p.count for p in series] == [4, 4]


def test_temporal_view_counts_unclassified_dated_docs():
    docs = _dated_docs()
    series, _ = temporal_view(docs, _sentiment({"a0": "positive"}), None)
    assert series[0].count == 4  # count is dated docs, classified or not
    assert series[1].sentiment == 0.0  # no classified posts that day


def test_temporal_view_all_undated():
    docs = DocumentSet([Document("x", "نص"), Document("y", "نص")], "undated")
    series, undated = temporal_view(docs, None, None)
    assert series == []
    assert undated == 2


def test_temporal_view_month_bucket():
    docs = DocumentSet(
        [
            Document("a", "نص", parse_timestamp("2021-03-05T00:00:00Z")),
            Document("b", "نص", parse_timestamp("2021-03-25T00:00:00Z")),
            Document("c", "نص", parse_timestamp("2021-04-01T00:00:00Z")),
        ],
        "months",
    )
    series, _ = temporal_view(docs, None, None, bucket="month")
    assert [p.date for p in series] == ["2021-03-01", "2021-04-01"]
    assert [p.count for p in series] == [2, 1]
    with pytest.raises(ValueError, match="bucket"):
        temporal_view(docs, None, None, bucket="week")


def _interp(topic_id, phrases):
    return TopicInterpretation(topic_id, [("k", 1.0)], phrases, 2)


def test_topic_view_fixture():
    topics = [
        Topic(0, ["a0", "a1", "a2", "a3"], [("k", 1.0)]),
        Topic(1, ["b0", "b1"], [("k2", 1.0)]),
    ]
    sentiment = _sentiment({"a0": "positive", "a1": "negative", "a2": "negative", "a3": "negative"})
    interps = [_interp(0, {2: [("good day", 9.0), ("bad day", 9.0)]}), _interp(1, {})]
    scores, unclassified = topic_view(topics, interps, sentiment, None)
    assert scores[0].sentiment == -0.5
    assert scores[0].hate == 0.0
    assert scores[0].size == 4
    assert scores[0].label == "bad day"  # score tie broken by text
    assert scores[1].label == ""
    assert unclassified == [1]
    assert scores[1].sentiment == 0.0


def test_topic_view_orders_by_topic_id():
    topics = [Topic(1, ["b"], []), Topic(0, ["a"], [])]
    scores, _ = topic_view(topics, [], None, None)
    assert [s.topic_id for s in scores] == [0, 1]


def test_dialect_summary_and_view():
    sentiment = _sentiment({"a": "negative", "b": "negative", "c": "positive", "d": "positive"})
    hate = _hate({"a": "hate", "b": "non-hate", "c": "non-hate", "d": "non-hate"})
    summary = dialect_summary(sentiment, hate)
    assert summary == {"negative_share": 0.5, "hate_share": 0.25}
    assert dialect_summary(None, None) == {"negative_share": 0.0, "hate_share": 0.0}

    def report(name, neg, hate_share):
        return AnalysisReport(name, [], [], {"negative_share": neg, "hate_share": hate_share}, {}, {})

    view = dialect_view([report("gulf", 0.18, 0.1), report("levantine", 0.07, 0.0)])
    assert [row["corpus"] for row in view["rows"]] == ["gulf", "levantine"]
    assert view["ratios"]["negative_share"]["gulf/levantine"] == pytest.approx(18 / 7)
    assert view["ratios"]["hate_share"]["gulf/levantine"] is None
    solo = dialect_view([report("gulf", 0.2, 0.0)])
    assert solo["ratios"] == {"negative_share": {}, "hate_share": {}}


def test_word_frequencies_rank_and_truncate():
    docs = DocumentSet(
        [
            Document("a", "the storm storm wind"),
            Document("b", "the storm calm"),
            Document("c", "the sun sun sun"),
        ],
        "wf",
    )
    preds = _sentiment({"a": "negative", "b": "negative", "c": "positive"})
    config = NormalizationConfig(mode="topic", stopwords={"the"})
    ranked = word_frequencies(docs, preds, config, top_words=2)
    assert ranked["negative"] == [("storm", 3), ("calm", 1)]  # wind lost the tie to calm
    assert ranked["positive"] == [("sun", 3)]
    full = word_frequencies(docs, preds, config, top_words=50)
    assert full["negative"] == [("storm", 3), ("calm", 1), ("wind", 1)]


def _report_inputs():
    docs = DocumentSet(
        [
            Document("a0", "the good day", parse_timestamp("2021-03-01T08:00:00Z")),
            Document("a1", "the good day", parse_timestamp("2021-03-01T09:00:00Z")),
            Document("b0", "the bad day", parse_timestamp("2021-03-02T08:00:00Z")),
            Document("u0", "the odd one"),
        ],
        "mini",
    )
    topics = [Topic(0, ["a0", "a1"], [("good", 1.0)]), Topic(1, ["b0"], [("bad", 1.0)])]
    assignment = TopicAssignment({"a0": 0, "a1": 0, "b0": 1, "u0": -1})
    interps = [
        _interp(0, {2: [("good day", 4.0)]}),
        _interp(1, {2: [("bad day", 4.0)]}),
    ]
    sentiment = _sentiment({"a0": "positive", "a1": "positive", "b0": "negative", "u0": "negative"})
    return docs, topics, assignment, interps, sentiment


def test_build_report_assembles_views():
    docs, topics, assignment, interps, sentiment = _report_inputs()
    report = build_report(
        "mini",
        docs,
        topics,
        assignment,
        interps,
        sentiment_preds=sentiment,
        norm_config=NormalizationConfig(mode="topic", stopwords={"the"}),
    )
    assert report.name == "mini"
    assert [p.date for p in report.temporal_series] == ["2021-03-01", "2021-03-02"]
    assert report.temporal_series[0].sentiment == 1.0
    assert [s.label for s in report.topic_scores] == ["good day", "bad day"]
    assert report.dialect_summary["negative_share"] == 0.5
    assert report.word_frequencies["positive"] == [("day", 2), ("good", 2)]
    assert report.diagnostics == {
        "corpus_size": 4,
        "undated_docs": 1,
        "outliers": 1,
        "unclassified_topics": 0,
        "sentiment_predictions": 4,
        "hate_predictions": 0,
    }


def test_build_report_checks_topic_coverage():
    docs, topics, assignment, interps, sentiment = _report_inputs()
    with pytest.raises(ValueError, match="cover"):
        build_report("mini", docs, topics[:1], assignment, interps, sentiment_preds=sentiment)
