"""Shared fixtures: blob geometry and the bundled synthetic corpus.

The synthetic corpus has three vocabulary-distinct blobs of 20 documents
each. Every document repeats its blob's head trigram, carries its blob's
dominant term twice, and shares one corpus-wide term so keyword dedup has
something to remove. Embeddings are the blob centers plus small Gaussian
noise, so density clustering recovers the blobs exactly and sentiment
labels (blob 2 negative, rest positive) are linearly separable.
"""

from __future__ import annotations

import numpy as np
import pytest

from dialect_insights.corpus_io import save_documents, save_embeddings
from dialect_insights.schemas import Document, DocumentSet, EmbeddingMatrix, parse_timestamp

# (criterion name, passed) rows filled in by the acceptance suite
acceptance_results: list[tuple[str, bool]] = []


def pytest_terminal_summary(terminalreporter):
    if not acceptance_results:
        return
    terminalreporter.write_line("")
    for name, ok in acceptance_results:
        terminalreporter.write_line(f"[ACCEPTANCE] {'PASS' if ok else 'FAIL'} {name}")


BLOB_VOCAB = [
    ["كرة", "مباراة", "هدف", "فريق", "ملعب"],
    ["اكل", "مطعم", "وصفة", "طبخ", "غداء"],
    ["طقس", "مطر", "حرارة", "رياح", "شتاء"],
]
SHARED_TERM = "اليوم"
BLOB_NAMES = ("sport", "food", "weather")
BLOB_CENTERS = np.array(
    [
        [0.0, 0.0, 0.0, 0.0, 0.0],
        [2.0, 0.0, 0.0, 0.0, 0.0],
        [0.0, 2.0, 0.0, 0.0, 0.0],
    ]
)
DOCS_PER_BLOB = 20


def make_blobs(centers: np.ndarray, per_blob: int, sigma: float, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    return np.vstack([c + rng.normal(0.0, sigma, size=(per_blob, centers.shape[1])) for c in centers])


def build_synthetic_corpus(seed: int = 42) -> tuple[DocumentSet, EmbeddingMatrix]:
    rows = make_blobs(BLOB_CENTERS, DOCS_PER_BLOB, 0.05, seed)
    docs: list[Document] = []
    for blob, vocab in enumerate(BLOB_VOCAB):
        head = " ".join(vocab[:3])
        for i in range(DOCS_PER_BLOB):
            extra = vocab[3 + (i % 2)]
            text = f"{head} في {vocab[0]} {SHARED_TERM} {extra} {SHARED_TERM}"
            if blob == 2 and i == 19:
                timestamp = None  # one undated document exercises diagnostics
            else:
                timestamp = parse_timestamp(f"2021-03-0{1 + i % 5}T1{i % 10}:00:00Z")
            docs.append(
                Document(
                    id=f"{BLOB_NAMES[blob]}{i:02d}",
                    text=text,
                    timestamp=timestamp,
                    dialect="gulf" if blob < 2 else "levantine",
                    region="riyadh" if blob < 2 else "beirut",
                    label="negative" if blob == 2 else "positive",
                )
            )
    corpus = DocumentSet(docs, "synthetic")
    return corpus, EmbeddingMatrix(rows, corpus.ids)


@pytest.fixture(scope="session")
def synthetic_corpus() -> tuple[DocumentSet, EmbeddingMatrix]:
    return build_synthetic_corpus()


@pytest.fixture
def corpus_files(tmp_path, synthetic_corpus):
    """The synthetic corpus written to disk; returns (docs_path, emb_path)."""
    docs, emb = synthetic_corpus
    docs_path = tmp_path / "docs.jsonl"
    emb_path = tmp_path / "emb.demb"
    save_documents(docs, docs_path)
    save_embeddings(emb, emb_path)
    return docs_path, emb_path
