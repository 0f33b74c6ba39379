"""Readers and writers for every on-disk artifact.

All loaders validate totally: a malformed input raises CorpusFormatError
whose message names the file and the 1-based line (or byte offset) of the
first problems found. All writers are atomic (write to a temp file in the
target directory, then rename) and byte-deterministic for equal inputs.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import struct
import tempfile
from pathlib import Path

import numpy as np

from .schemas import (
    AnalysisReport,
    CorpusFormatError,
    Document,
    DocumentSet,
    EmbeddingMatrix,
    Metrics,
    PredictionRecord,
    PredictionSet,
    TASK_CLASSES,
    TemporalPoint,
    TopicScore,
    format_timestamp,
    parse_timestamp,
)

DEMB_MAGIC = b"DEMB"
DEMB_VERSION = 1

_DOC_FIELDS = ("id", "text", "timestamp", "dialect", "region", "label")
_MODEL_KEYS = ("task", "classes", "dim", "weights", "bias", "config", "val_metrics")
PREDICTION_HEADER = ["doc_id", "label", "confidence"]


def atomic_write_bytes(path: str | Path, data: bytes) -> None:
    """Write via a sibling temp file and rename, so readers never see a partial file."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as handle:
            handle.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def atomic_write_text(path: str | Path, text: str) -> None:
    atomic_write_bytes(path, text.encode("utf-8"))


def canonical_json(obj) -> str:
    """Serialize with sorted keys and no NaN/Inf so equal objects give equal bytes."""
    _reject_non_finite(obj)
    return json.dumps(obj, ensure_ascii=False, sort_keys=True, indent=2, allow_nan=False) + "\n"


def _reject_non_finite(obj, path: str = "$") -> None:
    if isinstance(obj, float) and not math.isfinite(obj):
        raise ValueError(f"non-finite value at {path} is not serializable")
    elif isinstance(obj, dict):
        for key, value in obj.items():
            _reject_non_finite(value, f"{path}.{key}")
    elif isinstance(obj, (list, tuple)):
        for i, value in enumerate(obj):
            _reject_non_finite(value, f"{path}[{i}]")


def save_json(obj, path: str | Path) -> None:
    atomic_write_text(path, canonical_json(obj))


def load_json(path: str | Path):
    try:
        with open(path, "r", encoding="utf-8") as handle:
            return json.load(handle)
    except json.JSONDecodeError as exc:
        raise CorpusFormatError(f"{path}: invalid JSON: {exc}") from exc


def _csv_text(rows: list[list]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    for row in rows:
        writer.writerow([_render_cell(cell) for cell in row])
    return buf.getvalue()


def _render_cell(cell) -> str:
    if isinstance(cell, float):
        return repr(cell)
    return str(cell)


# ---------------------------------------------------------------------------
# documents


def load_documents(path: str | Path, format: str | None = None) -> DocumentSet:
    """Load a corpus from JSONL or CSV.

    `format` is "jsonl" or "csv"; when omitted it is inferred from the file
    suffix. Row problems are collected and reported together, each prefixed
    with its 1-based line number.
    """
    path = Path(path)
    if format is None:
        format = "csv" if path.suffix.lower() == ".csv" else "jsonl"
    if format not in ("jsonl", "csv"):
        raise CorpusFormatError(f"{path}: unknown corpus format {format!r}")
    if format == "csv":
        docs, problems = _read_documents_csv(path)
    else:
        docs, problems = _read_documents_jsonl(path)
    if problems:
        detail = "; ".join(f"line {line}: {msg}" for line, msg in problems[:10])
        raise CorpusFormatError(f"{path}: {len(problems)} malformed row(s): {detail}")
    return DocumentSet(docs, name=path.stem)


def _read_documents_jsonl(path: Path):
    docs: list[Document] = []
    problems: list[tuple[int, str]] = []
    seen: set[str] = set()
    with open(path, "r", encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                row = json.loads(line)
            except json.JSONDecodeError as exc:
                problems.append((line_no, f"invalid JSON ({exc.msg})"))
                continue
            if not isinstance(row, dict):
                problems.append((line_no, "row is not a JSON object"))
                continue
            problem = _check_doc_row(row, seen)
            if problem:
                problems.append((line_no, problem))
                continue
            docs.append(_build_document(row))
            seen.add(row["id"])
    return docs, problems


def _read_documents_csv(path: Path):
    docs: list[Document] = []
    problems: list[tuple[int, str]] = []
    seen: set[str] = set()
    with open(path, "r", encoding="utf-8", newline="") as handle:
        reader = csv.DictReader(handle)
        header = reader.fieldnames or []
        if "id" not in header or "text" not in header:
            raise CorpusFormatError(f"{path}: header must include 'id' and 'text', got {header}")
        unknown = [col for col in header if col not in _DOC_FIELDS]
        if unknown:
            raise CorpusFormatError(f"{path}: unknown columns {unknown}")
        for row in reader:
            line_no = reader.line_num
            cleaned = {k: v for k, v in row.items() if k is not None and v not in (None, "")}
            problem = _check_doc_row(cleaned, seen)
            if problem:
                problems.append((line_no, problem))
                continue
            docs.append(_build_document(cleaned))
            seen.add(cleaned["id"])
    return docs, problems


def _check_doc_row(row: dict, seen: set[str]) -> str | None:
    doc_id = row.get("id")
    if not isinstance(doc_id, str) or not doc_id:
        return "missing or empty 'id'"
    if doc_id in seen:
        return f"duplicate id {doc_id!r}"
    text = row.get("text")
    if not isinstance(text, str) or not text.strip():
        return f"id {doc_id!r}: missing or empty 'text'"
    for key in ("timestamp", "dialect", "region", "label"):
        value = row.get(key)
        if value is not None and not isinstance(value, str):
            return f"id {doc_id!r}: field {key!r} must be a string"
    if "timestamp" in row:
        try:
            parse_timestamp(row["timestamp"])
        except CorpusFormatError as exc:
            return f"id {doc_id!r}: {exc}"
    return None


def _build_document(row: dict) -> Document:
    timestamp = parse_timestamp(row["timestamp"]) if "timestamp" in row else None
    return Document(
        id=row["id"],
        text=row["text"],
        timestamp=timestamp,
        dialect=row.get("dialect"),
        region=row.get("region"),
        label=row.get("label"),
    )


def save_documents(docs: DocumentSet, path: str | Path, format: str = "jsonl") -> None:
    if format == "jsonl":
        lines = []
        for doc in docs:
            row: dict = {"id": doc.id, "text": doc.text}
            if doc.timestamp is not None:
                row["timestamp"] = format_timestamp(doc.timestamp)
            for key in ("dialect", "region", "label"):
                value = getattr(doc, key)
                if value is not None:
                    row[key] = value
            lines.append(json.dumps(row, ensure_ascii=False, sort_keys=True))
        atomic_write_text(path, "\n".join(lines) + ("\n" if lines else ""))
    elif format == "csv":
        rows = [list(_DOC_FIELDS)]
        for doc in docs:
            stamp = format_timestamp(doc.timestamp) if doc.timestamp else ""
            rows.append(
                [doc.id, doc.text, stamp, doc.dialect or "", doc.region or "", doc.label or ""]
            )
        atomic_write_text(path, _csv_text(rows))
    else:
        raise CorpusFormatError(f"unknown corpus format {format!r}")


# ---------------------------------------------------------------------------
# embeddings (binary, little-endian)
#
# layout: magic "DEMB" | version u8 | count u32 | dim u32
#         | count*dim float32 row-major | per row: id length u32 + UTF-8 bytes


def save_embeddings(emb: EmbeddingMatrix, path: str | Path) -> None:
    values = np.ascontiguousarray(emb.values, dtype="<f4")
    if not np.all(np.isfinite(values)):
        raise ValueError("embedding values overflow float32")
    parts = [DEMB_MAGIC, bytes([DEMB_VERSION]), struct.pack("<II", emb.count, emb.dim)]
    parts.append(values.tobytes(order="C"))
    for doc_id in emb.doc_ids:
        encoded = doc_id.encode("utf-8")
        parts.append(struct.pack("<I", len(encoded)))
        parts.append(encoded)
    atomic_write_bytes(path, b"".join(parts))


def load_embeddings(path: str | Path) -> EmbeddingMatrix:
    path = Path(path)
    buf = path.read_bytes()
    if len(buf) < 4 or buf[:4] != DEMB_MAGIC:
        raise CorpusFormatError(f"{path}: bad magic, not an embedding file")
    if len(buf) < 13:
        raise CorpusFormatError(f"{path}: truncated payload (header incomplete)")
    version = buf[4]
    if version != DEMB_VERSION:
        raise CorpusFormatError(f"{path}: unsupported version {version}")
    count, dim = struct.unpack_from("<II", buf, 5)
    if dim < 1:
        raise CorpusFormatError(f"{path}: embedding dim must be positive")
    offset = 13
    value_bytes = count * dim * 4
    if len(buf) < offset + value_bytes:
        raise CorpusFormatError(f"{path}: truncated payload (expected {count}x{dim} float32 values)")
    values = np.frombuffer(buf, dtype="<f4", count=count * dim, offset=offset)
    values = values.reshape(count, dim)
    offset += value_bytes
    doc_ids: list[str] = []
    for row in range(count):
        if len(buf) < offset + 4:
            raise CorpusFormatError(f"{path}: truncated payload (id length for row {row})")
        (id_len,) = struct.unpack_from("<I", buf, offset)
        offset += 4
        if len(buf) < offset + id_len:
            raise CorpusFormatError(f"{path}: truncated payload (id bytes for row {row})")
        try:
            doc_ids.append(buf[offset : offset + id_len].decode("utf-8"))
        except UnicodeDecodeError as exc:
            raise CorpusFormatError(f"{path}: row {row} id is not valid UTF-8") from exc
        offset += id_len
    if offset != len(buf):
        raise CorpusFormatError(f"{path}: {len(buf) - offset} trailing bytes after payload")
    bad = np.argwhere(~np.isfinite(values))
    if bad.size:
        row, col = bad[0]
        raise CorpusFormatError(f"{path}: non-finite value at row {row}, column {col}")
    try:
        return EmbeddingMatrix(values, doc_ids)
    except ValueError as exc:
        raise CorpusFormatError(f"{path}: {exc}") from exc


# ---------------------------------------------------------------------------
# predictions


def save_predictions(preds: PredictionSet, path: str | Path) -> None:
    rows: list[list] = [list(PREDICTION_HEADER)]
    for rec in preds.records:
        rows.append([rec.doc_id, rec.label, float(rec.confidence)])
    atomic_write_text(path, _csv_text(rows))


def load_predictions(path: str | Path, task: str) -> PredictionSet:
    path = Path(path)
    if task not in TASK_CLASSES:
        raise CorpusFormatError(f"unknown task {task!r}")
    records: list[PredictionRecord] = []
    problems: list[tuple[int, str]] = []
    with open(path, "r", encoding="utf-8", newline="") as handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if header != PREDICTION_HEADER:
            raise CorpusFormatError(
                f"{path}: header must be {','.join(PREDICTION_HEADER)!r}, got {header}"
            )
        for line_no, row in enumerate(reader, start=2):
            if len(row) != 3:
                problems.append((line_no, f"expected 3 columns, got {len(row)}"))
                continue
            doc_id, label, raw_conf = row
            if not doc_id:
                problems.append((line_no, "empty doc_id"))
                continue
            if label not in TASK_CLASSES[task]:
                problems.append((line_no, f"label {label!r} not valid for task {task!r}"))
                continue
            try:
                confidence = float(raw_conf)
            except ValueError:
                problems.append((line_no, f"confidence {raw_conf!r} is not a number"))
                continue
            if not (0.0 <= confidence <= 1.0):
                problems.append((line_no, f"confidence {confidence} outside [0, 1]"))
                continue
            records.append(PredictionRecord(doc_id, label, confidence))
    if problems:
        detail = "; ".join(f"line {line}: {msg}" for line, msg in problems[:10])
        raise CorpusFormatError(f"{path}: {len(problems)} malformed row(s): {detail}")
    try:
        return PredictionSet(task, records)
    except ValueError as exc:
        raise CorpusFormatError(f"{path}: {exc}") from exc


# ---------------------------------------------------------------------------
# token files (normalize stage output)


def save_token_file(rows: list[tuple[str, list[str]]], path: str | Path) -> None:
    lines = [
        json.dumps({"id": doc_id, "tokens": tokens}, ensure_ascii=False, sort_keys=True)
        for doc_id, tokens in rows
    ]
    atomic_write_text(path, "\n".join(lines) + ("\n" if lines else ""))


def load_token_file(path: str | Path) -> list[tuple[str, list[str]]]:
    rows: list[tuple[str, list[str]]] = []
    with open(path, "r", encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                row = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusFormatError(f"{path}: line {line_no}: invalid JSON ({exc.msg})") from exc
            if not isinstance(row, dict) or "id" not in row or "tokens" not in row:
                raise CorpusFormatError(f"{path}: line {line_no}: expected id/tokens object")
            rows.append((row["id"], list(row["tokens"])))
    return rows


# ---------------------------------------------------------------------------
# topic artifacts

_TOPIC_REPORT_KEYS = ("k", "outliers", "topics", "mean_coherence", "params")
_INTERPRETATION_KEYS = ("topic_id", "keywords", "representative_length", "phrases")


def save_assignments(assignment, path: str | Path) -> None:
    rows: list[list] = [["doc_id", "topic_id"]]
    rows += [[doc_id, topic_id] for doc_id, topic_id in assignment.mapping.items()]
    atomic_write_text(path, _csv_text(rows))


def load_assignments(path: str | Path):
    from .schemas import TopicAssignment

    path = Path(path)
    mapping: dict[str, int] = {}
    with open(path, "r", encoding="utf-8", newline="") as handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if header != ["doc_id", "topic_id"]:
            raise CorpusFormatError(f"{path}: header must be 'doc_id,topic_id', got {header}")
        for line_no, row in enumerate(reader, start=2):
            if len(row) != 2:
                raise CorpusFormatError(f"{path}: line {line_no}: expected 2 columns")
            doc_id, raw_topic = row
            if doc_id in mapping:
                raise CorpusFormatError(f"{path}: line {line_no}: duplicate doc id {doc_id!r}")
            try:
                mapping[doc_id] = int(raw_topic)
            except ValueError as exc:
                raise CorpusFormatError(
                    f"{path}: line {line_no}: topic id {raw_topic!r} is not an integer"
                ) from exc
    try:
        return TopicAssignment(mapping)
    except ValueError as exc:
        raise CorpusFormatError(f"{path}: {exc}") from exc


def save_topic_report(report: dict, path: str | Path) -> None:
    missing = [key for key in _TOPIC_REPORT_KEYS if key not in report]
    if missing:
        raise ValueError(f"topic report missing keys {missing}")
    save_json(report, path)


def load_topic_report(path: str | Path) -> dict:
    raw = load_json(path)
    if not isinstance(raw, dict):
        raise CorpusFormatError(f"{path}: topic report must hold a JSON object")
    missing = [key for key in _TOPIC_REPORT_KEYS if key not in raw]
    if missing:
        raise CorpusFormatError(f"{path}: topic report missing keys {missing}")
    return raw


def save_interpretations(interpretations: list[dict], path: str | Path) -> None:
    for entry in interpretations:
        missing = [key for key in _INTERPRETATION_KEYS if key not in entry]
        if missing:
            raise ValueError(f"interpretation missing keys {missing}")
    save_json(interpretations, path)


def load_interpretations(path: str | Path) -> list[dict]:
    raw = load_json(path)
    if not isinstance(raw, list):
        raise CorpusFormatError(f"{path}: interpretations file must hold a JSON array")
    for i, entry in enumerate(raw):
        if not isinstance(entry, dict):
            raise CorpusFormatError(f"{path}: entry {i} is not an object")
        missing = [key for key in _INTERPRETATION_KEYS if key not in entry]
        if missing:
            raise CorpusFormatError(f"{path}: entry {i} missing keys {missing}")
    return raw


# ---------------------------------------------------------------------------
# model files


def save_model(model_dict: dict, path: str | Path) -> None:
    missing = [key for key in _MODEL_KEYS if key not in model_dict]
    if missing:
        raise ValueError(f"model dict missing keys {missing}")
    save_json(model_dict, path)


def load_model(path: str | Path) -> dict:
    raw = load_json(path)
    if not isinstance(raw, dict):
        raise CorpusFormatError(f"{path}: model file must hold a JSON object")
    missing = [key for key in _MODEL_KEYS if key not in raw]
    if missing:
        raise CorpusFormatError(f"{path}: model file missing keys {missing}")
    return raw


# ---------------------------------------------------------------------------
# analysis reports


def report_to_dict(report: AnalysisReport) -> dict:
    return {
        "name": report.name,
        "temporal_series": [
            {"date": p.date, "sentiment": p.sentiment, "hate": p.hate, "count": p.count}
            for p in report.temporal_series
        ],
        "topic_scores": [
            {
                "topic_id": s.topic_id,
                "label": s.label,
                "sentiment": s.sentiment,
                "hate": s.hate,
                "size": s.size,
            }
            for s in report.topic_scores
        ],
        "dialect_summary": dict(report.dialect_summary),
        "word_frequencies": {
            cls: [[token, count] for token, count in ranked]
            for cls, ranked in report.word_frequencies.items()
        },
        "diagnostics": dict(report.diagnostics),
    }


def report_from_dict(raw: dict) -> AnalysisReport:
    try:
        return AnalysisReport(
            name=raw["name"],
            temporal_series=[
                TemporalPoint(p["date"], p["sentiment"], p["hate"], p["count"])
                for p in raw["temporal_series"]
            ],
            topic_scores=[
                TopicScore(s["topic_id"], s["label"], s["sentiment"], s["hate"], s["size"])
                for s in raw["topic_scores"]
            ],
            dialect_summary=dict(raw["dialect_summary"]),
            word_frequencies={
                cls: [(token, count) for token, count in ranked]
                for cls, ranked in raw["word_frequencies"].items()
            },
            diagnostics=dict(raw["diagnostics"]),
        )
    except (KeyError, TypeError) as exc:
        raise CorpusFormatError(f"report dict malformed: {exc}") from exc


def save_report(report: AnalysisReport, path: str | Path, format: str = "json") -> list[Path]:
    """Persist a report as one JSON file or as a directory of plot-ready CSVs."""
    path = Path(path)
    if format == "json":
        save_json(report_to_dict(report), path)
        return [path]
    if format == "csv":
        path.mkdir(parents=True, exist_ok=True)
        return save_report_csvs(report, path)
    raise ValueError(f"unknown report format {format!r}")


def save_report_csvs(report: AnalysisReport, out_dir: str | Path) -> list[Path]:
    out_dir = Path(out_dir)
    written: list[Path] = []

    temporal = [["date", "sentiment", "hate", "count"]]
    temporal += [[p.date, p.sentiment, p.hate, p.count] for p in report.temporal_series]
    written.append(out_dir / "temporal.csv")
    atomic_write_text(written[-1], _csv_text(temporal))

    topics = [["topic_id", "label", "sentiment", "hate", "size"]]
    topics += [[s.topic_id, s.label, s.sentiment, s.hate, s.size] for s in report.topic_scores]
    written.append(out_dir / "topics.csv")
    atomic_write_text(written[-1], _csv_text(topics))

    dialects = [["corpus", "negative_share", "hate_share"]]
    dialects.append(
        [
            report.name,
            report.dialect_summary.get("negative_share", 0.0),
            report.dialect_summary.get("hate_share", 0.0),
        ]
    )
    written.append(out_dir / "dialects.csv")
    atomic_write_text(written[-1], _csv_text(dialects))

    for cls in sorted(report.word_frequencies):
        rows = [["token", "count"]]
        rows += [[token, count] for token, count in report.word_frequencies[cls]]
        written.append(out_dir / f"wordfreq_{cls}.csv")
        atomic_write_text(written[-1], _csv_text(rows))
    return written


def load_report(path: str | Path) -> AnalysisReport:
    raw = load_json(path)
    if not isinstance(raw, dict):
        raise CorpusFormatError(f"{path}: report file must hold a JSON object")
    return report_from_dict(raw)


def save_metrics(metrics: Metrics, path: str | Path) -> None:
    save_json(metrics.to_dict(), path)


def load_metrics(path: str | Path) -> Metrics:
    raw = load_json(path)
    try:
        return Metrics.from_dict(raw)
    except (KeyError, TypeError) as exc:
        raise CorpusFormatError(f"{path}: metrics file malformed: {exc}") from exc
