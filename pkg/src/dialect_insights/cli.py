"""Command-line entry point.

Subcommands cover each pipeline stage plus `pipeline`, which simply runs
the stages in order; stages communicate only through files in the output
directory, so running them one by one produces byte-identical artifacts.
Every run writes a manifest with the effective configuration, its sha256
hash, and the library versions involved.

Exit codes: 0 on success, 2 for validation problems (bad config, missing
or malformed inputs), 1 for anything unexpected. Errors are printed to
stderr as a single line: `error: <category>: <message>`.
"""

from __future__ import annotations

import argparse
import platform
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import build_report
from .classify import (
    LabeledDataset,
    evaluate as evaluate_predictions,
    model_from_dict,
    model_to_dict,
    predict,
    split_dataset,
    train_linear_head,
)
from .config import ConfigError, RunConfig, parse_config_file
from .corpus_io import (
    CorpusFormatError,
    load_assignments,
    load_documents,
    load_embeddings,
    load_interpretations,
    load_model,
    load_predictions,
    load_topic_report,
    report_to_dict,
    save_assignments,
    save_interpretations,
    save_json,
    save_metrics,
    save_model,
    save_predictions,
    save_report_csvs,
    save_token_file,
    save_topic_report,
)
from .interpret import interpretation_from_dict, interpretation_to_dict, interpret_topics
from .schemas import DocumentSet, PredictionSet, Topic
from .textnorm import normalize_corpus
from .topics import fit_topics, topic_report

STAGES = ("normalize", "topics", "interpret", "train", "predict", "evaluate", "analyze")

_FLAG_TO_KEY = {
    "corpus": "corpus.path",
    "embeddings": "embeddings.path",
    "task": "task",
    "out": "out",
    "seed": "seed",
    "format": "report.format",
}


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # keep errors on one line
        raise ConfigError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="dialect-insights", description=__doc__, add_help=True)
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name in STAGES + ("pipeline",):
        stage = sub.add_parser(name, help=f"run the {name} stage")
        stage.add_argument("--config", help="key = value configuration file")
        stage.add_argument("--corpus", help="documents file (JSONL or CSV)")
        stage.add_argument("--embeddings", help="embedding file")
        stage.add_argument("--task", choices=["sentiment", "hate"], help="classification task")
        stage.add_argument("--out", help="output directory (default ./out)")
        stage.add_argument("--seed", help="master random seed")
        stage.add_argument("--format", choices=["json", "csv"], help="report output format")
    return parser


def _build_config(args: argparse.Namespace) -> RunConfig:
    file_values = parse_config_file(args.config) if args.config else {}
    flag_values = {
        key: getattr(args, flag)
        for flag, key in _FLAG_TO_KEY.items()
        if getattr(args, flag) is not None
    }
    return RunConfig.build(file_values, flag_values)


def _require_file(path_str: str, what: str) -> Path:
    if not path_str:
        raise ConfigError(f"{what} is required but not configured")
    path = Path(path_str)
    if not path.is_file():
        raise ConfigError(f"{what} not found: {path}")
    return path


def _corpus(cfg: RunConfig) -> DocumentSet:
    path = _require_file(cfg["corpus.path"], "corpus file (corpus.path / --corpus)")
    fmt = None if cfg["corpus.format"] == "auto" else cfg["corpus.format"]
    docs = load_documents(path, fmt)
    if cfg["corpus.name"]:
        docs = DocumentSet(docs.documents, cfg["corpus.name"])
    return docs


def _embeddings(cfg: RunConfig):
    path = _require_file(cfg["embeddings.path"], "embedding file (embeddings.path / --embeddings)")
    return load_embeddings(path)


def _rebuild_topics(cfg: RunConfig, out: Path, docs: DocumentSet):
    assignments_path = out / "assignments.csv"
    report_path = out / "topic_report.json"
    for path in (assignments_path, report_path):
        if not path.is_file():
            raise ConfigError(f"topic artifact not found: {path} (run the topics stage first)")
    assignment = load_assignments(assignments_path)
    report = load_topic_report(report_path)
    if set(assignment.mapping) != set(docs.ids):
        raise ConfigError(f"assignments in {assignments_path} do not cover the corpus")
    keywords = {
        entry["id"]: [(term, weight) for term, weight in entry["keywords"]]
        for entry in report["topics"]
    }
    members: dict[int, list[str]] = {}
    for doc_id in docs.ids:
        topic_id = assignment.mapping[doc_id]
        if topic_id >= 0:
            members.setdefault(topic_id, []).append(doc_id)
    if set(members) != set(keywords):
        raise ConfigError(f"{report_path} does not match {assignments_path}")
    topics = [Topic(tid, members[tid], keywords[tid]) for tid in sorted(members)]
    return assignment, topics


def _predictions_path(out: Path, task: str) -> Path:
    return out / f"predictions_{task}.csv"


# ---------------------------------------------------------------------------
# stages


def _stage_normalize(cfg: RunConfig, out: Path) -> list[Path]:
    docs = _corpus(cfg)
    written = []
    for mode in ("topic", "phrase"):
        sequences = normalize_corpus(docs, cfg.norm_config(mode))
        path = out / f"tokens_{mode}.jsonl"
        save_token_file([(seq.source_id, seq.tokens) for seq in sequences], path)
        written.append(path)
    return written


def _stage_topics(cfg: RunConfig, out: Path) -> list[Path]:
    docs = _corpus(cfg)
    emb = _embeddings(cfg)
    config = cfg.topic_config()
    assignment, topics, coherence_report = fit_topics(docs, emb, config, cfg.norm_config("topic"))
    params = {
        "target_dim": config.target_dim,
        "eps": config.eps,
        "min_pts": config.min_pts,
        "n_keywords": config.n_keywords,
        "top_m": config.top_m,
        "min_token_chars": config.min_token_chars,
        "seed": config.seed,
    }
    report_path = out / "topic_report.json"
    save_topic_report(topic_report(assignment, topics, coherence_report, params), report_path)
    assignments_path = out / "assignments.csv"
    save_assignments(assignment, assignments_path)
    return [report_path, assignments_path]


def _stage_interpret(cfg: RunConfig, out: Path) -> list[Path]:
    docs = _corpus(cfg)
    _assignment, topics = _rebuild_topics(cfg, out, docs)
    interpretations = interpret_topics(topics, docs, cfg.interpret_config())
    path = out / "interpretations.json"
    save_interpretations([interpretation_to_dict(i) for i in interpretations], path)
    return [path]


def _stage_train(cfg: RunConfig, out: Path) -> list[Path]:
    docs = _corpus(cfg)
    emb = _embeddings(cfg)
    task = cfg["task"]
    labeled = [(doc.id, doc.label) for doc in docs if doc.label is not None]
    if not labeled:
        raise ConfigError(f"corpus {cfg['corpus.path']} has no gold labels to train on")
    ids = [doc_id for doc_id, _label in labeled]
    dataset = LabeledDataset(task, emb.rows_for(ids), [label for _id, label in labeled])
    train, val = split_dataset(dataset, cfg["train.split_ratio"], cfg["seed"])
    model = train_linear_head(train, val, cfg.train_config())
    path = out / f"model_{task}.json"
    save_model(model_to_dict(model), path)
    return [path]


def _stage_predict(cfg: RunConfig, out: Path) -> list[Path]:
    emb = _embeddings(cfg)
    task = cfg["task"]
    model_path = Path(cfg["predict.model"]) if cfg["predict.model"] else out / f"model_{task}.json"
    if not model_path.is_file():
        raise ConfigError(f"model file not found: {model_path} (run the train stage first)")
    model = model_from_dict(load_model(model_path))
    if model.task != task:
        raise ConfigError(f"model {model_path} is for task {model.task!r}, not {task!r}")
    preds = predict(model, emb)
    path = _predictions_path(out, task)
    save_predictions(preds, path)
    return [path]


def _stage_evaluate(cfg: RunConfig, out: Path) -> list[Path]:
    docs = _corpus(cfg)
    task = cfg["task"]
    preds_path = _predictions_path(out, task)
    if not preds_path.is_file():
        raise ConfigError(f"predictions file not found: {preds_path} (run the predict stage first)")
    preds = load_predictions(preds_path, task)
    gold = {doc.id: doc.label for doc in docs if doc.label is not None}
    records = [rec for rec in preds.records if rec.doc_id in gold]
    if not records:
        raise ConfigError(f"no predictions in {preds_path} overlap gold-labeled documents")
    subset_gold = {rec.doc_id: gold[rec.doc_id] for rec in records}
    metrics = evaluate_predictions(PredictionSet(task, records), subset_gold)
    path = out / f"metrics_{task}.json"
    save_metrics(metrics, path)
    return [path]


def _stage_analyze(cfg: RunConfig, out: Path) -> list[Path]:
    docs = _corpus(cfg)
    assignment, topics = _rebuild_topics(cfg, out, docs)
    interp_path = out / "interpretations.json"
    if not interp_path.is_file():
        raise ConfigError(f"interpretations file not found: {interp_path} (run the interpret stage first)")
    interpretations = [interpretation_from_dict(e) for e in load_interpretations(interp_path)]

    task = cfg["task"]
    required = _predictions_path(out, task)
    if not required.is_file():
        raise ConfigError(f"predictions file not found: {required} (run the predict stage first)")
    preds_by_task = {task: load_predictions(required, task)}
    other = "hate" if task == "sentiment" else "sentiment"
    other_path = _predictions_path(out, other)
    if other_path.is_file():
        preds_by_task[other] = load_predictions(other_path, other)

    report = build_report(
        name=docs.name,
        docs=docs,
        topics=topics,
        assignment=assignment,
        interpretations=interpretations,
        sentiment_preds=preds_by_task.get("sentiment"),
        hate_preds=preds_by_task.get("hate"),
        norm_config=cfg.norm_config("topic"),
        bucket=cfg["analysis.bucket"],
        top_words=cfg["analysis.top_words"],
    )
    written: list[Path] = []
    if cfg["report.format"] == "json":
        report_path = out / "report.json"
        save_json(report_to_dict(report), report_path)
        written.append(report_path)
    written.extend(save_report_csvs(report, out))
    return written


_HANDLERS = {
    "normalize": _stage_normalize,
    "topics": _stage_topics,
    "interpret": _stage_interpret,
    "train": _stage_train,
    "predict": _stage_predict,
    "evaluate": _stage_evaluate,
    "analyze": _stage_analyze,
}


def _stage_pipeline(cfg: RunConfig, out: Path) -> list[Path]:
    written: list[Path] = []
    for name in STAGES:
        written.extend(_HANDLERS[name](cfg, out))
    return written


_HANDLERS["pipeline"] = _stage_pipeline


def _write_manifest(cfg: RunConfig, out: Path, subcommand: str, artifacts: list[Path]) -> None:
    manifest = {
        "subcommand": subcommand,
        "config": cfg.effective(),
        "config_hash": cfg.config_hash(),
        "versions": {
            "dialect-insights": __version__,
            "numpy": np.__version__,
            "python": platform.python_version(),
        },
        "artifacts": sorted(path.relative_to(out).as_posix() for path in artifacts),
    }
    save_json(manifest, out / "manifest.json")


def main(argv: list[str] | None = None) -> int:
    try:
        args = _build_parser().parse_args(argv)
        cfg = _build_config(args)
        out = Path(cfg["out"])
        out.mkdir(parents=True, exist_ok=True)
        artifacts = _HANDLERS[args.subcommand](cfg, out)
        _write_manifest(cfg, out, args.subcommand, artifacts)
        return 0
    except (ConfigError, CorpusFormatError, FileNotFoundError, ValueError) as exc:
        message = str(exc).replace("\n", "; ")
        print(f"error: validation: {message}", file=sys.stderr)
        return 2
    except Exception as exc:  # pragma: no cover - safety net
        message = f"{type(exc).__name__}: {exc}".replace("\n", "; ")
        print(f"error: internal: {message}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
