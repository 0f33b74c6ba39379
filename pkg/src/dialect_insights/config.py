"""Run configuration: dotted key=value files, overrides, and hashing.

Priority, lowest to highest: built-in defaults, the --config file, the
DI_STOPWORDS environment variable, then command-line flags. The effective
configuration (every key, defaults filled in) is what gets hashed into the
run manifest, so the hash changes exactly when some effective value does.
"""

from __future__ import annotations

import hashlib
import os
from dataclasses import dataclass
from pathlib import Path

from .classify import TrainConfig
from .interpret import InterpretConfig
from .rake import METRICS
from .textnorm import NormalizationConfig, load_stopwords
from .topics import TopicConfig


class ConfigError(ValueError):
    """Raised for malformed or inconsistent run configuration."""


_BOOL_VALUES = {"true": True, "yes": True, "1": True, "false": False, "no": False, "0": False}

# key -> (type tag, default, allowed values or None)
_SCHEMA: dict[str, tuple[str, object, tuple | None]] = {
    "corpus.path": ("str", "", None),
    "corpus.format": ("str", "auto", ("auto", "jsonl", "csv")),
    "corpus.name": ("str", "", None),
    "embeddings.path": ("str", "", None),
    "out": ("str", "out", None),
    "seed": ("int", 0, None),
    "task": ("str", "sentiment", ("sentiment", "hate")),
    "report.format": ("str", "json", ("json", "csv")),
    "normalize.lowercase": ("bool", True, None),
    "normalize.keep_emoji": ("bool", True, None),
    "normalize.stopwords": ("str", "default", None),
    "reduce.target_dim": ("int", 5, None),
    "cluster.eps": ("float", 0.5, None),
    "cluster.min_pts": ("int", 5, None),
    "topics.n_keywords": ("int", 5, None),
    "topics.top_m": ("int", 5, None),
    "topics.min_token_chars": ("int", 2, None),
    "rake.metric": ("str", "degree", METRICS),
    "interpret.phrases_per_length": ("int", 5, None),
    "train.split_ratio": ("float", 0.8, None),
    "train.learning_rate": ("float", 1e-4, None),
    "train.weight_decay": ("float", 0.01, None),
    "train.max_steps": ("int", 1000, None),
    "train.eval_every": ("int", 100, None),
    "train.patience": ("int", 5, None),
    "train.warmup_steps": ("str", "auto", None),
    "predict.model": ("str", "", None),
    "analysis.bucket": ("str", "day", ("day", "month")),
    "analysis.top_words": ("int", 50, None),
}


def parse_config_file(path: str | Path) -> dict[str, str]:
    """Read `key = value` lines; '#' starts a comment, blank lines ignored."""
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    values: dict[str, str] = {}
    with open(path, "r", encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            stripped = line.split("#", 1)[0].strip()
            if not stripped:
                continue
            if "=" not in stripped:
                raise ConfigError(f"{path}: line {line_no}: expected key = value")
            key, _, value = stripped.partition("=")
            key = key.strip()
            value = value.strip()
            if not key:
                raise ConfigError(f"{path}: line {line_no}: empty key")
            if key in values:
                raise ConfigError(f"{path}: line {line_no}: duplicate key {key!r}")
            values[key] = value
    return values


def _coerce(key: str, raw: str):
    kind, _default, allowed = _SCHEMA[key]
    if kind == "bool":
        if raw.lower() not in _BOOL_VALUES:
            raise ConfigError(f"config key {key!r}: expected a boolean, got {raw!r}")
        return _BOOL_VALUES[raw.lower()]
    if kind == "int":
        try:
            return int(raw)
        except ValueError as exc:
            raise ConfigError(f"config key {key!r}: expected an integer, got {raw!r}") from exc
    if kind == "float":
        try:
            return float(raw)
        except ValueError as exc:
            raise ConfigError(f"config key {key!r}: expected a number, got {raw!r}") from exc
    if allowed is not None and raw not in allowed:
        raise ConfigError(f"config key {key!r}: expected one of {sorted(allowed)}, got {raw!r}")
    return raw


def _render(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


@dataclass
class RunConfig:
    """Validated effective configuration for one CLI invocation."""

    values: dict[str, object]

    @classmethod
    def build(
        cls,
        file_values: dict[str, str] | None = None,
        flag_values: dict[str, str] | None = None,
        env: dict[str, str] | None = None,
    ) -> "RunConfig":
        env = os.environ if env is None else env
        merged: dict[str, object] = {key: default for key, (_k, default, _a) in _SCHEMA.items()}
        layers = [file_values or {}]
        if env.get("DI_STOPWORDS"):
            layers.append({"normalize.stopwords": env["DI_STOPWORDS"]})
        layers.append(flag_values or {})
        for layer in layers:
            for key, raw in layer.items():
                if key not in _SCHEMA:
                    raise ConfigError(f"unknown config key {key!r}")
                merged[key] = _coerce(key, raw) if isinstance(raw, str) else raw
        config = cls(merged)
        config._validate()
        return config

    def _validate(self) -> None:
        if self["train.split_ratio"] <= 0 or self["train.split_ratio"] >= 1:
            raise ConfigError("train.split_ratio must lie strictly between 0 and 1")
        if self["train.warmup_steps"] != "auto":
            try:
                steps = int(self["train.warmup_steps"])
            except (TypeError, ValueError) as exc:
                raise ConfigError("train.warmup_steps must be 'auto' or an integer") from exc
            if steps < 0:
                raise ConfigError("train.warmup_steps must be non-negative")
        stopwords = self["normalize.stopwords"]
        if stopwords != "default" and not Path(stopwords).is_file():
            raise ConfigError(f"stopword file not found: {stopwords}")

    def __getitem__(self, key: str):
        return self.values[key]

    def effective(self) -> dict[str, str]:
        return {key: _render(self.values[key]) for key in sorted(self.values)}

    def config_hash(self) -> str:
        flat = "\n".join(f"{key}={value}" for key, value in self.effective().items())
        return hashlib.sha256(flat.encode("utf-8")).hexdigest()

    # ----- builders for the module-level config objects -----

    def stopword_set(self) -> set[str] | None:
        source = self["normalize.stopwords"]
        if source == "default":
            return None
        return load_stopwords(source)

    def norm_config(self, mode: str) -> NormalizationConfig:
        return NormalizationConfig(
            mode=mode,
            stopwords=self.stopword_set(),
            lowercase=self["normalize.lowercase"],
            keep_emoji=self["normalize.keep_emoji"],
        )

    def topic_config(self) -> TopicConfig:
        return TopicConfig(
            target_dim=self["reduce.target_dim"],
            eps=self["cluster.eps"],
            min_pts=self["cluster.min_pts"],
            n_keywords=self["topics.n_keywords"],
            top_m=self["topics.top_m"],
            min_token_chars=self["topics.min_token_chars"],
            seed=self["seed"],
        )

    def interpret_config(self) -> InterpretConfig:
        return InterpretConfig(
            phrases_per_length=self["interpret.phrases_per_length"],
            metric=self["rake.metric"],
            norm=self.norm_config("phrase"),
        )

    def train_config(self) -> TrainConfig:
        warmup = self["train.warmup_steps"]
        return TrainConfig(
            learning_rate=self["train.learning_rate"],
            weight_decay=self["train.weight_decay"],
            max_steps=self["train.max_steps"],
            eval_every=self["train.eval_every"],
            patience=self["train.patience"],
            warmup_steps=None if warmup == "auto" else int(warmup),
            seed=self["seed"],
        )
