"""Linear classification heads over frozen document embeddings.

A multinomial logistic regression head is trained with full-batch gradient
descent: linear learning-rate warmup followed by linear decay to zero,
cross-entropy loss with an L2 penalty of 0.5 * weight_decay * ||W||^2 on
the weight matrix (the bias is not penalized), and early stopping on
validation loss checked at step 0 and every eval_every steps thereafter.
The returned parameters are the ones from the best validation checkpoint.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .schemas import (
    ClassMetrics,
    EmbeddingMatrix,
    Metrics,
    PredictionRecord,
    PredictionSet,
    TASK_CLASSES,
)


@dataclass
class TrainConfig:
    learning_rate: float = 1e-4
    weight_decay: float = 0.01
    max_steps: int = 1000
    eval_every: int = 100
    patience: int = 5
    warmup_steps: int | None = None  # None means min(10000, max_steps // 10)
    seed: int = 0

    def __post_init__(self) -> None:
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.weight_decay < 0:
            raise ValueError("weight_decay must be non-negative")
        if self.max_steps < 0:
            raise ValueError("max_steps must be non-negative")
        if self.eval_every < 1:
            raise ValueError("eval_every must be at least 1")
        if self.patience < 1:
            raise ValueError("patience must be at least 1")

    def resolved_warmup(self) -> int:
        if self.warmup_steps is not None:
            if self.warmup_steps < 0:
                raise ValueError("warmup_steps must be non-negative")
            return self.warmup_steps
        return min(10000, self.max_steps // 10)

    def to_dict(self) -> dict:
        return {
            "learning_rate": self.learning_rate,
            "weight_decay": self.weight_decay,
            "max_steps": self.max_steps,
            "eval_every": self.eval_every,
            "patience": self.patience,
            "warmup_steps": self.resolved_warmup(),
            "seed": self.seed,
        }


@dataclass
class LabeledDataset:
    """Embeddings paired with gold labels for one task."""

    task: str
    features: EmbeddingMatrix
    labels: list[str]

    def __post_init__(self) -> None:
        if self.task not in TASK_CLASSES:
            raise ValueError(f"unknown task {self.task!r}")
        if len(self.labels) != self.features.count:
            raise ValueError(
                f"{len(self.labels)} labels for {self.features.count} feature rows"
            )
        classes = set(TASK_CLASSES[self.task])
        bad = sorted({label for label in self.labels if label not in classes})
        if bad:
            raise ValueError(f"labels {bad} not valid for task {self.task!r}")

    @property
    def count(self) -> int:
        return self.features.count

    def label_indices(self) -> np.ndarray:
        order = {cls: i for i, cls in enumerate(TASK_CLASSES[self.task])}
        return np.array([order[label] for label in self.labels], dtype=int)


@dataclass
class LinearModel:
    """A trained head: weights (dim, n_classes), bias, and training record."""

    task: str
    classes: list[str]
    weights: np.ndarray
    bias: np.ndarray
    config: dict = field(default_factory=dict)
    val_metrics: Metrics | None = None
    history: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.weights = np.asarray(self.weights, dtype=np.float64)
        self.bias = np.asarray(self.bias, dtype=np.float64)
        if self.weights.ndim != 2 or self.weights.shape[1] != len(self.classes):
            raise ValueError(
                f"weights shape {self.weights.shape} does not match {len(self.classes)} classes"
            )
        if self.bias.shape != (len(self.classes),):
            raise ValueError(f"bias shape {self.bias.shape} does not match classes")

    @property
    def dim(self) -> int:
        return self.weights.shape[0]


def split_dataset(
    dataset: LabeledDataset, ratio: float = 0.8, seed: int = 0
) -> tuple[LabeledDataset, LabeledDataset]:
    """Shuffle with the seeded generator and split into train/validation.

    The train side gets round(ratio * count) items, clamped so both sides
    stay non-empty. The two halves are disjoint and together cover the
    input exactly.
    """
    if not (0.0 < ratio < 1.0):
        raise ValueError("split ratio must lie strictly between 0 and 1")
    count = dataset.count
    if count < 2:
        raise ValueError("dataset must hold at least 2 items to split")
    rng = np.random.default_rng(seed)
    order = rng.permutation(count)
    n_train = int(round(ratio * count))
    n_train = min(max(n_train, 1), count - 1)
    return _take(dataset, order[:n_train]), _take(dataset, order[n_train:])


def _take(dataset: LabeledDataset, rows: np.ndarray) -> LabeledDataset:
    features = EmbeddingMatrix(
        dataset.features.values[rows],
        [dataset.features.doc_ids[i] for i in rows],
    )
    return LabeledDataset(dataset.task, features, [dataset.labels[i] for i in rows])


def softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=1, keepdims=True)
    exp = np.exp(shifted)
    return exp / exp.sum(axis=1, keepdims=True)


def mean_cross_entropy(
    weights: np.ndarray, bias: np.ndarray, features: np.ndarray, label_idx: np.ndarray
) -> float:
    probs = softmax(features @ weights + bias)
    picked = probs[np.arange(len(label_idx)), label_idx]
    with np.errstate(divide="ignore"):
        return float(-np.mean(np.log(picked)))


def loss_and_grad(
    weights: np.ndarray,
    bias: np.ndarray,
    features: np.ndarray,
    label_idx: np.ndarray,
    weight_decay: float,
) -> tuple[float, np.ndarray, np.ndarray]:
    """Penalized cross-entropy and its exact gradient."""
    n = features.shape[0]
    probs = softmax(features @ weights + bias)
    picked = probs[np.arange(n), label_idx]
    with np.errstate(divide="ignore"):
        loss = float(-np.mean(np.log(picked))) + 0.5 * weight_decay * float((weights**2).sum())
    grad_logits = probs.copy()
    grad_logits[np.arange(n), label_idx] -= 1.0
    grad_logits /= n
    grad_w = features.T @ grad_logits + weight_decay * weights
    grad_b = grad_logits.sum(axis=0)
    return loss, grad_w, grad_b


def learning_rate_at(step: int, config: TrainConfig) -> float:
    """Linear warmup to the base rate, then linear decay to zero at max_steps."""
    warmup = config.resolved_warmup()
    if warmup > 0 and step <= warmup:
        return config.learning_rate * step / warmup
    if config.max_steps <= warmup:
        return 0.0
    return config.learning_rate * (config.max_steps - step) / (config.max_steps - warmup)


def train_linear_head(
    train: LabeledDataset, val: LabeledDataset, config: TrainConfig | None = None
) -> LinearModel:
    """Fit the head on train, early-stopping on validation cross-entropy.

    Weights start at zero (the objective is convex, so no random restarts
    are needed) and the best-validation-loss parameters are returned, along
    with an eval history and the validation metrics of the final model.
    """
    config = config or TrainConfig()
    if val.task != train.task:
        raise ValueError(f"task mismatch: train {train.task!r} vs val {val.task!r}")
    if val.features.dim != train.features.dim:
        raise ValueError("train and validation feature dims differ")
    if len(set(train.labels)) < 2:
        raise ValueError("training set holds a single class, nothing to fit")

    classes = list(TASK_CLASSES[train.task])
    x_train = train.features.values
    y_train = train.label_indices()
    x_val = val.features.values
    y_val = val.label_indices()

    weights = np.zeros((train.features.dim, len(classes)))
    bias = np.zeros(len(classes))

    def record_eval(step: int) -> dict:
        train_loss = loss_and_grad(weights, bias, x_train, y_train, config.weight_decay)[0]
        val_loss = mean_cross_entropy(weights, bias, x_val, y_val)
        return {"step": step, "train_loss": train_loss, "val_loss": val_loss}

    evals = [record_eval(0)]
    best = {"step": 0, "val_loss": evals[0]["val_loss"], "weights": weights.copy(), "bias": bias.copy()}
    bad_evals = 0
    stopped_early = False
    steps_completed = 0

    for step in range(1, config.max_steps + 1):
        loss, grad_w, grad_b = loss_and_grad(weights, bias, x_train, y_train, config.weight_decay)
        if not np.isfinite(loss):
            raise ValueError(f"training diverged: non-finite loss at step {step}")
        rate = learning_rate_at(step, config)
        weights -= rate * grad_w
        bias -= rate * grad_b
        steps_completed = step
        if step % config.eval_every == 0:
            entry = record_eval(step)
            evals.append(entry)
            if entry["val_loss"] < best["val_loss"]:
                best = {
                    "step": step,
                    "val_loss": entry["val_loss"],
                    "weights": weights.copy(),
                    "bias": bias.copy(),
                }
                bad_evals = 0
            else:
                bad_evals += 1
                if bad_evals >= config.patience:
                    stopped_early = True
                    break

    model = LinearModel(
        task=train.task,
        classes=classes,
        weights=best["weights"],
        bias=best["bias"],
        config=config.to_dict(),
        history={
            "evals": evals,
            "best_step": best["step"],
            "steps_completed": steps_completed,
            "stopped_early": stopped_early,
        },
    )
    model.val_metrics = evaluate(predict(model, val.features), dict(zip(val.features.doc_ids, val.labels)))
    return model


def predict(model: LinearModel, features: EmbeddingMatrix) -> PredictionSet:
    """Label every row; confidence is the softmax mass of the chosen class."""
    if features.dim != model.dim:
        raise ValueError(f"feature dim {features.dim} does not match model dim {model.dim}")
    probs = softmax(features.values @ model.weights + model.bias)
    picked = probs.argmax(axis=1)  # ties resolve to the first class
    records = [
        PredictionRecord(doc_id, model.classes[cls], float(probs[row, cls]))
        for row, (doc_id, cls) in enumerate(zip(features.doc_ids, picked))
    ]
    return PredictionSet(model.task, records)


def evaluate(predictions: PredictionSet, gold: dict[str, str]) -> Metrics:
    """Per-class precision/recall/F and accuracy against gold labels."""
    pred_ids = {rec.doc_id for rec in predictions.records}
    if pred_ids != set(gold):
        missing = sorted(set(gold) - pred_ids)[:3]
        extra = sorted(pred_ids - set(gold))[:3]
        raise ValueError(f"prediction/gold id mismatch (missing {missing}, extra {extra})")
    classes = TASK_CLASSES[predictions.task]
    bad = sorted({label for label in gold.values() if label not in classes})
    if bad:
        raise ValueError(f"gold labels {bad} not valid for task {predictions.task!r}")

    confusion = {g: {p: 0 for p in classes} for g in classes}
    for rec in predictions.records:
        confusion[gold[rec.doc_id]][rec.label] += 1

    total = len(predictions.records)
    correct = sum(confusion[c][c] for c in classes)
    per_class: dict[str, ClassMetrics] = {}
    for cls in classes:
        tp = confusion[cls][cls]
        fp = sum(confusion[other][cls] for other in classes if other != cls)
        fn = sum(confusion[cls][other] for other in classes if other != cls)
        precision = tp / (tp + fp) if tp + fp else 0.0
        recall = tp / (tp + fn) if tp + fn else 0.0
        f_score = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
        per_class[cls] = ClassMetrics(precision, recall, f_score, support=tp + fn)
    accuracy = correct / total if total else 0.0
    return Metrics(accuracy, per_class, confusion)


def model_to_dict(model: LinearModel) -> dict:
    return {
        "task": model.task,
        "classes": list(model.classes),
        "dim": model.dim,
        "weights": [[float(v) for v in row] for row in model.weights],
        "bias": [float(v) for v in model.bias],
        "config": dict(model.config),
        "val_metrics": model.val_metrics.to_dict() if model.val_metrics else None,
        "history": model.history,
    }


def model_from_dict(raw: dict) -> LinearModel:
    weights = np.asarray(raw["weights"], dtype=np.float64)
    if weights.ndim != 2 or weights.shape[0] != raw["dim"]:
        raise ValueError(f"weights shape {weights.shape} does not match dim {raw['dim']}")
    val_metrics = Metrics.from_dict(raw["val_metrics"]) if raw.get("val_metrics") else None
    return LinearModel(
        task=raw["task"],
        classes=list(raw["classes"]),
        weights=weights,
        bias=np.asarray(raw["bias"], dtype=np.float64),
        config=dict(raw.get("config", {})),
        val_metrics=val_metrics,
        history=dict(raw.get("history", {})),
    )
