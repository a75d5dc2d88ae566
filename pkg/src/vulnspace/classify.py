"""Classifiers over (reduced) embeddings and their evaluation reports.

Label tasks are single-label problems built from snapshot fields: one task
per CVSS component, the primary (first-listed) CWE, the publication year,
and a coarse day-of-year bucket.  Rows without the label carry MISSING and
are excluded from fitting and scoring.

Tie-breaking is deterministic everywhere: argmax resolves to the lowest
class index, kNN distance ties resolve by training-row order.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from . import neuralcore as nc
from .corpus import Snapshot

MISSING = -1

DAY_BUCKETS = 12


@dataclass(frozen=True)
class LabelTask:
    name: str
    classes: tuple[str, ...]
    y: np.ndarray  # per-row class index or MISSING

    def __post_init__(self):
        observed = np.unique(self.y[self.y != MISSING])
        if observed.size and observed.max() >= len(self.classes):
            raise ValueError(f"{self.name}: target index outside class list")

    @property
    def labeled_rows(self) -> np.ndarray:
        return np.where(self.y != MISSING)[0]


def _component_task(name: str, classes: list[str], values: list[str | None]) -> LabelTask:
    index = {c: i for i, c in enumerate(classes)}
    y = np.array([MISSING if v is None else index[v] for v in values], dtype=np.int64)
    return LabelTask(name, tuple(classes), y)


def _bool_to_class(value: bool | None) -> str:
    if value is None:
        return "UNKNOWN"
    return "TRUE" if value else "FALSE"


def tasks_from_snapshot(snapshot: Snapshot) -> dict[str, LabelTask]:
    """All supported label tasks, keyed by task name."""
    records = snapshot.records
    tasks: dict[str, LabelTask] = {}

    v2_fields = [("AV", "access_vector", ["LOCAL", "ADJACENT_NETWORK", "NETWORK"]),
                 ("AC", "access_complexity", ["HIGH", "MEDIUM", "LOW"]),
                 ("Au", "authentication", ["MULTIPLE", "SINGLE", "NONE"]),
                 ("C", "confidentiality", ["NONE", "PARTIAL", "COMPLETE"]),
                 ("I", "integrity", ["NONE", "PARTIAL", "COMPLETE"]),
                 ("A", "availability", ["NONE", "PARTIAL", "COMPLETE"])]
    for short, attr, classes in v2_fields:
        values = [getattr(r.cvss_v2, attr) if r.cvss_v2 else None for r in records]
        tasks[f"cvss_v2.{short}"] = _component_task(f"cvss_v2.{short}", classes, values)
    for short, attr in (("UI", "user_interaction_required"),
                        ("OP", "obtain_privileges")):
        values = [_bool_to_class(getattr(r.cvss_v2, attr)) if r.cvss_v2 else None
                  for r in records]
        tasks[f"cvss_v2.{short}"] = _component_task(
            f"cvss_v2.{short}", ["FALSE", "TRUE", "UNKNOWN"], values)

    v3_fields = [("AV", "attack_vector", ["NETWORK", "ADJACENT_NETWORK", "LOCAL", "PHYSICAL"]),
                 ("AC", "attack_complexity", ["LOW", "HIGH"]),
                 ("PR", "privileges_required", ["NONE", "LOW", "HIGH"]),
                 ("UI", "user_interaction", ["NONE", "REQUIRED"]),
                 ("S", "scope", ["UNCHANGED", "CHANGED"]),
                 ("C", "confidentiality", ["NONE", "LOW", "HIGH"]),
                 ("I", "integrity", ["NONE", "LOW", "HIGH"]),
                 ("A", "availability", ["NONE", "LOW", "HIGH"])]
    for short, attr, classes in v3_fields:
        values = [getattr(r.cvss_v3, attr) if r.cvss_v3 else None for r in records]
        tasks[f"cvss_v3.{short}"] = _component_task(f"cvss_v3.{short}", classes, values)

    # primary weakness: first listed CWE; the full list stays on the record
    cwe_values = [r.cwes[0] if r.cwes else None for r in records]
    cwe_classes = sorted({v for v in cwe_values if v is not None})
    tasks["cwe"] = _component_task("cwe", cwe_classes, cwe_values)

    year_classes = [str(y) for y in snapshot.years]
    tasks["year"] = _component_task("year", year_classes,
                                    [str(r.year) for r in records])

    day_classes = [f"bucket_{i}" for i in range(DAY_BUCKETS)]
    day_values = [f"bucket_{min(DAY_BUCKETS - 1, (r.day_of_year - 1) * DAY_BUCKETS // 366)}"
                  for r in records]
    tasks["day"] = _component_task("day", day_classes, day_values)
    return tasks


def v2_label_arrays(snapshot: Snapshot) -> dict[str, np.ndarray]:
    """Per-component target arrays for supervised reduction (V2 labels)."""
    tasks = tasks_from_snapshot(snapshot)
    return {name: task.y for name, task in tasks.items()
            if name.startswith("cvss_v2.")}


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ClassifierReport:
    accuracy: float
    balanced_accuracy: float
    macro_precision: float
    macro_recall: float
    macro_f1: float
    confusion: np.ndarray  # truth x predicted
    support: int

    def as_dict(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "balanced_accuracy": self.balanced_accuracy,
            "macro_precision": self.macro_precision,
            "macro_recall": self.macro_recall,
            "macro_f1": self.macro_f1,
            "support": self.support,
        }


def evaluate(predictions: np.ndarray, truth: np.ndarray,
             n_classes: int | None = None) -> ClassifierReport:
    """Accuracy, balanced accuracy (mean per-class recall), macro P/R/F1."""
    predictions = np.asarray(predictions)
    truth = np.asarray(truth)
    if predictions.shape != truth.shape:
        raise ValueError("length mismatch")
    keep = truth != MISSING
    predictions, truth = predictions[keep], truth[keep]
    if truth.size == 0:
        raise ValueError("no labeled rows to score")
    if n_classes is None:
        n_classes = int(max(truth.max(), predictions.max())) + 1
    confusion = np.zeros((n_classes, n_classes), dtype=np.int64)
    np.add.at(confusion, (truth, predictions), 1)
    accuracy = float(np.trace(confusion) / truth.size)

    true_pos = np.diag(confusion).astype(np.float64)
    per_class_support = confusion.sum(axis=1)
    predicted = confusion.sum(axis=0)
    with np.errstate(divide="ignore", invalid="ignore"):
        recall = np.where(per_class_support > 0, true_pos / per_class_support, 0.0)
        precision = np.where(predicted > 0, true_pos / predicted, 0.0)
        f1_num = 2.0 * precision * recall
        f1_den = precision + recall
        f1 = np.where(f1_den > 0, f1_num / np.maximum(f1_den, 1e-300), 0.0)
    present = per_class_support > 0
    balanced = float(recall[present].mean())
    return ClassifierReport(
        accuracy=accuracy,
        balanced_accuracy=balanced,
        macro_precision=float(precision[present].mean()),
        macro_recall=float(recall[present].mean()),
        macro_f1=float(f1[present].mean()),
        confusion=confusion,
        support=int(truth.size),
    )


# ---------------------------------------------------------------------------
# Gaussian Naive Bayes
# ---------------------------------------------------------------------------

VARIANCE_FLOOR = 1e-9


@dataclass
class NbModel:
    log_priors: np.ndarray
    means: np.ndarray      # (classes, features)
    variances: np.ndarray  # floored


def nb_fit(X: np.ndarray, y: np.ndarray) -> NbModel:
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y)
    keep = y != MISSING
    X, y = X[keep], y[keep]
    classes, counts = np.unique(y, return_counts=True)
    if classes.size < 2:
        raise ValueError("need at least 2 classes to fit")
    if np.any(counts < 2):
        raise ValueError("every class needs at least 2 samples")
    n_classes = int(y.max()) + 1
    means = np.zeros((n_classes, X.shape[1]))
    variances = np.full((n_classes, X.shape[1]), VARIANCE_FLOOR)
    priors = np.full(n_classes, 1e-300)
    for c in classes:
        members = X[y == c]
        means[c] = members.mean(axis=0)
        variances[c] = np.maximum(members.var(axis=0), VARIANCE_FLOOR)
        priors[c] = members.shape[0] / X.shape[0]
    return NbModel(np.log(priors), means, variances)


def nb_predict(model: NbModel, X: np.ndarray) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    # log N(x; mu, var) summed over features, per class
    scores = np.empty((X.shape[0], model.means.shape[0]))
    for c in range(model.means.shape[0]):
        var = model.variances[c]
        log_lik = -0.5 * (np.log(2.0 * np.pi * var) +
                          (X - model.means[c]) ** 2 / var).sum(axis=1)
        scores[:, c] = model.log_priors[c] + log_lik
    return np.argmax(scores, axis=1)


# ---------------------------------------------------------------------------
# k-nearest neighbors
# ---------------------------------------------------------------------------


def knn_predict(train_X: np.ndarray, train_y: np.ndarray,
                query_X: np.ndarray, k: int) -> np.ndarray:
    train_X = np.asarray(train_X, dtype=np.float64)
    query_X = np.asarray(query_X, dtype=np.float64)
    train_y = np.asarray(train_y)
    if not 1 <= k <= train_X.shape[0]:
        raise ValueError(f"k must be in 1..{train_X.shape[0]}")
    n_classes = int(train_y.max()) + 1
    out = np.empty(query_X.shape[0], dtype=np.int64)
    for i, q in enumerate(query_X):
        dist = np.sqrt(((train_X - q) ** 2).sum(axis=1))
        nearest = np.argsort(dist, kind="stable")[:k]
        votes = np.bincount(train_y[nearest], minlength=n_classes)
        out[i] = int(np.argmax(votes))
    return out


# ---------------------------------------------------------------------------
# Multinomial logistic regression (single softmax layer via the nn engine)
# ---------------------------------------------------------------------------


@dataclass
class LogregConfig:
    l2: float = 1e-4
    train: nc.TrainConfig = field(default_factory=lambda: nc.TrainConfig(
        epochs=300, batch_size=64, learning_rate=0.05, loss="cross_entropy"))


def logreg_fit(X: np.ndarray, y: np.ndarray, n_classes: int,
               cfg: LogregConfig | None = None) -> nc.DenseNet:
    cfg = cfg or LogregConfig()
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y)
    keep = y != MISSING
    X, y = X[keep], y[keep]
    if np.unique(y).size < 2:
        raise ValueError("need at least 2 classes")
    net = nc.build_net([X.shape[1], n_classes], ["softmax"], seed=cfg.train.seed)
    # convex objective: zero init keeps the fit equivariant under feature
    # permutation
    net.layers[0].weights[:] = 0.0
    train_cfg = replace(cfg.train, loss="cross_entropy", l2=cfg.l2)
    nc.train(net, X, nc.one_hot(y, n_classes), train_cfg)
    return net


def logreg_predict(net: nc.DenseNet, X: np.ndarray) -> np.ndarray:
    return np.argmax(nc.forward(net, np.asarray(X, dtype=np.float64)).output, axis=1)


# ---------------------------------------------------------------------------
# MLP family
# ---------------------------------------------------------------------------


@dataclass
class MlpFamilyConfig:
    hidden_width: int = 128
    dropout: float = 0.1
    depths: tuple[int, ...] = (1, 2, 3)
    train: nc.TrainConfig = field(default_factory=lambda: nc.TrainConfig(
        epochs=200, batch_size=64, learning_rate=1e-3, loss="cross_entropy"))


@dataclass
class MlpFamilyResult:
    models: dict[int, nc.DenseNet]
    reports: dict[int, ClassifierReport]
    best_depth: int


def mlp_family_fit(train_X: np.ndarray, train_y: np.ndarray,
                   val_X: np.ndarray, val_y: np.ndarray, n_classes: int,
                   cfg: MlpFamilyConfig | None = None) -> MlpFamilyResult:
    """One classifier per hidden-layer depth; best flagged by balanced accuracy."""
    cfg = cfg or MlpFamilyConfig()
    train_X = np.asarray(train_X, dtype=np.float64)
    keep = np.asarray(train_y) != MISSING
    train_X, train_y = train_X[keep], np.asarray(train_y)[keep]
    if np.unique(train_y).size < 2:
        raise ValueError("need at least 2 classes")
    targets = nc.one_hot(train_y, n_classes)
    models: dict[int, nc.DenseNet] = {}
    reports: dict[int, ClassifierReport] = {}
    for depth in cfg.depths:
        widths = [train_X.shape[1]] + [cfg.hidden_width] * depth + [n_classes]
        activations = ["relu"] * depth + ["softmax"]
        net = nc.build_net(widths, activations, seed=cfg.train.seed + depth,
                           dropout=cfg.dropout)
        nc.train(net, train_X, targets, replace(cfg.train, loss="cross_entropy"))
        models[depth] = net
        predictions = np.argmax(nc.forward(net, np.asarray(val_X, dtype=np.float64)).output, axis=1)
        reports[depth] = evaluate(predictions, val_y, n_classes)
    best_depth = max(sorted(reports), key=lambda d: reports[d].balanced_accuracy)
    return MlpFamilyResult(models, reports, best_depth)
