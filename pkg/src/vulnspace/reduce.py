"""Dimensionality reduction of document embeddings.

Three routes: PCA (SVD of the centered data, deterministic sign fix),
an unsupervised autoencoder with relu hidden layers and a linear code,
and a supervised bottleneck whose narrow trunk output is the reduced
representation, trained jointly against per-component categorical labels
with one softmax head per component.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import binio
from . import neuralcore as nc

PROVENANCE_TAGS = ("raw", "pca", "ae", "mlp_bottleneck")
MISSING = -1


@dataclass(frozen=True)
class PcaModel:
    mean: np.ndarray
    components: np.ndarray          # (d, input_dim), orthonormal rows
    explained_variance: np.ndarray  # non-increasing


@dataclass(frozen=True)
class ReducedEmbedding:
    matrix: np.ndarray
    provenance: str

    def __post_init__(self):
        if self.provenance not in PROVENANCE_TAGS:
            raise ValueError(f"unknown provenance {self.provenance!r}")
        if not np.all(np.isfinite(self.matrix)):
            raise ValueError("reduced matrix contains non-finite values")

    @property
    def dim(self) -> int:
        return self.matrix.shape[1]


def pca_fit(X: np.ndarray, d: int) -> PcaModel:
    """Top-d principal directions via SVD of the mean-centered data.

    Sign convention: each component's largest-magnitude entry is positive.
    """
    X = np.asarray(X, dtype=np.float64)
    n = X.shape[0]
    if not 1 <= d < n:
        raise ValueError(f"need N > d >= 1, got N={n}, d={d}")
    mean = X.mean(axis=0)
    centered = X - mean
    _, singular, vt = np.linalg.svd(centered, full_matrices=False)
    tol = singular[0] * max(X.shape) * np.finfo(np.float64).eps if singular.size else 0.0
    rank = int(np.sum(singular > tol))
    if d > rank:
        raise ValueError(f"requested {d} components but data rank is {rank}")
    components = vt[:d].copy()
    for row in components:
        if row[np.argmax(np.abs(row))] < 0:
            row *= -1.0
    explained = (singular[:d] ** 2) / (n - 1)
    return PcaModel(mean=mean, components=components, explained_variance=explained)


def pca_transform(model: PcaModel, X: np.ndarray) -> ReducedEmbedding:
    X = np.asarray(X, dtype=np.float64)
    if X.shape[1] != model.mean.shape[0]:
        raise ValueError(f"width {X.shape[1]} != model width {model.mean.shape[0]}")
    return ReducedEmbedding((X - model.mean) @ model.components.T, "pca")


def pca_inverse(model: PcaModel, Y: np.ndarray) -> np.ndarray:
    Y = np.asarray(Y, dtype=np.float64)
    if Y.shape[1] != model.components.shape[0]:
        raise ValueError(f"width {Y.shape[1]} != component count "
                         f"{model.components.shape[0]}")
    return Y @ model.components + model.mean


@dataclass
class AeConfig:
    hidden: tuple[int, int] = (500, 2000)
    width_scale: float = 1.0  # desk-scale runs shrink the hidden widths
    dropout: float = 0.1
    train: nc.TrainConfig = field(default_factory=lambda: nc.TrainConfig(
        epochs=200, batch_size=64, learning_rate=1e-3, loss="mse"))

    def scaled_hidden(self) -> tuple[int, int]:
        return tuple(max(2, int(round(h * self.width_scale))) for h in self.hidden)


def ae_fit(X: np.ndarray, d: int, cfg: AeConfig | None = None) -> tuple[nc.DenseNet, nc.DenseNet, list[float]]:
    """Autoencoder in -> h1 -> h2 -> d -> h2 -> h1 -> in; returns (encoder, decoder, loss trace)."""
    cfg = cfg or AeConfig()
    X = np.asarray(X, dtype=np.float64)
    in_dim = X.shape[1]
    if d >= in_dim:
        raise ValueError(f"code dim {d} must be below input dim {in_dim}")
    h1, h2 = cfg.scaled_hidden()
    widths = [in_dim, h1, h2, d, h2, h1, in_dim]
    activations = ["relu", "relu", "linear", "relu", "relu", "linear"]
    net = nc.build_net(widths, activations, seed=cfg.train.seed, dropout=cfg.dropout)
    # the code layer feeds downstream consumers: keep it mask-free
    net.layers[2].dropout_rate = 0.0
    trace = nc.train(net, X, X, replace(cfg.train, loss="mse"))
    encoder = nc.DenseNet(net.layers[:3])
    decoder = nc.DenseNet(net.layers[3:])
    return encoder, decoder, trace


def encode(encoder: nc.DenseNet, X: np.ndarray,
           provenance: str = "ae") -> ReducedEmbedding:
    return ReducedEmbedding(nc.forward(encoder, X).output, provenance)


def reconstruction_mse(encoder: nc.DenseNet, decoder: nc.DenseNet,
                       X: np.ndarray) -> float:
    X = np.asarray(X, dtype=np.float64)
    code = nc.forward(encoder, X).output
    back = nc.forward(decoder, code).output
    return float(np.mean((back - X) ** 2))


@dataclass
class BottleneckConfig:
    hidden: int = 256
    dropout: float = 0.1
    train: nc.TrainConfig = field(default_factory=lambda: nc.TrainConfig(
        epochs=200, batch_size=64, learning_rate=1e-3, loss="cross_entropy"))


@dataclass
class BottleneckModel:
    trunk: nc.DenseNet                 # in -> hidden -> d
    heads: dict[str, nc.DenseNet]      # d -> |classes| softmax per component
    skipped: tuple[str, ...] = ()
    loss_trace: list[float] = field(default_factory=list)


def _head_batches(labels: dict[str, np.ndarray], idx: np.ndarray,
                  heads: dict[str, nc.DenseNet]) -> dict[str, tuple[np.ndarray, np.ndarray]]:
    out = {}
    for name, head in heads.items():
        y = labels[name][idx]
        rows = np.where(y != MISSING)[0]
        if rows.size:
            out[name] = (rows, nc.one_hot(y[rows], head.out_dim))
    return out


def bottleneck_fit(X: np.ndarray, labels: dict[str, np.ndarray], d: int,
                   cfg: BottleneckConfig | None = None) -> BottleneckModel:
    """Supervised reducer: shared trunk with one softmax head per component.

    labels maps component name to a per-row class index (MISSING for
    unlabeled rows).  Rows with no labeled component are excluded from
    training; the trunk still encodes every row.  Heads whose observed
    class count is below two are skipped with a warning.
    """
    cfg = cfg or BottleneckConfig()
    X = np.asarray(X, dtype=np.float64)
    in_dim = X.shape[1]

    heads: dict[str, nc.DenseNet] = {}
    skipped: list[str] = []
    rng_offset = 1
    for name in sorted(labels):
        y = labels[name]
        observed = np.unique(y[y != MISSING])
        if observed.size < 2:
            warnings.warn(f"bottleneck head {name!r} has a single observed "
                          "class; skipped")
            skipped.append(name)
            continue
        n_classes = int(y.max()) + 1
        heads[name] = nc.build_net([d, n_classes], ["softmax"],
                                   seed=cfg.train.seed + rng_offset)
        rng_offset += 1

    if not heads:
        raise ValueError("no trainable label component (all single-class)")

    trainable = np.zeros(X.shape[0], dtype=bool)
    for name in heads:
        trainable |= labels[name] != MISSING
    rows = np.where(trainable)[0]

    trunk = nc.build_net([in_dim, cfg.hidden, d], ["relu", "linear"],
                         seed=cfg.train.seed, dropout=cfg.dropout)
    adam_trunk = nc.AdamState(trunk, cfg.train)
    adam_heads = {name: nc.AdamState(head, cfg.train) for name, head in heads.items()}
    rng = np.random.default_rng(cfg.train.seed)
    trace: list[float] = []
    for _ in range(cfg.train.epochs):
        order = rows[rng.permutation(rows.size)]
        epoch_loss = 0.0
        for start in range(0, order.size, cfg.train.batch_size):
            idx = order[start:start + cfg.train.batch_size]
            fwd_trunk = nc.forward(trunk, X[idx], dropout_rng=rng)
            code = fwd_trunk.output
            code_grad = np.zeros_like(code)
            batch_loss = 0.0
            for name, (head_rows, targets) in _head_batches(labels, idx, heads).items():
                head = heads[name]
                fwd_head = nc.forward(head, code[head_rows])
                grads = nc.backward(head, code[head_rows], targets,
                                    "cross_entropy", fwd=fwd_head)
                if not np.isfinite(grads.loss):
                    raise nc.TrainingDivergedError(f"head {name!r} diverged")
                adam_heads[name].apply(head, grads)
                code_grad[head_rows] += grads.input_grad
                batch_loss += grads.loss
            trunk_grads = nc.backward_from(trunk, fwd_trunk, code_grad)
            adam_trunk.apply(trunk, trunk_grads)
            epoch_loss += batch_loss * idx.size
        trace.append(epoch_loss / max(rows.size, 1))
    return BottleneckModel(trunk=trunk, heads=heads, skipped=tuple(skipped),
                           loss_trace=trace)


def bottleneck_encode(model: BottleneckModel, X: np.ndarray) -> ReducedEmbedding:
    return ReducedEmbedding(nc.forward(model.trunk, X).output, "mlp_bottleneck")


def multi_head_loss(model: BottleneckModel, X: np.ndarray,
                    labels: dict[str, np.ndarray]) -> tuple[float, dict[str, float]]:
    """Summed cross-entropy over heads plus the per-head breakdown."""
    code = nc.forward(model.trunk, np.asarray(X, dtype=np.float64)).output
    per_head: dict[str, float] = {}
    for name, head in model.heads.items():
        y = labels[name]
        rows = np.where(y != MISSING)[0]
        if rows.size == 0:
            continue
        out = nc.forward(head, code[rows]).output
        per_head[name] = nc.loss_value(out, nc.one_hot(y[rows], head.out_dim),
                                       "cross_entropy")
    return sum(per_head.values()), per_head


EMBEDDING_MAGIC = "VEMB"
EMBEDDING_VERSION = 1


def save_embedding(matrix: np.ndarray, provenance: str, path: str | Path) -> None:
    with open(path, "wb") as fh:
        binio.write_magic(fh, EMBEDDING_MAGIC, EMBEDDING_VERSION)
        binio.write_str(fh, provenance)
        binio.write_f32_matrix(fh, np.asarray(matrix))


def load_embedding(path: str | Path) -> ReducedEmbedding:
    with open(path, "rb") as fh:
        binio.read_magic(fh, EMBEDDING_MAGIC, EMBEDDING_VERSION)
        provenance = binio.read_str(fh)
        matrix = binio.read_f32_matrix(fh).astype(np.float64)
    return ReducedEmbedding(matrix, provenance)
