"""Minimal dense neural-network engine: forward, analytic backprop, Adam.

Shared by the dimensionality-reduction, classification, and theory modules.
Activations: relu, linear, sigmoid, softmax.  Losses: mse (any output
activation), cross_entropy (softmax output, one-hot targets),
binary_cross_entropy (sigmoid output).

Parameters are held in float64; the VNET file format stores float32.
Dropout uses inverted scaling and is applied to hidden-layer outputs only
when a mask rng is supplied (training mode); inference is mask-free.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import binio

ACTIVATIONS = ("relu", "linear", "sigmoid", "softmax")
LOSSES = ("mse", "cross_entropy", "binary_cross_entropy")


class TrainingDivergedError(RuntimeError):
    """Loss became non-finite during training."""


@dataclass
class Layer:
    weights: np.ndarray  # (in_dim, out_dim)
    bias: np.ndarray     # (out_dim,)
    activation: str
    dropout_rate: float = 0.0

    def __post_init__(self):
        if self.activation not in ACTIVATIONS:
            raise ValueError(f"unknown activation {self.activation!r}")
        if not 0.0 <= self.dropout_rate < 1.0:
            raise ValueError("dropout_rate must be in [0, 1)")

    @property
    def in_dim(self) -> int:
        return self.weights.shape[0]

    @property
    def out_dim(self) -> int:
        return self.weights.shape[1]


@dataclass
class DenseNet:
    layers: list[Layer]

    def __post_init__(self):
        for prev, nxt in zip(self.layers, self.layers[1:]):
            if prev.out_dim != nxt.in_dim:
                raise ValueError(
                    f"layer widths do not chain: {prev.out_dim} -> {nxt.in_dim}")

    @property
    def in_dim(self) -> int:
        return self.layers[0].in_dim

    @property
    def out_dim(self) -> int:
        return self.layers[-1].out_dim

    def copy(self) -> "DenseNet":
        return DenseNet([Layer(l.weights.copy(), l.bias.copy(),
                               l.activation, l.dropout_rate)
                         for l in self.layers])


@dataclass
class TrainConfig:
    epochs: int = 100
    batch_size: int = 32
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    loss: str = "mse"
    seed: int = 0
    l2: float = 0.0  # penalty l2 * sum(W**2) on weights, not biases

    def __post_init__(self):
        # epochs == 0 is allowed as an explicit "no updates" run
        if self.epochs < 0:
            raise ValueError("epochs must be >= 0")
        if self.learning_rate < 0.0:
            raise ValueError("learning_rate must be >= 0")
        if self.loss not in LOSSES:
            raise ValueError(f"unknown loss {self.loss!r}")


def build_net(widths: list[int], activations: list[str],
              seed: int = 0, dropout: float = 0.0) -> DenseNet:
    """He-uniform init for relu layers, Xavier-uniform otherwise, seeded."""
    if len(activations) != len(widths) - 1:
        raise ValueError("need one activation per layer")
    rng = np.random.default_rng(seed)
    layers = []
    for i, act in enumerate(activations):
        fan_in, fan_out = widths[i], widths[i + 1]
        if act == "relu":
            limit = np.sqrt(6.0 / fan_in)
        else:
            limit = np.sqrt(6.0 / (fan_in + fan_out))
        weights = rng.uniform(-limit, limit, size=(fan_in, fan_out))
        rate = dropout if i < len(activations) - 1 else 0.0
        layers.append(Layer(weights, np.zeros(fan_out), act, rate))
    return DenseNet(layers)


def _activate(z: np.ndarray, kind: str) -> np.ndarray:
    if kind == "linear":
        return z
    if kind == "relu":
        return np.maximum(z, 0.0)
    if kind == "sigmoid":
        return 1.0 / (1.0 + np.exp(-z))
    # softmax, stabilized per row
    shifted = z - z.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


def _activation_backward(grad_out: np.ndarray, out: np.ndarray, kind: str) -> np.ndarray:
    """Gradient through the activation given its output value."""
    if kind == "linear":
        return grad_out
    if kind == "relu":
        return grad_out * (out > 0.0)
    if kind == "sigmoid":
        return grad_out * out * (1.0 - out)
    # softmax Jacobian: dz_i = a_i * (g_i - sum_j g_j a_j)
    dot = np.sum(grad_out * out, axis=1, keepdims=True)
    return out * (grad_out - dot)


@dataclass
class ForwardPass:
    inputs: np.ndarray
    activations: list[np.ndarray]   # pre-dropout activation output per layer
    flow: list[np.ndarray]          # what actually feeds the next layer
    dropout_masks: list[np.ndarray | None]

    @property
    def output(self) -> np.ndarray:
        return self.flow[-1]


def forward(net: DenseNet, batch: np.ndarray,
            dropout_rng: np.random.Generator | None = None) -> ForwardPass:
    """Run the net; a dropout rng switches training mode on."""
    batch = np.asarray(batch, dtype=np.float64)
    if batch.ndim != 2 or batch.shape[1] != net.in_dim:
        raise ValueError(
            f"batch width {batch.shape} does not match input dim {net.in_dim}")
    activations: list[np.ndarray] = []
    flow: list[np.ndarray] = []
    masks: list[np.ndarray | None] = []
    x = batch
    for layer in net.layers:
        a = _activate(x @ layer.weights + layer.bias, layer.activation)
        activations.append(a)
        mask = None
        if dropout_rng is not None and layer.dropout_rate > 0.0:
            keep = 1.0 - layer.dropout_rate
            mask = (dropout_rng.random(a.shape) < keep) / keep
            a = a * mask
        flow.append(a)
        masks.append(mask)
        x = a
    return ForwardPass(batch, activations, flow, masks)


def loss_value(output: np.ndarray, targets: np.ndarray, loss: str) -> float:
    targets = np.asarray(targets, dtype=np.float64)
    if output.shape != targets.shape:
        raise ValueError(f"targets {targets.shape} vs output {output.shape}")
    if loss == "mse":
        return float(np.mean((output - targets) ** 2))
    if loss == "cross_entropy":
        p = np.clip(output, 1e-12, None)
        return float(-np.sum(targets * np.log(p)) / output.shape[0])
    # binary cross entropy, mean over all elements
    p = np.clip(output, 1e-12, 1.0 - 1e-12)
    return float(np.mean(-targets * np.log(p) - (1.0 - targets) * np.log(1.0 - p)))


def _loss_grad(output: np.ndarray, targets: np.ndarray, loss: str,
               final_activation: str) -> tuple[np.ndarray, bool]:
    """Gradient at the output; second value says it is already pre-activation."""
    n = output.shape[0]
    if loss == "mse":
        return 2.0 * (output - targets) / output.size, False
    if loss == "cross_entropy":
        if final_activation != "softmax":
            raise ValueError("cross_entropy requires a softmax output layer")
        return (output - targets) / n, True
    if final_activation != "sigmoid":
        raise ValueError("binary_cross_entropy requires a sigmoid output layer")
    return (output - targets) / output.size, True


@dataclass
class Gradients:
    weight_grads: list[np.ndarray]
    bias_grads: list[np.ndarray]
    input_grad: np.ndarray
    loss: float


def _backprop(net: DenseNet, fwd: ForwardPass, grad: np.ndarray,
              pre_activation: bool) -> tuple[list[np.ndarray], list[np.ndarray], np.ndarray]:
    weight_grads: list[np.ndarray] = [np.empty(0)] * len(net.layers)
    bias_grads: list[np.ndarray] = [np.empty(0)] * len(net.layers)
    for i in reversed(range(len(net.layers))):
        layer = net.layers[i]
        mask = fwd.dropout_masks[i]
        if mask is not None:
            grad = grad * mask
        if pre_activation:
            grad_z = grad
            pre_activation = False
        else:
            grad_z = _activation_backward(grad, fwd.activations[i], layer.activation)
        below = fwd.flow[i - 1] if i > 0 else fwd.inputs
        weight_grads[i] = below.T @ grad_z
        bias_grads[i] = grad_z.sum(axis=0)
        grad = grad_z @ layer.weights.T
    return weight_grads, bias_grads, grad


def backward(net: DenseNet, batch: np.ndarray, targets: np.ndarray, loss: str,
             dropout_rng: np.random.Generator | None = None,
             fwd: ForwardPass | None = None) -> Gradients:
    """Analytic gradients of the batch loss for every parameter."""
    if fwd is None:
        fwd = forward(net, batch, dropout_rng)
    if loss != "mse" and net.layers[-1].dropout_rate > 0.0:
        raise ValueError("fused losses require a dropout-free output layer")
    targets = np.asarray(targets, dtype=np.float64)
    value = loss_value(fwd.output, targets, loss)
    grad, pre = _loss_grad(fwd.output, targets, loss, net.layers[-1].activation)
    wg, bg, input_grad = _backprop(net, fwd, grad, pre)
    return Gradients(wg, bg, input_grad, value)


def backward_from(net: DenseNet, fwd: ForwardPass,
                  output_grad: np.ndarray) -> Gradients:
    """Backprop an externally supplied gradient on the net's output.

    Lets a downstream consumer (another net, a custom objective) inject its
    gradient; returns the gradient w.r.t. this net's input as well.
    """
    wg, bg, input_grad = _backprop(net, fwd, output_grad, False)
    return Gradients(wg, bg, input_grad, float("nan"))


class AdamState:
    """Per-parameter first/second moment accumulators with bias correction."""

    def __init__(self, net: DenseNet, cfg: TrainConfig):
        self.cfg = cfg
        self.step = 0
        self.m = [(np.zeros_like(l.weights), np.zeros_like(l.bias)) for l in net.layers]
        self.v = [(np.zeros_like(l.weights), np.zeros_like(l.bias)) for l in net.layers]

    def apply(self, net: DenseNet, grads: Gradients) -> None:
        cfg = self.cfg
        self.step += 1
        bc1 = 1.0 - cfg.beta1 ** self.step
        bc2 = 1.0 - cfg.beta2 ** self.step
        for i, layer in enumerate(net.layers):
            for j, (param, grad) in enumerate(
                    ((layer.weights, grads.weight_grads[i]),
                     (layer.bias, grads.bias_grads[i]))):
                if j == 0 and cfg.l2 > 0.0:
                    grad = grad + 2.0 * cfg.l2 * param
                m = self.m[i][j]
                v = self.v[i][j]
                m *= cfg.beta1
                m += (1.0 - cfg.beta1) * grad
                v *= cfg.beta2
                v += (1.0 - cfg.beta2) * grad * grad
                param -= cfg.learning_rate * (m / bc1) / (np.sqrt(v / bc2) + cfg.epsilon)


def train(net: DenseNet, data: np.ndarray, targets: np.ndarray,
          cfg: TrainConfig) -> list[float]:
    """Adam training with seeded mini-batch shuffling; returns per-epoch loss trace.

    The net is updated in place.  A non-finite loss aborts with
    TrainingDivergedError.
    """
    data = np.asarray(data, dtype=np.float64)
    targets = np.asarray(targets, dtype=np.float64)
    if data.shape[0] != targets.shape[0]:
        raise ValueError("data and targets row counts differ")
    rng = np.random.default_rng(cfg.seed)
    adam = AdamState(net, cfg)
    trace: list[float] = []
    n = data.shape[0]
    for epoch in range(cfg.epochs):
        order = rng.permutation(n)
        epoch_loss = 0.0
        for start in range(0, n, cfg.batch_size):
            idx = order[start:start + cfg.batch_size]
            grads = backward(net, data[idx], targets[idx], cfg.loss,
                             dropout_rng=rng)
            if not np.isfinite(grads.loss):
                raise TrainingDivergedError(
                    f"non-finite loss at epoch {epoch}, batch row {start}")
            adam.apply(net, grads)
            epoch_loss += grads.loss * len(idx)
        trace.append(epoch_loss / n)
    return trace


def one_hot(indices: np.ndarray, n_classes: int) -> np.ndarray:
    indices = np.asarray(indices, dtype=np.int64)
    out = np.zeros((indices.shape[0], n_classes))
    out[np.arange(indices.shape[0]), indices] = 1.0
    return out


NET_MAGIC = "VNET"
NET_VERSION = 1


def write_net_to(fh, net: DenseNet) -> None:
    binio.write_u32(fh, len(net.layers))
    for layer in net.layers:
        binio.write_u32(fh, layer.in_dim)
        binio.write_u32(fh, layer.out_dim)
        binio.write_str(fh, layer.activation)
        binio.write_f64(fh, layer.dropout_rate)
        binio.write_f32_matrix(fh, layer.weights)
        binio.write_f32_matrix(fh, layer.bias.reshape(1, -1))


def read_net_from(fh) -> DenseNet:
    layers = []
    for _ in range(binio.read_u32(fh)):
        in_dim = binio.read_u32(fh)
        out_dim = binio.read_u32(fh)
        activation = binio.read_str(fh)
        rate = binio.read_f64(fh)
        weights = binio.read_f32_matrix(fh).astype(np.float64)
        bias = binio.read_f32_matrix(fh).astype(np.float64).ravel()
        if weights.shape != (in_dim, out_dim) or bias.shape != (out_dim,):
            raise binio.FormatError("layer shape mismatch")
        layers.append(Layer(weights, bias, activation, rate))
    return DenseNet(layers)


def save_net(net: DenseNet, path: str | Path) -> None:
    with open(path, "wb") as fh:
        binio.write_magic(fh, NET_MAGIC, NET_VERSION)
        write_net_to(fh, net)


def load_net(path: str | Path) -> DenseNet:
    with open(path, "rb") as fh:
        binio.read_magic(fh, NET_MAGIC, NET_VERSION)
        return read_net_from(fh)
