"""Dense feed-forward networks in plain numpy (float64 throughout).

ReLU hidden layers, identity or softmax output, MSE loss, analytic
backpropagation with a central-finite-difference checker, plain SGD, and a
JSON model format. Deliberately minimal: just enough substrate for a small
Q-network and a small regression head.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple

import json

import numpy as np

from .errors import CorruptModel, ShapeMismatch, VersionMismatch

SCHEMA_VERSION = 1


class Gradients(NamedTuple):
    weights: list[np.ndarray]
    biases: list[np.ndarray]


@dataclass
class Mlp:
    """Weights are (fan_out, fan_in) per layer; biases are (fan_out,)."""

    layer_sizes: list[int]
    weights: list[np.ndarray]
    biases: list[np.ndarray]
    output_activation: str = "identity"

    @staticmethod
    def initialize(layer_sizes: list[int], output_activation: str = "identity",
                   seed: int | np.random.SeedSequence = 0) -> "Mlp":
        """Seeded uniform init in [-1/sqrt(fan_in), +1/sqrt(fan_in)]."""
        if len(layer_sizes) < 2 or any(s < 1 for s in layer_sizes):
            raise ValueError(f"bad layer sizes {layer_sizes}")
        if output_activation not in ("identity", "softmax"):
            raise ValueError(f"unknown output activation {output_activation!r}")
        rng = np.random.default_rng(seed)
        weights, biases = [], []
        for fan_in, fan_out in zip(layer_sizes, layer_sizes[1:]):
            bound = 1.0 / np.sqrt(fan_in)
            weights.append(rng.uniform(-bound, bound, size=(fan_out, fan_in)))
            biases.append(rng.uniform(-bound, bound, size=fan_out))
        return Mlp(list(layer_sizes), weights, biases, output_activation)

    def copy(self) -> "Mlp":
        return Mlp(
            list(self.layer_sizes),
            [w.copy() for w in self.weights],
            [b.copy() for b in self.biases],
            self.output_activation,
        )


def _softmax(z: np.ndarray) -> np.ndarray:
    shifted = z - z.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)


def _forward_cache(net: Mlp, X: np.ndarray) -> list[np.ndarray]:
    """Return per-layer activations [input, hidden..., output] for a batch."""
    activations = [X]
    a = X
    last = len(net.weights) - 1
    for i, (W, b) in enumerate(zip(net.weights, net.biases)):
        z = a @ W.T + b
        if i < last:
            a = np.maximum(z, 0.0)
        elif net.output_activation == "softmax":
            a = _softmax(z)
        else:
            a = z
        activations.append(a)
    return activations


def forward_batch(net: Mlp, X: np.ndarray) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != net.layer_sizes[0]:
        raise ShapeMismatch(
            f"expected (n, {net.layer_sizes[0]}) input, got {X.shape}"
        )
    return _forward_cache(net, X)[-1]


def forward(net: Mlp, x: np.ndarray) -> np.ndarray:
    """Single-sample forward pass."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1 or x.shape[0] != net.layer_sizes[0]:
        raise ShapeMismatch(f"expected length-{net.layer_sizes[0]} input, got {x.shape}")
    return forward_batch(net, x[None, :])[0]


def mse_loss(pred: np.ndarray, target: np.ndarray) -> float:
    pred = np.asarray(pred, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    if pred.shape != target.shape:
        raise ShapeMismatch(f"pred {pred.shape} vs target {target.shape}")
    diff = pred - target
    return float(np.mean(diff * diff))


def backward(net: Mlp, X: np.ndarray, target: np.ndarray) -> Gradients:
    """Analytic gradients of the mean-squared-error loss.

    Accepts a single sample (1-D) or a batch (2-D); batch gradients are for
    the loss averaged over every entry, matching mse_loss.
    """
    X = np.asarray(X, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    single = X.ndim == 1
    if single:
        X = X[None, :]
        target = target[None, :]
    if X.shape[1] != net.layer_sizes[0] or target.shape[1] != net.layer_sizes[-1]:
        raise ShapeMismatch(
            f"input {X.shape} / target {target.shape} do not match layers "
            f"{net.layer_sizes}"
        )
    if X.shape[0] != target.shape[0]:
        raise ShapeMismatch("input and target batch sizes differ")

    activations = _forward_cache(net, X)
    out = activations[-1]
    # d(mean squared error)/d(output)
    g = 2.0 * (out - target) / out.size
    if net.output_activation == "softmax":
        # rows of the softmax Jacobian: diag(s) - s s^T
        dz = out * (g - np.sum(g * out, axis=1, keepdims=True))
    else:
        dz = g

    weight_grads: list[np.ndarray] = [None] * len(net.weights)  # type: ignore
    bias_grads: list[np.ndarray] = [None] * len(net.biases)  # type: ignore
    for layer in range(len(net.weights) - 1, -1, -1):
        a_prev = activations[layer]
        weight_grads[layer] = dz.T @ a_prev
        bias_grads[layer] = dz.sum(axis=0)
        if layer > 0:
            da = dz @ net.weights[layer]
            dz = da * (activations[layer] > 0.0)
    return Gradients(weight_grads, bias_grads)


def sgd_step(net: Mlp, gradients: Gradients, learning_rate: float) -> Mlp:
    """In-place plain gradient descent; returns the same net."""
    if len(gradients.weights) != len(net.weights):
        raise ShapeMismatch("gradient layer count mismatch")
    for W, dW in zip(net.weights, gradients.weights):
        if W.shape != dW.shape:
            raise ShapeMismatch(f"weight grad {dW.shape} vs {W.shape}")
        W -= learning_rate * dW
    for b, db in zip(net.biases, gradients.biases):
        if b.shape != db.shape:
            raise ShapeMismatch(f"bias grad {db.shape} vs {b.shape}")
        b -= learning_rate * db
    return net


def numeric_gradients(net: Mlp, X: np.ndarray, target: np.ndarray,
                      h: float = 1e-5) -> Gradients:
    """Central finite differences of the MSE loss, parameter by parameter."""
    X = np.asarray(X, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    if X.ndim == 1:
        X = X[None, :]
        target = target[None, :]

    def loss() -> float:
        return mse_loss(forward_batch(net, X), target)

    def diff_array(param: np.ndarray) -> np.ndarray:
        grad = np.zeros_like(param)
        it = np.nditer(param, flags=["multi_index"])
        while not it.finished:
            idx = it.multi_index
            original = param[idx]
            param[idx] = original + h
            hi = loss()
            param[idx] = original - h
            lo = loss()
            param[idx] = original
            grad[idx] = (hi - lo) / (2.0 * h)
            it.iternext()
        return grad

    return Gradients(
        [diff_array(W) for W in net.weights],
        [diff_array(b) for b in net.biases],
    )


def gradient_check(net: Mlp, X: np.ndarray, target: np.ndarray,
                   h: float = 1e-5) -> float:
    """Worst relative disagreement between analytic and numeric gradients.

    Relative error uses a 1e-4 denominator floor so near-zero pairs compare
    on an absolute scale.
    """
    analytic = backward(net, X, target)
    numeric = numeric_gradients(net, X, target, h=h)
    worst = 0.0
    for a_arrays, n_arrays in ((analytic.weights, numeric.weights),
                               (analytic.biases, numeric.biases)):
        for a, n in zip(a_arrays, n_arrays):
            denom = np.maximum(np.maximum(np.abs(a), np.abs(n)), 1e-4)
            worst = max(worst, float(np.max(np.abs(a - n) / denom)))
    return worst


class Adam:
    """Adam optimizer state for one network (bias-corrected moments)."""

    def __init__(self, net: Mlp, learning_rate: float, beta1: float = 0.9,
                 beta2: float = 0.999, eps: float = 1e-8):
        self.learning_rate = learning_rate
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self._m = [np.zeros_like(p) for p in (*net.weights, *net.biases)]
        self._v = [np.zeros_like(p) for p in (*net.weights, *net.biases)]

    def step(self, net: Mlp, gradients: Gradients) -> Mlp:
        params = (*net.weights, *net.biases)
        grads = (*gradients.weights, *gradients.biases)
        if len(params) != len(self._m):
            raise ShapeMismatch("optimizer state does not match network")
        self.t += 1
        c1 = 1.0 - self.beta1 ** self.t
        c2 = 1.0 - self.beta2 ** self.t
        for p, g, m, v in zip(params, grads, self._m, self._v):
            if p.shape != g.shape:
                raise ShapeMismatch(f"gradient {g.shape} vs parameter {p.shape}")
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * g * g
            p -= self.learning_rate * (m / c1) / (np.sqrt(v / c2) + self.eps)
        return net


@dataclass(frozen=True)
class TrainSpec:
    learning_rate: float
    batch_size: int
    epochs: int

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be > 0")
        if self.batch_size < 1 or self.epochs < 1:
            raise ValueError("batch_size and epochs must be >= 1")


def train_regression(net: Mlp, inputs: np.ndarray, targets: np.ndarray,
                     spec: TrainSpec, rng: np.random.Generator) -> Mlp:
    """Minibatch SGD on the MSE loss; epoch order is drawn from rng."""
    inputs = np.asarray(inputs, dtype=np.float64)
    targets = np.asarray(targets, dtype=np.float64)
    n = inputs.shape[0]
    for _ in range(spec.epochs):
        order = rng.permutation(n)
        for lo in range(0, n, spec.batch_size):
            idx = order[lo:lo + spec.batch_size]
            grads = backward(net, inputs[idx], targets[idx])
            sgd_step(net, grads, spec.learning_rate)
    return net


def save(net: Mlp, path: str | Path) -> None:
    payload = {
        "schema_version": SCHEMA_VERSION,
        "layer_sizes": list(net.layer_sizes),
        "output_activation": net.output_activation,
        "weights": [w.ravel(order="C").tolist() for w in net.weights],
        "biases": [b.tolist() for b in net.biases],
    }
    Path(path).write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")


def load(path: str | Path) -> Mlp:
    try:
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise CorruptModel(f"{path}: {exc}") from exc
    if not isinstance(payload, dict):
        raise CorruptModel(f"{path}: model file is not a JSON object")
    version = payload.get("schema_version")
    if version != SCHEMA_VERSION:
        raise VersionMismatch(f"{path}: schema {version!r}, expected {SCHEMA_VERSION}")
    try:
        layer_sizes = [int(s) for s in payload["layer_sizes"]]
        activation = payload["output_activation"]
        weights = []
        biases = []
        for i, (fan_in, fan_out) in enumerate(zip(layer_sizes, layer_sizes[1:])):
            w = np.asarray(payload["weights"][i], dtype=np.float64)
            if w.size != fan_in * fan_out:
                raise CorruptModel(
                    f"{path}: layer {i} has {w.size} weights, "
                    f"expected {fan_in * fan_out}"
                )
            weights.append(w.reshape(fan_out, fan_in))
            b = np.asarray(payload["biases"][i], dtype=np.float64)
            if b.shape != (fan_out,):
                raise CorruptModel(f"{path}: layer {i} bias shape {b.shape}")
            biases.append(b)
    except (KeyError, IndexError, TypeError, ValueError) as exc:
        raise CorruptModel(f"{path}: {exc}") from exc
    if activation not in ("identity", "softmax"):
        raise CorruptModel(f"{path}: unknown activation {activation!r}")
    net = Mlp(layer_sizes, weights, biases, activation)
    for arrays in (net.weights, net.biases):
        for a in arrays:
            if not np.all(np.isfinite(a)):
                raise CorruptModel(f"{path}: non-finite parameters")
    return net
