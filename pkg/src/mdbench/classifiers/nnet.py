"""Multilayer perceptron trained with Adadelta, plus logistic regression and
a linear SVM on the same mini-batch machinery.

The MLP uses rectifier hidden units, a softmax output, inverted dropout on
hidden activations (training only), and per-parameter Adadelta steps with an
optional classical-momentum term on the accumulated update. Multinomial
logistic regression is the zero-hidden-layer special case. The SVM is
one-vs-rest hinge loss with an L2 penalty and stochastic subgradient descent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from mdbench.classifiers.base import TrainingDivergedError, error_rate
from mdbench.seeding import substream

__all__ = [
    "MlpParams",
    "SvmParams",
    "AdadeltaState",
    "adadelta_step",
    "MlpModel",
    "SvmModel",
    "train_mlp",
    "train_logistic",
    "train_linear_svm",
    "loss_and_grads",
    "init_weights",
]


@dataclass(frozen=True)
class MlpParams:
    hidden_layers: tuple = (128, 128)
    dropout_rates: tuple = ()  # per hidden layer; empty = no dropout
    adadelta_rho: float = 0.95
    adadelta_eps: float = 1e-6
    lr_scale: float = 1.0
    momentum: tuple = (0.0, 0.0, 1)  # (start, end, ramp epochs); 0,0 = off
    epochs: int = 15
    batch_size: int = 256
    seed: int = 0

    def __post_init__(self):
        if any(h < 1 for h in self.hidden_layers):
            raise ValueError("hidden layer widths must be >= 1")
        if self.dropout_rates and len(self.dropout_rates) != len(self.hidden_layers):
            raise ValueError("dropout_rates must match hidden_layers")
        if any(not 0.0 <= r < 1.0 for r in self.dropout_rates):
            raise ValueError("dropout rates must be in [0, 1)")
        if not 0.0 < self.adadelta_rho < 1.0:
            raise ValueError("adadelta_rho must be in (0, 1)")
        if self.adadelta_eps <= 0 or self.lr_scale <= 0:
            raise ValueError("adadelta_eps and lr_scale must be positive")
        if self.epochs < 1 or self.batch_size < 1:
            raise ValueError("epochs and batch_size must be >= 1")

    def rates(self) -> tuple:
        return self.dropout_rates or (0.0,) * len(self.hidden_layers)


class AdadeltaState:
    """Decaying accumulators E[g^2] and E[dx^2], one pair per parameter array."""

    def __init__(self, shapes):
        self.eg2 = [np.zeros(s) for s in shapes]
        self.edx2 = [np.zeros(s) for s in shapes]


def adadelta_step(grad, eg2, edx2, rho: float, eps: float, lr_scale: float = 1.0):
    """One Adadelta update; mutates the accumulators, returns the parameter delta."""
    eg2 *= rho
    eg2 += (1.0 - rho) * grad * grad
    delta = -np.sqrt(edx2 + eps) / np.sqrt(eg2 + eps) * grad * lr_scale
    edx2 *= rho
    edx2 += (1.0 - rho) * delta * delta
    return delta


def init_weights(sizes, rng) -> list:
    """Uniform(+-sqrt(6/(fan_in+fan_out))) weights, zero biases."""
    params = []
    for fi, fo in zip(sizes[:-1], sizes[1:]):
        bound = math.sqrt(6.0 / (fi + fo))
        params.append([rng.uniform(-bound, bound, size=(fi, fo)), np.zeros(fo)])
    return params


def _softmax(z):
    z = z - z.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def loss_and_grads(params, X, y, dropout_masks=None):
    """Mean softmax cross-entropy and gradients for a rectifier MLP.

    ``params`` is a list of [W, b]; ``dropout_masks`` optionally gives one
    pre-scaled (inverted) multiplicative mask per hidden layer.
    """
    n = X.shape[0]
    n_hidden = len(params) - 1
    acts = [X]
    a = X
    for layer, (W, b) in enumerate(params[:-1]):
        z = a @ W + b
        a = np.maximum(z, 0.0)
        if dropout_masks is not None:
            a = a * dropout_masks[layer]
        acts.append(a)
    W, b = params[-1]
    logits = acts[-1] @ W + b
    logz = logits - logits.max(axis=1, keepdims=True)
    logsum = np.log(np.exp(logz).sum(axis=1, keepdims=True))
    logp = logz - logsum
    loss = float(-logp[np.arange(n), y].mean())

    probs = np.exp(logp)
    delta = probs
    delta[np.arange(n), y] -= 1.0
    delta /= n
    grads = [None] * len(params)
    for layer in range(len(params) - 1, -1, -1):
        a_prev = acts[layer]
        grads[layer] = [a_prev.T @ delta, delta.sum(axis=0)]
        if layer > 0:
            delta = delta @ params[layer][0].T
            if dropout_masks is not None:
                delta = delta * dropout_masks[layer - 1]
            delta = delta * (acts[layer] > 0.0)
    return loss, grads


@dataclass
class MlpModel:
    params: list  # [W, b] per layer
    n_classes: int
    config: MlpParams
    train_error: float = math.nan
    epochs_run: int = 0

    def decision_values(self, X) -> np.ndarray:
        a = np.asarray(X, dtype=np.float64)
        for W, b in self.params[:-1]:
            a = np.maximum(a @ W + b, 0.0)
        W, b = self.params[-1]
        return a @ W + b

    def predict_proba(self, X) -> np.ndarray:
        return _softmax(self.decision_values(X))

    def predict(self, X) -> np.ndarray:
        return self.decision_values(X).argmax(axis=1)


def _momentum_coeff(momentum, epoch: int) -> float:
    start, end, ramp = momentum
    if ramp <= 0:
        return float(end)
    frac = min(1.0, epoch / ramp)
    return float(start + (end - start) * frac)


def train_mlp(X, y, n_classes: int, params: MlpParams | None = None) -> MlpModel:
    """Mini-batch gradient descent with Adadelta steps; fixed epoch budget."""
    params = params or MlpParams()
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    n, d = X.shape
    sizes = [d, *params.hidden_layers, n_classes]
    init_rng = substream(params.seed, "init")
    weights = init_weights(sizes, init_rng)
    state = AdadeltaState([w.shape for layer in weights for w in layer])
    velocity = [np.zeros_like(w) for layer in weights for w in layer]
    rates = params.rates()
    use_dropout = any(r > 0 for r in rates)

    batch_rng = substream(params.seed, "batches")
    drop_rng = substream(params.seed, "dropout")
    for epoch in range(params.epochs):
        mu = _momentum_coeff(params.momentum, epoch)
        order = batch_rng.permutation(n)
        for lo in range(0, n, params.batch_size):
            sel = order[lo : lo + params.batch_size]
            Xb, yb = X[sel], y[sel]
            masks = None
            if use_dropout:
                masks = [
                    (drop_rng.random((len(sel), h)) >= r) / (1.0 - r) if r > 0
                    else np.ones((len(sel), h))
                    for h, r in zip(params.hidden_layers, rates)
                ]
            loss, grads = loss_and_grads(weights, Xb, yb, masks)
            if not math.isfinite(loss):
                raise TrainingDivergedError(
                    f"non-finite loss at epoch {epoch}, batch offset {lo}"
                )
            flat = 0
            for layer, g_layer in enumerate(grads):
                for k, g in enumerate(g_layer):
                    delta = adadelta_step(
                        g,
                        state.eg2[flat],
                        state.edx2[flat],
                        params.adadelta_rho,
                        params.adadelta_eps,
                        params.lr_scale,
                    )
                    if mu > 0:
                        velocity[flat] = mu * velocity[flat] + delta
                        weights[layer][k] += velocity[flat]
                    else:
                        weights[layer][k] += delta
                    flat += 1

    model = MlpModel(weights, n_classes, params, epochs_run=params.epochs)
    model.train_error = error_rate(model.predict(X), y)
    return model


def train_logistic(X, y, n_classes: int, params: MlpParams | None = None) -> MlpModel:
    """Multinomial logistic regression = MLP with no hidden layers."""
    base = params or MlpParams()
    cfg = MlpParams(
        hidden_layers=(),
        dropout_rates=(),
        adadelta_rho=base.adadelta_rho,
        adadelta_eps=base.adadelta_eps,
        lr_scale=base.lr_scale,
        momentum=base.momentum,
        epochs=base.epochs,
        batch_size=base.batch_size,
        seed=base.seed,
    )
    return train_mlp(X, y, n_classes, cfg)


@dataclass(frozen=True)
class SvmParams:
    l2: float = 1e-4
    lr0: float = 0.1
    lr_decay: float = 0.01
    epochs: int = 30
    batch_size: int = 256
    seed: int = 0


@dataclass
class SvmModel:
    W: np.ndarray  # n_classes x d
    b: np.ndarray  # n_classes
    n_classes: int
    config: SvmParams
    train_error: float = math.nan

    def decision_values(self, X) -> np.ndarray:
        return np.asarray(X, dtype=np.float64) @ self.W.T + self.b

    def predict(self, X) -> np.ndarray:
        return self.decision_values(X).argmax(axis=1)


def train_linear_svm(X, y, n_classes: int, params: SvmParams | None = None) -> SvmModel:
    """One-vs-rest hinge loss with L2 penalty, stochastic subgradient descent."""
    params = params or SvmParams()
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    n, d = X.shape
    W = np.zeros((n_classes, d))
    b = np.zeros(n_classes)
    signs = np.where(y[:, None] == np.arange(n_classes)[None, :], 1.0, -1.0)
    rng = substream(params.seed, "svm")
    step = 0
    for epoch in range(params.epochs):
        order = rng.permutation(n)
        for lo in range(0, n, params.batch_size):
            sel = order[lo : lo + params.batch_size]
            Xb = X[sel]
            sb = signs[sel]  # m x C
            m = len(sel)
            lr = params.lr0 / (1.0 + params.lr_decay * step)
            step += 1
            scores = Xb @ W.T + b  # m x C
            active = (sb * scores) < 1.0
            coef = -(sb * active) / m  # m x C
            gW = coef.T @ Xb + 2.0 * params.l2 * W
            gb = coef.sum(axis=0)
            if not np.all(np.isfinite(gW)):
                raise TrainingDivergedError(f"non-finite SVM gradient at step {step}")
            W -= lr * gW
            b -= lr * gb
    model = SvmModel(W, b, n_classes, params)
    model.train_error = error_rate(model.predict(X), y)
    return model
