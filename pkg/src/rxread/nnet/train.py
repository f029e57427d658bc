"""Minibatch training with CTC loss."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .. import ctc
from ..errors import NonFiniteLoss
from .model import NonFiniteTensor, forward_batch, loss_and_grads


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 50
    learning_rate: float = 1e-3
    batch_size: int = 16
    seed: int = 0
    optimizer: str = "adam"
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    def __post_init__(self):
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if not self.learning_rate >= 0:
            raise ValueError("learning_rate must be >= 0")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.optimizer not in ("adam", "sgd"):
            raise ValueError(f"unknown optimizer {self.optimizer!r}")


@dataclass(frozen=True)
class EpochStats:
    epoch: int
    mean_ctc_loss: float
    test_seq_accuracy: float


class Adam:
    def __init__(self, weights, lr, beta1=0.9, beta2=0.999, eps=1e-8):
        self.lr, self.beta1, self.beta2, self.eps = lr, beta1, beta2, eps
        self.m = {k: np.zeros_like(v) for k, v in weights.items()}
        self.v = {k: np.zeros_like(v) for k, v in weights.items()}
        self.t = 0

    def step(self, weights, grads):
        self.t += 1
        c1 = 1.0 - self.beta1 ** self.t
        c2 = 1.0 - self.beta2 ** self.t
        for name, g in grads.items():
            m, v = self.m[name], self.v[name]
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * g * g
            weights[name] -= self.lr * (m / c1) / (np.sqrt(v / c2) + self.eps)


class SGD:
    def __init__(self, weights, lr):
        self.lr = lr

    def step(self, weights, grads):
        for name, g in grads.items():
            weights[name] -= self.lr * g


def sequence_accuracy(model, samples, charset=None, batch_size=64):
    """Fraction of samples whose greedy decoding reproduces the label exactly."""
    if not samples:
        return float("nan")
    blank = model.config.num_classes - 1
    hits = 0
    for start in range(0, len(samples), batch_size):
        chunk = samples[start:start + batch_size]
        probs = forward_batch(model, np.stack([s.image for s in chunk]))
        for s, p in zip(chunk, probs):
            if tuple(ctc.collapse(p.argmax(axis=1), blank)) == tuple(s.label):
                hits += 1
    return hits / len(samples)


def train(model, train_set, test_set, cfg, progress=None):
    """Train a copy of ``model``; returns ``(model, history)``.

    Each epoch visits the training set in a freshly shuffled order drawn from
    a generator seeded with ``cfg.seed``.  ``history`` holds one
    :class:`EpochStats` per epoch with the mean training loss and greedy
    sequence accuracy on ``test_set``.
    """
    if not train_set:
        raise ValueError("training set is empty")
    model = model.copy()
    rng = np.random.default_rng(cfg.seed)
    if cfg.optimizer == "adam":
        opt = Adam(model.weights, cfg.learning_rate, cfg.beta1, cfg.beta2, cfg.eps)
    else:
        opt = SGD(model.weights, cfg.learning_rate)
    images = np.stack([s.image for s in train_set])
    labels = [list(s.label) for s in train_set]
    n = len(train_set)
    history = []
    for epoch in range(1, cfg.epochs + 1):
        order = rng.permutation(n)
        total = 0.0
        for b, start in enumerate(range(0, n, cfg.batch_size)):
            idx = order[start:start + cfg.batch_size]
            try:
                loss, grads = loss_and_grads(model, images[idx], [labels[i] for i in idx])
            except NonFiniteTensor:
                raise NonFiniteLoss(epoch, b) from None
            if not math.isfinite(loss) or not all(np.all(np.isfinite(g)) for g in grads.values()):
                raise NonFiniteLoss(epoch, b)
            opt.step(model.weights, grads)
            total += loss * len(idx)
        stats = EpochStats(epoch, total / n, sequence_accuracy(model, list(test_set)))
        history.append(stats)
        if progress is not None:
            progress(stats)
    return model, history
