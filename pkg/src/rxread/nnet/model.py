"""The convolutional-recurrent recognizer and its CTC gradients.

Architecture (defaults in brackets)::

    input (H x W x 1) [32 x 128]
    conv 3x3 same, ReLU [32 filters] -> max-pool 2x2
    conv 3x3 same, ReLU [64 filters] -> max-pool 2x2
    columns -> sequence of T = W/4 vectors of (H/4 * filters) features
    LSTM [64 units] -> LSTM [128 units]
    dense + softmax over the charset plus blank

Weights live in a flat dict with these names:

==================  =====================================
``conv1/kernel``    ``(3, 3, 1, F1)``
``conv1/bias``      ``(F1,)``
``conv2/kernel``    ``(3, 3, F1, F2)``
``conv2/bias``      ``(F2,)``
``lstm1/w_x``       ``(H/4 * F2, 4 * U1)``
``lstm1/w_h``       ``(U1, 4 * U1)``
``lstm1/bias``      ``(4 * U1,)``
``lstm2/w_x``       ``(U1, 4 * U2)``
``lstm2/w_h``       ``(U2, 4 * U2)``
``lstm2/bias``      ``(4 * U2,)``
``dense/kernel``    ``(U2, C)``
``dense/bias``      ``(C,)``
==================  =====================================

LSTM gate blocks are ordered input, forget, cell, output.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .. import ctc
from ..errors import InfeasibleLabel, ShapeMismatch
from . import layers

KERNEL = 3
POOL = 2


class NonFiniteTensor(FloatingPointError):
    pass


@dataclass(frozen=True)
class ModelConfig:
    num_classes: int
    conv_filters: tuple = (32, 64)
    rnn_units: tuple = (64, 128)
    input_h: int = 32
    input_w: int = 128

    def __post_init__(self):
        object.__setattr__(self, "conv_filters", tuple(int(f) for f in self.conv_filters))
        object.__setattr__(self, "rnn_units", tuple(int(u) for u in self.rnn_units))
        if len(self.conv_filters) != 2 or len(self.rnn_units) != 2:
            raise ValueError("the recognizer has exactly two conv and two recurrent layers")
        if min(self.conv_filters + self.rnn_units) < 1:
            raise ValueError("layer sizes must be positive")
        if self.num_classes < 2:
            raise ValueError("need at least one symbol plus the blank")
        pool = POOL * POOL
        if self.input_h % pool or self.input_w % pool or self.input_h < pool or self.input_w < pool:
            raise ValueError(f"input size must be a positive multiple of {pool}")

    @property
    def timesteps(self):
        return self.input_w // (POOL * POOL)

    @property
    def feature_dim(self):
        return (self.input_h // (POOL * POOL)) * self.conv_filters[1]

    def weight_shapes(self):
        f1, f2 = self.conv_filters
        u1, u2 = self.rnn_units
        return {
            "conv1/kernel": (KERNEL, KERNEL, 1, f1),
            "conv1/bias": (f1,),
            "conv2/kernel": (KERNEL, KERNEL, f1, f2),
            "conv2/bias": (f2,),
            "lstm1/w_x": (self.feature_dim, 4 * u1),
            "lstm1/w_h": (u1, 4 * u1),
            "lstm1/bias": (4 * u1,),
            "lstm2/w_x": (u1, 4 * u2),
            "lstm2/w_h": (u2, 4 * u2),
            "lstm2/bias": (4 * u2,),
            "dense/kernel": (u2, self.num_classes),
            "dense/bias": (self.num_classes,),
        }


@dataclass
class Model:
    config: ModelConfig
    weights: dict

    def __post_init__(self):
        expected = self.config.weight_shapes()
        if list(self.weights) != list(expected):
            raise ShapeMismatch(f"weight names {list(self.weights)} != {list(expected)}")
        for name, shape in expected.items():
            w = self.weights[name]
            if tuple(w.shape) != shape:
                raise ShapeMismatch(f"{name}: shape {tuple(w.shape)} != {shape}")

    def copy(self):
        return Model(self.config, {k: v.copy() for k, v in self.weights.items()})


def _glorot(rng, shape):
    if len(shape) == 4:
        receptive = shape[0] * shape[1]
        fan_in, fan_out = receptive * shape[2], receptive * shape[3]
    else:
        fan_in, fan_out = shape
    limit = math.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=shape)


def init_model(config, seed=0):
    """Glorot-uniform kernels, zero biases, forget-gate biases of 1."""
    rng = np.random.default_rng(seed)
    weights = {}
    for name, shape in config.weight_shapes().items():
        if name.endswith("bias"):
            b = np.zeros(shape)
            if name.startswith("lstm"):
                units = shape[0] // 4
                b[units:2 * units] = 1.0
            weights[name] = b
        else:
            weights[name] = _glorot(rng, shape)
    return Model(config, weights)


def _check_batch(config, images):
    images = np.asarray(images, dtype=np.float64)
    if images.ndim == 2:
        images = images[None]
    if images.ndim != 3 or images.shape[1:] != (config.input_h, config.input_w):
        raise ShapeMismatch(
            f"input must be {config.input_h}x{config.input_w}, got {images.shape[-2:]}"
        )
    return images


def _forward(model, images):
    w = model.weights
    x = images[..., None]
    z1, conv1 = layers.conv3x3_forward(x, w["conv1/kernel"], w["conv1/bias"])
    a1 = np.maximum(z1, 0.0)
    p1, pool1 = layers.maxpool2_forward(a1)
    z2, conv2 = layers.conv3x3_forward(p1, w["conv2/kernel"], w["conv2/bias"])
    a2 = np.maximum(z2, 0.0)
    p2, pool2 = layers.maxpool2_forward(a2)
    n, hp, wp, ch = p2.shape
    seq = p2.transpose(0, 2, 1, 3).reshape(n, wp, hp * ch)
    h1, lstm1 = layers.lstm_forward(seq, w["lstm1/w_x"], w["lstm1/w_h"], w["lstm1/bias"])
    h2, lstm2 = layers.lstm_forward(h1, w["lstm2/w_x"], w["lstm2/w_h"], w["lstm2/bias"])
    logits = h2 @ w["dense/kernel"] + w["dense/bias"]
    log_probs = layers.log_softmax(logits)
    if not np.all(np.isfinite(log_probs)):
        raise NonFiniteTensor("non-finite values in network output")
    cache = (z1, conv1, pool1, z2, conv2, pool2, p2.shape, lstm1, lstm2, h2)
    return log_probs, cache


def _backward(model, cache, dlogits):
    w = model.weights
    z1, conv1, pool1, z2, conv2, pool2, p2_shape, lstm1, lstm2, h2 = cache
    n, hp, wp, ch = p2_shape
    units2 = h2.shape[-1]
    grads = {}
    d2 = dlogits.reshape(-1, dlogits.shape[-1])
    grads["dense/kernel"] = h2.reshape(-1, units2).T @ d2
    grads["dense/bias"] = d2.sum(axis=0)
    dh2 = dlogits @ w["dense/kernel"].T
    dh1, grads["lstm2/w_x"], grads["lstm2/w_h"], grads["lstm2/bias"] = layers.lstm_backward(
        dh2, lstm2, w["lstm2/w_x"], w["lstm2/w_h"])
    dseq, grads["lstm1/w_x"], grads["lstm1/w_h"], grads["lstm1/bias"] = layers.lstm_backward(
        dh1, lstm1, w["lstm1/w_x"], w["lstm1/w_h"])
    dp2 = dseq.reshape(n, wp, hp, ch).transpose(0, 2, 1, 3)
    dz2 = layers.maxpool2_backward(dp2, pool2) * (z2 > 0)
    dp1, grads["conv2/kernel"], grads["conv2/bias"] = layers.conv3x3_backward(
        dz2, conv2, w["conv2/kernel"])
    dz1 = layers.maxpool2_backward(dp1, pool1) * (z1 > 0)
    _, grads["conv1/kernel"], grads["conv1/bias"] = layers.conv3x3_backward(
        dz1, conv1, w["conv1/kernel"], need_dx=False)
    return {name: grads[name] for name in w}


def forward_batch(model, images):
    """Per-frame class probabilities for a batch, shape ``(N, T, C)``."""
    log_probs, _ = _forward(model, _check_batch(model.config, images))
    return np.exp(log_probs)


def forward(model, img):
    """Row-stochastic ``(T, C)`` probability matrix for one standardized image."""
    img = np.asarray(img)
    if img.ndim != 2:
        raise ShapeMismatch(f"expected a 2-D image, got shape {img.shape}")
    return forward_batch(model, img)[0]


def loss_and_grads(model, images, labels):
    """Mean CTC loss over a batch and its gradient for every weight."""
    images = _check_batch(model.config, images)
    if len(labels) != images.shape[0]:
        raise ValueError("one label per image required")
    T = model.config.timesteps
    for label in labels:
        if len(label) == 0 or not ctc.is_feasible(label, T):
            raise InfeasibleLabel(label, T)
    log_probs, cache = _forward(model, images)
    n = images.shape[0]
    dlogits = np.exp(log_probs)
    total = 0.0
    for k, label in enumerate(labels):
        loss, gamma = ctc.ctc_posteriors(log_probs[k], label)
        total += loss
        dlogits[k] -= gamma
    dlogits /= n
    return total / n, _backward(model, cache, dlogits)


def backward(model, img, label):
    """CTC loss of one image/label pair and its exact weight gradients."""
    img = np.asarray(img)
    if img.ndim != 2:
        raise ShapeMismatch(f"expected a 2-D image, got shape {img.shape}")
    return loss_and_grads(model, img[None], [list(label)])
