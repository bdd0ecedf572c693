"""SGD with classical momentum and the shared mini-batch training loop."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DataError, ShapeError
from .layers import cross_entropy_loss, sse_loss
from .tensor import Prng


@dataclass(frozen=True)
class SgdConfig:
    learning_rate: float = 0.01
    momentum: float = 0.9
    batch_size: int = 64
    epochs: int = 10
    seed: int = 0

    def __post_init__(self):
        if not self.learning_rate >= 0:
            raise ConfigError("learning_rate must be non-negative")
        if not 0.0 <= self.momentum < 1.0:
            raise ConfigError("momentum must lie in [0, 1)")
        if self.batch_size < 1 or self.epochs < 1:
            raise ConfigError("batch_size and epochs must be positive")


CNN_SGD = SgdConfig(learning_rate=0.01, momentum=0.9)
CAE_SGD = SgdConfig(learning_rate=0.0005, momentum=0.9)


def sgd_step(params, grads, velocity, cfg: SgdConfig) -> None:
    """In place: ``v <- mu*v - lr*g``; ``p <- p + v``."""
    if not len(params) == len(grads) == len(velocity):
        raise ShapeError("params, grads and velocity differ in length")
    for p, g, v in zip(params, grads, velocity):
        if not p.shape == g.shape == v.shape:
            raise ShapeError(f"parameter {p.shape}, gradient {g.shape}, velocity {v.shape}")
        v *= cfg.momentum
        v -= cfg.learning_rate * g
        p += v


def zero_velocity(params) -> list[np.ndarray]:
    return [np.zeros_like(p) for p in params]


def batch_loss(model, x: np.ndarray, target: np.ndarray, loss_kind: str, backward: bool = True) -> float:
    """Summed loss over a batch; with ``backward`` fills the model's gradients
    with the batch mean."""
    out = model.forward(x, train=backward)
    if loss_kind == "ce":
        loss, grad = cross_entropy_loss(out, target)
    elif loss_kind == "sse":
        loss, grad = sse_loss(out, target)
    else:
        raise ConfigError(f"unknown loss kind {loss_kind!r}")
    if backward:
        model.backward(grad / x.shape[0], wrt_preactivation=loss_kind == "ce")
    return loss


def train_epoch(model, inputs, targets, cfg: SgdConfig, loss_kind: str, velocity=None, epoch: int = 0) -> float:
    """One pass over the data in a seeded shuffled order; returns the mean
    per-example loss accumulated during the pass.

    ``loss_kind`` is ``"ce"`` (softmax classifier, integer targets) or
    ``"sse"`` (reconstruction, tensor targets). ``velocity`` carries momentum
    across epochs; it is created fresh when omitted.
    """
    n = len(inputs)
    if n == 0:
        raise DataError("empty dataset")
    params = model.parameters()
    if velocity is None:
        velocity = zero_velocity(params)
    order = Prng(cfg.seed).spawn(epoch).permutation(n)
    total = 0.0
    for start in range(0, n, cfg.batch_size):
        idx = order[start : start + cfg.batch_size]
        total += batch_loss(model, inputs[idx], targets[idx], loss_kind)
        sgd_step(params, model.gradients(), velocity, cfg)
    return total / n


def fit(model, inputs, targets, cfg: SgdConfig, loss_kind: str, log=None) -> list[float]:
    velocity = zero_velocity(model.parameters())
    trace = []
    for epoch in range(cfg.epochs):
        trace.append(train_epoch(model, inputs, targets, cfg, loss_kind, velocity, epoch))
        if log is not None:
            log(epoch, trace[-1])
    return trace


def dataset_loss(model, inputs, targets, loss_kind: str, batch_size: int = 256) -> float:
    """Mean per-example loss of a frozen model."""
    total = 0.0
    for start in range(0, len(inputs), batch_size):
        sl = slice(start, start + batch_size)
        total += batch_loss(model, inputs[sl], targets[sl], loss_kind, backward=False)
    return total / len(inputs)
