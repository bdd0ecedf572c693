"""The supervised CNN and the convolutional autoencoder.

Layer chains (activation shapes per example)::

    cnn: (1,8,24) conv3x3/71 tanh (71,6,22) pool (71,3,11) conv2x2/88 tanh
         (88,2,10) pool (88,1,5) fc 26 tanh -> fc 5 softmax
    cae: (1,8,24) conv5x5/16 pad2 relu (16,8,24) pool (16,4,12)
         conv3x3/16 pad(1,0) relu (16,4,10) pool (16,2,5) fc 10 relu
         -> (10,1,1) deconv2x4/16 (16,2,4) deconv2x5/16 (16,4,11)
         deconv2x4/1 (1,8,24)

Convolutions in the CNN are unpadded. Transposed convolutions use stride 2
and are linear.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import BuildError, KindError, ShapeError
from .layers import (
    FORWARD,
    Act,
    Kind,
    LayerSpec,
    LayerState,
    conv_backward,
    dense_backward,
    maxpool_backward,
    tconv_backward,
)
from .tensor import Prng

INPUT_SHAPE = (1, 8, 24)


class ModelKind(enum.IntEnum):
    SUPERVISED_CNN = 1
    CONV_AUTOENCODER = 2


@dataclass(frozen=True)
class InitConfig:
    """Glorot-uniform initialization: U(-a, a), a = sqrt(6 / (fan_in + fan_out))."""

    seed: int = 0
    scheme: str = "glorot_uniform"


CNN_SHAPES = [(71, 6, 22), (71, 3, 11), (88, 2, 10), (88, 1, 5), (26,), (5,)]
CAE_SHAPES = [(16, 8, 24), (16, 4, 12), (16, 4, 10), (16, 2, 5), (10,), (16, 2, 4), (16, 4, 11), (1, 8, 24)]


class Model:
    def __init__(self, kind: ModelKind, specs, states=None, input_shape=INPUT_SHAPE):
        self.kind = ModelKind(kind)
        self.specs = list(specs)
        self.states = list(states) if states is not None else [LayerState.zeros(s) for s in self.specs]
        self.input_shape = tuple(input_shape)
        self._grads = [None] * len(self.specs)
        self._out_shapes = None

    def __len__(self):
        return len(self.specs)

    def forward(self, x: np.ndarray, train: bool = False, upto: int | None = None) -> np.ndarray:
        """Run layers ``[0, upto)`` (all by default) on a batch shaped (n, 1, 8, 24)."""
        out_shapes = []
        for spec, st in zip(self.specs[:upto], self.states[:upto]):
            if spec.kind is not Kind.DENSE and x.ndim == 2:
                x = x.reshape(x.shape[0], -1, 1, 1)
            x = FORWARD[spec.kind](x, st, spec, keep_cache=train)
            out_shapes.append(x.shape)
        if train:
            self._out_shapes = out_shapes
        return x

    def backward(self, grad: np.ndarray, wrt_preactivation: bool = False) -> np.ndarray:
        """Backpropagate ``grad`` (w.r.t. the last forward output) and store
        parameter gradients; returns the gradient w.r.t. the input."""
        if self._out_shapes is None or len(self._out_shapes) != len(self.specs):
            raise ShapeError("backward requires a full training forward pass")
        for i in reversed(range(len(self.specs))):
            spec, st = self.specs[i], self.states[i]
            grad = grad.reshape(self._out_shapes[i])
            if spec.kind is Kind.CONV:
                grad, gw, gb = conv_backward(grad, st, spec)
            elif spec.kind is Kind.TCONV:
                grad, gw, gb = tconv_backward(grad, st, spec)
            elif spec.kind is Kind.DENSE:
                fused = wrt_preactivation and i == len(self.specs) - 1
                grad, gw, gb = dense_backward(grad, st, spec, wrt_preactivation=fused)
            else:
                grad, gw, gb = maxpool_backward(grad, st, spec), None, None
            self._grads[i] = (gw, gb)
        self._out_shapes = None
        return grad

    def parameters(self) -> list[np.ndarray]:
        out = []
        for st in self.states:
            if st.weights is not None:
                out += [st.weights, st.bias]
        return out

    def gradients(self) -> list[np.ndarray]:
        out = []
        for st, g in zip(self.states, self._grads):
            if st.weights is not None:
                if g is None:
                    raise ShapeError("no gradients available; run backward first")
                out += list(g)
        return out

    def parameter_counts(self) -> list[int]:
        return [st.weights.size + st.bias.size for st in self.states if st.weights is not None]

    def activation_shapes(self) -> list[tuple[int, ...]]:
        x = np.zeros((1,) + self.input_shape)
        shapes = []
        for i in range(len(self.specs)):
            x = self._step(i, x)
            shapes.append(x.shape[1:])
        return shapes

    def _step(self, i: int, x: np.ndarray) -> np.ndarray:
        spec = self.specs[i]
        if spec.kind is not Kind.DENSE and x.ndim == 2:
            x = x.reshape(x.shape[0], -1, 1, 1)
        return FORWARD[spec.kind](x, self.states[i], spec, keep_cache=False)


def init_parameters(model: Model, init: InitConfig) -> Model:
    if init.scheme != "glorot_uniform":
        raise BuildError(f"unknown init scheme {init.scheme!r}")
    root = Prng(init.seed)
    for i, (spec, st) in enumerate(zip(model.specs, model.states)):
        if st.weights is None:
            continue
        fan_in, fan_out = spec.fans()
        a = np.sqrt(6.0 / (fan_in + fan_out))
        st.weights = root.spawn(i).uniform(-a, a, st.weights.size).reshape(st.weights.shape)
        st.bias = np.zeros(spec.filters)
    return model


def _audit(model: Model, expected) -> Model:
    got = model.activation_shapes()
    if got != [tuple(s) for s in expected]:
        raise BuildError(f"activation chain {got} does not match {expected}")
    return model


def cnn_specs(conv_filters=(71, 88), hidden: int = 26, n_classes: int = 5) -> list[LayerSpec]:
    f1, f2 = conv_filters
    return [
        LayerSpec(Kind.CONV, 1, f1, kernel=(3, 3), act=Act.TANH),
        LayerSpec(Kind.MAXPOOL, f1, f1, kernel=(2, 2), stride=(2, 2)),
        LayerSpec(Kind.CONV, f1, f2, kernel=(2, 2), act=Act.TANH),
        LayerSpec(Kind.MAXPOOL, f2, f2, kernel=(2, 2), stride=(2, 2)),
        LayerSpec(Kind.DENSE, f2 * 1 * 5, hidden, kernel=(1, 5), act=Act.TANH),
        LayerSpec(Kind.DENSE, hidden, n_classes, act=Act.SOFTMAX),
    ]


def cae_specs() -> list[LayerSpec]:
    return [
        LayerSpec(Kind.CONV, 1, 16, kernel=(5, 5), pad=(2, 2), act=Act.RELU),
        LayerSpec(Kind.MAXPOOL, 16, 16, kernel=(2, 2), stride=(2, 2)),
        LayerSpec(Kind.CONV, 16, 16, kernel=(3, 3), pad=(1, 0), act=Act.RELU),
        LayerSpec(Kind.MAXPOOL, 16, 16, kernel=(2, 2), stride=(2, 2)),
        LayerSpec(Kind.DENSE, 16 * 2 * 5, 10, kernel=(2, 5), act=Act.RELU),
        LayerSpec(Kind.TCONV, 10, 16, kernel=(2, 4), stride=(2, 2)),
        LayerSpec(Kind.TCONV, 16, 16, kernel=(2, 5), stride=(2, 2)),
        LayerSpec(Kind.TCONV, 16, 1, kernel=(2, 4), stride=(2, 2)),
    ]


def build_supervised_cnn(init: InitConfig = InitConfig(), conv_filters=(71, 88), hidden: int = 26, n_classes: int = 5) -> Model:
    """Build the six-layer classifier. Non-default widths give thinned
    variants with the same layer kinds (used for end-to-end gradient checks)."""
    specs = cnn_specs(conv_filters, hidden, n_classes)
    model = init_parameters(Model(ModelKind.SUPERVISED_CNN, specs), init)
    f1, f2 = conv_filters
    return _audit(model, [(f1, 6, 22), (f1, 3, 11), (f2, 2, 10), (f2, 1, 5), (hidden,), (n_classes,)])


def build_conv_autoencoder(init: InitConfig = InitConfig()) -> Model:
    model = init_parameters(Model(ModelKind.CONV_AUTOENCODER, cae_specs()), init)
    return _audit(model, CAE_SHAPES)


# -- inference --------------------------------------------------------------------

def _require(model: Model, kind: ModelKind):
    if model.kind is not kind:
        raise KindError(f"operation needs a {kind.name} model, got {model.kind.name}")


def as_batch(grids) -> tuple[np.ndarray, bool]:
    g = np.asarray(grids, dtype=np.float64)
    single = g.ndim == 2
    if single:
        g = g[None]
    if g.ndim == 3:
        g = g[:, None]
    if g.shape[1:] != INPUT_SHAPE:
        raise ShapeError(f"expected 8x24 grids, got {g.shape}")
    return g, single


def _batched(model: Model, x: np.ndarray, upto=None, batch_size: int = 512) -> np.ndarray:
    parts = [model.forward(x[i : i + batch_size], upto=upto) for i in range(0, len(x), batch_size)]
    return np.concatenate(parts)


def predict(model: Model, grids):
    """Class label(s) and softmax probabilities; argmax ties go to the lowest index."""
    _require(model, ModelKind.SUPERVISED_CNN)
    x, single = as_batch(grids)
    probs = _batched(model, x)
    labels = probs.argmax(axis=1)
    return (int(labels[0]), probs[0]) if single else (labels, probs)


def extract_features(model: Model, grids) -> np.ndarray:
    """Penultimate (tanh) layer activations, 26 per event."""
    _require(model, ModelKind.SUPERVISED_CNN)
    x, single = as_batch(grids)
    f = _batched(model, x, upto=len(model) - 1)
    return f[0] if single else f


def encode(model: Model, grids) -> np.ndarray:
    """Bottleneck (ReLU) codes, 10 per event."""
    _require(model, ModelKind.CONV_AUTOENCODER)
    x, single = as_batch(grids)
    bottleneck = next(i for i, s in enumerate(model.specs) if s.kind is Kind.DENSE)
    f = _batched(model, x, upto=bottleneck + 1)
    return f[0] if single else f


def reconstruct(model: Model, grids) -> np.ndarray:
    _require(model, ModelKind.CONV_AUTOENCODER)
    x, single = as_batch(grids)
    r = _batched(model, x)[:, 0]
    return r[0] if single else r
