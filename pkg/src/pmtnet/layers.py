"""Layers with exact analytic gradients.

Each layer is a (``LayerSpec``, ``LayerState``) pair. Forward functions store
the intermediates needed by backward in ``state.cache`` unless called with
``keep_cache=False`` (inference); backward functions consume and clear it.
Convolutions are cross-correlations lowered through :func:`im2col`.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .errors import LabelError, ShapeError, StateError
from .tensor import col2im, conv_output_shape, im2col

CE_EPS = 1e-12


class Kind(enum.IntEnum):
    CONV = 0
    MAXPOOL = 1
    DENSE = 2
    TCONV = 3


class Act(enum.IntEnum):
    NONE = 0
    TANH = 1
    RELU = 2
    SOFTMAX = 3


@dataclass(frozen=True)
class LayerSpec:
    kind: Kind
    in_size: int  # input channels (conv kinds) or input units (dense)
    filters: int  # output channels or output units; pooling keeps channels
    kernel: tuple[int, int] = (1, 1)
    stride: tuple[int, int] = (1, 1)
    pad: tuple[int, int] = (0, 0)
    act: Act = Act.NONE

    def weight_shape(self) -> tuple[int, ...] | None:
        if self.kind is Kind.MAXPOOL:
            return None
        if self.kind is Kind.DENSE:
            return (self.filters, self.in_size)
        return (self.filters, self.in_size) + tuple(self.kernel)

    def fans(self) -> tuple[int, int]:
        if self.kind is Kind.DENSE:
            return self.in_size, self.filters
        area = self.kernel[0] * self.kernel[1]
        return self.in_size * area, self.filters * area


@dataclass
class LayerState:
    weights: np.ndarray | None = None
    bias: np.ndarray | None = None
    cache: Any = field(default=None, repr=False)

    @classmethod
    def zeros(cls, spec: LayerSpec) -> "LayerState":
        shape = spec.weight_shape()
        if shape is None:
            return cls()
        return cls(np.zeros(shape), np.zeros(spec.filters))


# -- activations -------------------------------------------------------------

def softmax(z: np.ndarray) -> np.ndarray:
    """Row-wise softmax over the last axis, stabilized by max subtraction."""
    z = np.asarray(z, dtype=np.float64)
    e = np.exp(z - z.max(axis=-1, keepdims=True))
    return e / e.sum(axis=-1, keepdims=True)


def activate(z: np.ndarray, act: Act) -> np.ndarray:
    if act is Act.NONE:
        return z
    if act is Act.TANH:
        return np.tanh(z)
    if act is Act.RELU:
        return np.maximum(z, 0.0)
    return softmax(z)


def activation_backward(grad_y: np.ndarray, z: np.ndarray, y: np.ndarray, act: Act) -> np.ndarray:
    if act is Act.NONE:
        return grad_y
    if act is Act.TANH:
        return grad_y * (1.0 - y * y)
    if act is Act.RELU:
        return grad_y * (z > 0)
    # softmax Jacobian-vector product along the last axis
    return y * (grad_y - np.sum(grad_y * y, axis=-1, keepdims=True))


def _take_cache(st: LayerState):
    if st.cache is None:
        raise StateError("backward called without a preceding forward pass")
    cache, st.cache = st.cache, None
    return cache


def _check_grad(grad_y, expected):
    if grad_y.shape != expected:
        raise ShapeError(f"gradient shape {grad_y.shape} does not match output {expected}")


# -- convolution ----------------------------------------------------------------

def conv_forward(x: np.ndarray, st: LayerState, spec: LayerSpec, keep_cache: bool = True) -> np.ndarray:
    if x.ndim != 4 or x.shape[1] != spec.in_size:
        raise ShapeError(f"conv expects (n, {spec.in_size}, h, w), got {x.shape}")
    n, _, h, w = x.shape
    hout, wout = conv_output_shape(h, w, spec.kernel, spec.stride, spec.pad)
    cols = im2col(x, spec.kernel, spec.stride, spec.pad)
    z = st.weights.reshape(spec.filters, -1) @ cols + st.bias[:, None]
    z = z.reshape(spec.filters, n, hout, wout).transpose(1, 0, 2, 3)
    y = activate(z, spec.act)
    if keep_cache:
        st.cache = (x.shape, cols, z, y)
    return y


def conv_backward(grad_y: np.ndarray, st: LayerState, spec: LayerSpec):
    x_shape, cols, z, y = _take_cache(st)
    _check_grad(grad_y, y.shape)
    gz = activation_backward(grad_y, z, y, spec.act)
    gz2 = gz.transpose(1, 0, 2, 3).reshape(spec.filters, -1)
    grad_w = (gz2 @ cols.T).reshape(st.weights.shape)
    grad_b = gz2.sum(axis=1)
    grad_cols = st.weights.reshape(spec.filters, -1).T @ gz2
    grad_x = col2im(grad_cols, x_shape, spec.kernel, spec.stride, spec.pad)
    return grad_x, grad_w, grad_b


# -- transposed convolution ---------------------------------------------------------

def tconv_output_shape(h: int, w: int, spec: LayerSpec) -> tuple[int, int]:
    (kh, kw), (sh, sw) = spec.kernel, spec.stride
    return (h - 1) * sh + kh, (w - 1) * sw + kw


def _tconv_matrix(st: LayerState, spec: LayerSpec) -> np.ndarray:
    # (filters, in, kh, kw) -> (in, filters*kh*kw): the weight matrix of the
    # convolution from output space back to input space that this layer is the adjoint of
    return st.weights.transpose(1, 0, 2, 3).reshape(spec.in_size, -1)


def tconv_forward(x: np.ndarray, st: LayerState, spec: LayerSpec, keep_cache: bool = True) -> np.ndarray:
    if x.ndim != 4 or x.shape[1] != spec.in_size:
        raise ShapeError(f"transposed conv expects (n, {spec.in_size}, h, w), got {x.shape}")
    n, _, h, w = x.shape
    hout, wout = tconv_output_shape(h, w, spec)
    out_shape = (n, spec.filters, hout, wout)
    xm = x.transpose(1, 0, 2, 3).reshape(spec.in_size, -1)
    cols = _tconv_matrix(st, spec).T @ xm
    z = col2im(cols, out_shape, spec.kernel, spec.stride, spec.pad) + st.bias[None, :, None, None]
    y = activate(z, spec.act)
    if keep_cache:
        st.cache = (xm, x.shape, z, y)
    return y


def tconv_backward(grad_y: np.ndarray, st: LayerState, spec: LayerSpec):
    xm, x_shape, z, y = _take_cache(st)
    _check_grad(grad_y, y.shape)
    gz = activation_backward(grad_y, z, y, spec.act)
    gcols = im2col(gz, spec.kernel, spec.stride, spec.pad)
    grad_xm = _tconv_matrix(st, spec) @ gcols
    n, c, h, w = x_shape
    grad_x = grad_xm.reshape(c, n, h, w).transpose(1, 0, 2, 3)
    gmat = xm @ gcols.T  # (in, filters*kh*kw)
    grad_w = gmat.reshape(spec.in_size, spec.filters, *spec.kernel).transpose(1, 0, 2, 3)
    grad_b = gz.sum(axis=(0, 2, 3))
    return grad_x, grad_w, grad_b


# -- pooling ---------------------------------------------------------------------

def maxpool_forward(x: np.ndarray, st: LayerState, spec: LayerSpec, keep_cache: bool = True) -> np.ndarray:
    """2x2/stride-2 max pooling; trailing odd rows and columns are dropped.

    Ties resolve to the first element of the window in row-major order.
    """
    if x.ndim != 4 or x.shape[1] != spec.in_size:
        raise ShapeError(f"pool expects (n, {spec.in_size}, h, w), got {x.shape}")
    kh, kw = spec.kernel
    n, c, h, w = x.shape
    oh, ow = (h - kh) // spec.stride[0] + 1, (w - kw) // spec.stride[1] + 1
    if oh < 1 or ow < 1:
        raise ShapeError(f"pool window {kh}x{kw} larger than input {h}x{w}")
    win = x[:, :, : oh * kh, : ow * kw].reshape(n, c, oh, kh, ow, kw)
    win = win.transpose(0, 1, 2, 4, 3, 5).reshape(n, c, oh, ow, kh * kw)
    arg = win.argmax(axis=-1)
    y = np.take_along_axis(win, arg[..., None], axis=-1)[..., 0]
    if keep_cache:
        st.cache = (x.shape, arg)
    return y


def maxpool_backward(grad_y: np.ndarray, st: LayerState, spec: LayerSpec) -> np.ndarray:
    x_shape, arg = _take_cache(st)
    _check_grad(grad_y, arg.shape)
    kh, kw = spec.kernel
    n, c, oh, ow = arg.shape
    win = np.zeros((n, c, oh, ow, kh * kw))
    np.put_along_axis(win, arg[..., None], grad_y[..., None], axis=-1)
    win = win.reshape(n, c, oh, ow, kh, kw).transpose(0, 1, 2, 4, 3, 5)
    grad_x = np.zeros(x_shape)
    grad_x[:, :, : oh * kh, : ow * kw] = win.reshape(n, c, oh * kh, ow * kw)
    return grad_x


# -- fully connected ----------------------------------------------------------------

def dense_forward(x: np.ndarray, st: LayerState, spec: LayerSpec, keep_cache: bool = True) -> np.ndarray:
    """Affine map on the flattened input; returns an (n, units) array."""
    xf = x.reshape(x.shape[0], -1)
    if xf.shape[1] != spec.in_size:
        raise ShapeError(f"dense expects {spec.in_size} input units, got {xf.shape[1]}")
    z = xf @ st.weights.T + st.bias
    y = activate(z, spec.act)
    if keep_cache:
        st.cache = (x.shape, xf, z, y)
    return y


def dense_backward(grad_y: np.ndarray, st: LayerState, spec: LayerSpec, wrt_preactivation: bool = False):
    """Backward pass; with ``wrt_preactivation`` the incoming gradient is taken
    with respect to the pre-activation (softmax + cross-entropy fusion)."""
    x_shape, xf, z, y = _take_cache(st)
    _check_grad(grad_y, y.shape)
    gz = grad_y if wrt_preactivation else activation_backward(grad_y, z, y, spec.act)
    grad_w = gz.T @ xf
    grad_b = gz.sum(axis=0)
    grad_x = (gz @ st.weights).reshape(x_shape)
    return grad_x, grad_w, grad_b


# -- losses -------------------------------------------------------------------------

def cross_entropy_loss(probs: np.ndarray, label):
    """Summed cross-entropy of softmax outputs and its gradient w.r.t. the logits.

    Accepts a single probability vector with an integer label, or an (n, k)
    batch with n labels.
    """
    probs = np.asarray(probs, dtype=np.float64)
    single = probs.ndim == 1
    p = probs[None] if single else probs
    lab = np.atleast_1d(np.asarray(label))
    if lab.shape != (p.shape[0],):
        raise ShapeError(f"{lab.shape[0]} labels for {p.shape[0]} probability rows")
    if not np.issubdtype(lab.dtype, np.integer) or lab.min() < 0 or lab.max() >= p.shape[1]:
        raise LabelError(f"labels must be integers in [0, {p.shape[1]})")
    rows = np.arange(p.shape[0])
    loss = float(-np.sum(np.log(p[rows, lab] + CE_EPS)))
    grad = p.copy()
    grad[rows, lab] -= 1.0
    return loss, grad[0] if single else grad


def sse_loss(recon: np.ndarray, target: np.ndarray):
    if recon.shape != target.shape:
        raise ShapeError(f"reconstruction {recon.shape} vs target {target.shape}")
    d = recon - target
    return float(np.sum(d * d)), 2.0 * d


FORWARD = {
    Kind.CONV: conv_forward,
    Kind.MAXPOOL: maxpool_forward,
    Kind.DENSE: dense_forward,
    Kind.TCONV: tconv_forward,
}
