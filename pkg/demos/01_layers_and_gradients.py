"""
Layers and gradient checks
==========================

Builds a convolution, a max-pool and a transposed convolution by hand,
pushes a random batch through them and compares every backward pass with
central finite differences.
"""
import numpy as np

from pmtnet.layers import (
    Act, Kind, LayerSpec, LayerState,
    conv_backward, conv_forward, maxpool_backward, maxpool_forward,
    tconv_backward, tconv_forward,
)

rng = np.random.default_rng(0)

# A 3x3 tanh convolution over one 8x24 event-shaped channel
conv = LayerSpec(Kind.CONV, 1, 4, kernel=(3, 3), act=Act.TANH)
conv_state = LayerState.zeros(conv)
conv_state.weights = rng.normal(scale=0.3, size=conv_state.weights.shape)
x = rng.uniform(size=(2, 1, 8, 24))
y = conv_forward(x, conv_state, conv)
print("conv output", y.shape)

# Pooling halves each side, dropping the odd remainder
pool = LayerSpec(Kind.MAXPOOL, 4, 4, kernel=(2, 2), stride=(2, 2))
pooled = maxpool_forward(y, LayerState(), pool)
print("pooled", pooled.shape)

# Transposed convolution goes the other way: (in - 1) * 2 + kernel
up = LayerSpec(Kind.TCONV, 1, 2, kernel=(2, 4), stride=(2, 2))
up_state = LayerState.zeros(up)
up_state.weights = rng.normal(size=up_state.weights.shape)
print("tconv of a 1x1 map", tconv_forward(np.ones((1, 1, 1, 1)), up_state, up).shape)


def fd_check(forward, backward, spec, state, x, eps=1e-5):
    """Largest relative error between the analytic input gradient of
    sum(r * layer(x)) and its central difference."""
    r = rng.normal(size=forward(x, state, spec).shape)
    analytic = backward(r, state, spec)
    analytic = analytic[0] if isinstance(analytic, tuple) else analytic
    numeric = np.zeros_like(x)
    for i in np.ndindex(x.shape):
        old = x[i]
        x[i] = old + eps
        fp = np.sum(r * forward(x, state, spec, keep_cache=False))
        x[i] = old - eps
        fm = np.sum(r * forward(x, state, spec, keep_cache=False))
        x[i] = old
        numeric[i] = (fp - fm) / (2 * eps)
    return np.max(np.abs(analytic - numeric) / np.maximum(np.maximum(abs(analytic), abs(numeric)), 1e-8))


print("conv   grad error %.1e" % fd_check(conv_forward, conv_backward, conv, conv_state, x.copy()))
print("pool   grad error %.1e" % fd_check(maxpool_forward, maxpool_backward, pool, LayerState(), y.copy()))
print("tconv  grad error %.1e" % fd_check(tconv_forward, tconv_backward, up, up_state, rng.normal(size=(2, 1, 2, 3))))
