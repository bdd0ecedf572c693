"""Dense 4-D arrays, convolution lowering and the package-wide random generator.

Tensors are plain ``numpy.ndarray`` objects of dtype float64 laid out as
(batch, channel, row, column) in C order, so element ``(n, c, i, j)`` lives at
flat index ``((n*C + c)*H + i)*W + j``.
"""
from __future__ import annotations

import numpy as np

from .errors import ShapeError

_MASK64 = (1 << 64) - 1
_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)


def _mix64(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> np.uint64(30))) * _MIX1
    z = (z ^ (z >> np.uint64(27))) * _MIX2
    return z ^ (z >> np.uint64(31))


class Prng:
    """SplitMix64 generator.

    The state is a single 64-bit counter. Each draw advances it by the golden
    gamma ``0x9E3779B97F4A7C15`` and returns the finalizer::

        z = state
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
        z = (z ^ (z >> 27)) * 0x94D049BB133111EB
        z = z ^ (z >> 31)

    with all arithmetic modulo 2**64. Because the i-th output depends only on
    ``seed + i*gamma``, blocks of draws are produced vectorized and the
    sequence is identical on every platform.
    """

    def __init__(self, seed: int):
        self.seed = int(seed) & _MASK64
        self._state = self.seed

    def next_u64(self, n: int) -> np.ndarray:
        steps = np.arange(1, n + 1, dtype=np.uint64)
        with np.errstate(over="ignore"):
            z = np.uint64(self._state) + steps * _GAMMA
            out = _mix64(z)
        self._state = (self._state + n * 0x9E3779B97F4A7C15) & _MASK64
        return out

    def random(self, n: int | None = None):
        """Uniform doubles in [0, 1) with 53 bits of precision."""
        k = 1 if n is None else int(n)
        u = (self.next_u64(k) >> np.uint64(11)).astype(np.float64) * (1.0 / (1 << 53))
        return float(u[0]) if n is None else u

    def uniform(self, low: float, high: float, n: int | None = None):
        u = self.random(n)
        return low + (high - low) * u

    def integers(self, low: int, high: int, n: int | None = None):
        """Integers in [low, high)."""
        u = self.random(1 if n is None else n)
        v = low + np.floor(u * (high - low)).astype(np.int64)
        v = np.minimum(v, high - 1)
        return int(v[0]) if n is None else v

    def normal(self, n: int, loc: float = 0.0, scale: float = 1.0) -> np.ndarray:
        # Box-Muller, cosine branch only: two uniforms per normal
        u = self.random(2 * n).reshape(n, 2)
        r = np.sqrt(-2.0 * np.log1p(-u[:, 0]))
        return loc + scale * r * np.cos(2.0 * np.pi * u[:, 1])

    def exponential(self, n: int, scale: float = 1.0) -> np.ndarray:
        return -scale * np.log1p(-self.random(n))

    def permutation(self, n: int) -> np.ndarray:
        return np.argsort(self.random(n), kind="stable")

    def spawn(self, key: int) -> "Prng":
        """Independent child stream derived from this generator's seed and ``key``."""
        with np.errstate(over="ignore"):
            k = _mix64(np.array([int(key) & _MASK64], dtype=np.uint64) + _GAMMA)
            s = _mix64(np.array([self.seed], dtype=np.uint64) ^ k)
        return Prng(int(s[0]))


def check_shape(shape) -> tuple[int, ...]:
    shape = tuple(int(d) for d in shape)
    if len(shape) != 4 or any(d < 1 for d in shape):
        raise ShapeError(f"invalid tensor shape {shape}")
    return shape


def tensor_filled(shape, value: float) -> np.ndarray:
    return np.full(check_shape(shape), float(value), dtype=np.float64)


def _pair(v) -> tuple[int, int]:
    if np.isscalar(v):
        return int(v), int(v)
    a, b = v
    return int(a), int(b)


def conv_output_shape(h, w, kernel, stride=1, pad=0) -> tuple[int, int]:
    kh, kw = _pair(kernel)
    sh, sw = _pair(stride)
    ph, pw = _pair(pad)
    nh, nw = h + 2 * ph - kh, w + 2 * pw - kw
    if nh < 0 or nw < 0 or nh % sh or nw % sw:
        raise ShapeError(
            f"kernel {kh}x{kw} stride {sh}x{sw} pad {ph}x{pw} does not tile a {h}x{w} input"
        )
    return nh // sh + 1, nw // sw + 1


def im2col(x: np.ndarray, kernel, stride=1, pad=0) -> np.ndarray:
    """Lower ``x`` of shape (n, c, h, w) to a (c*kh*kw, n*hout*wout) matrix.

    Rows are ordered (channel, kernel row, kernel column); columns are ordered
    (batch, output row, output column).
    """
    if x.ndim != 4:
        raise ShapeError(f"expected a 4-D tensor, got shape {x.shape}")
    n, c, h, w = x.shape
    kh, kw = _pair(kernel)
    sh, sw = _pair(stride)
    ph, pw = _pair(pad)
    hout, wout = conv_output_shape(h, w, (kh, kw), (sh, sw), (ph, pw))
    if ph or pw:
        x = np.pad(x, ((0, 0), (0, 0), (ph, ph), (pw, pw)))
    cols = np.empty((c, kh, kw, n, hout, wout), dtype=np.float64)
    for u in range(kh):
        for v in range(kw):
            patch = x[:, :, u : u + sh * hout : sh, v : v + sw * wout : sw]
            cols[:, u, v] = patch.transpose(1, 0, 2, 3)
    return cols.reshape(c * kh * kw, n * hout * wout)


def col2im(m: np.ndarray, x_shape, kernel, stride=1, pad=0) -> np.ndarray:
    """Adjoint of :func:`im2col`: scatter-add columns back into an (n, c, h, w) tensor."""
    n, c, h, w = check_shape(x_shape)
    kh, kw = _pair(kernel)
    sh, sw = _pair(stride)
    ph, pw = _pair(pad)
    hout, wout = conv_output_shape(h, w, (kh, kw), (sh, sw), (ph, pw))
    if m.shape != (c * kh * kw, n * hout * wout):
        raise ShapeError(
            f"column matrix shape {m.shape} does not match {(c * kh * kw, n * hout * wout)}"
        )
    cols = m.reshape(c, kh, kw, n, hout, wout)
    out = np.zeros((n, c, h + 2 * ph, w + 2 * pw), dtype=np.float64)
    for u in range(kh):
        for v in range(kw):
            out[:, :, u : u + sh * hout : sh, v : v + sw * wout : sw] += cols[:, u, v].transpose(
                1, 0, 2, 3
            )
    return out[:, :, ph : ph + h, pw : pw + w]
