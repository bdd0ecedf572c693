import numpy as np
import pytest

from pmtnet.errors import ShapeError
from pmtnet.tensor import Prng, col2im, im2col, tensor_filled


def splitmix64_reference(seed, n):
    state = seed
    out = []
    for _ in range(n):
        state = (state + 0x9E3779B97F4A7C15) & (2**64 - 1)
        z = state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & (2**64 - 1)
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & (2**64 - 1)
        out.append(z ^ (z >> 31))
    return out


def im2col_loops(x, kh, kw, sh, sw, ph, pw):
    n, c, h, w = x.shape
    xp = np.zeros((n, c, h + 2 * ph, w + 2 * pw))
    xp[:, :, ph : ph + h, pw : pw + w] = x
    hout = (h + 2 * ph - kh) // sh + 1
    wout = (w + 2 * pw - kw) // sw + 1
    cols = []
    for b in range(n):
        for i in range(hout):
            for j in range(wout):
                col = []
                for ch in range(c):
                    for u in range(kh):
                        for v in range(kw):
                            col.append(xp[b, ch, i * sh + u, j * sw + v])
                cols.append(col)
    return np.array(cols).T


def test_filled():
    np.testing.assert_array_equal(tensor_filled((1, 1, 2, 2), 0.0), np.zeros((1, 1, 2, 2)))
    t = tensor_filled((2, 3, 8, 24), 1.0)
    assert t.shape == (2, 3, 8, 24) and t.size == 1152 and np.all(t == 1.0)
    with pytest.raises(ShapeError):
        tensor_filled((1, 0, 1, 1), 0.0)


def test_row_major_layout():
    x = np.arange(2 * 3 * 4 * 5, dtype=np.float64).reshape(2, 3, 4, 5)
    flat = x.ravel()
    N, C, H, W = x.shape
    for n, c, i, j in [(0, 0, 0, 0), (1, 2, 3, 4), (1, 0, 2, 1), (0, 1, 3, 0)]:
        assert flat[((n * C + c) * H + i) * W + j] == x[n, c, i, j]


def test_im2col_single_field():
    x = np.array([[[[1.0, 2.0], [3.0, 4.0]]]])
    np.testing.assert_array_equal(im2col(x, 2), [[1], [2], [3], [4]])


def test_im2col_padding():
    x = np.full((1, 1, 1, 1), 5.0)
    m = im2col(x, 3, 1, (1, 1))
    np.testing.assert_array_equal(m[:, 0], [0, 0, 0, 0, 5, 0, 0, 0, 0])


@pytest.mark.parametrize(
    "shape,kernel,stride,pad",
    [((1, 1, 4, 4), (3, 3), (1, 1), (0, 0)), ((2, 3, 8, 24), (2, 5), (2, 1), (1, 2)), ((2, 2, 6, 7), (3, 3), (1, 2), (1, 0))],
)
def test_im2col_matches_loops(rng, shape, kernel, stride, pad):
    x = rng.normal(size=shape)
    np.testing.assert_array_equal(im2col(x, kernel, stride, pad), im2col_loops(x, *kernel, *stride, *pad))


def test_im2col_rejects_fractional_output():
    with pytest.raises(ShapeError):
        im2col(np.zeros((1, 1, 4, 4)), 3, 2)


def test_col2im_disjoint_patches_invert(rng):
    x = rng.normal(size=(2, 3, 8, 24))
    np.testing.assert_array_equal(col2im(im2col(x, 2, 2), x.shape, 2, 2), x)


def test_col2im_zeros():
    m = np.zeros((9, 16))
    assert not col2im(m, (1, 1, 6, 6), 3).any()


def test_col2im_counts_multiplicity():
    ones = np.ones((9, 4))
    counts = col2im(ones, (1, 1, 4, 4), 3)[0, 0]
    np.testing.assert_array_equal(counts, [[1, 2, 2, 1], [2, 4, 4, 2], [2, 4, 4, 2], [1, 2, 2, 1]])


def test_col2im_shape_mismatch():
    with pytest.raises(ShapeError):
        col2im(np.zeros((9, 5)), (1, 1, 4, 4), 3)


ADJOINT_CASES = [
    ((1, 1, 4, 4), 1, 0),
    ((1, 1, 4, 4), 1, 1),
    ((2, 3, 8, 24), 1, 0),
    ((2, 3, 8, 24), 1, 1),
    ((2, 3, 8, 24), (1, 3), 0),
    ((2, 2, 5, 9), (1, 2), (2, 1)),
    ((2, 2, 5, 9), 2, 0),
]


@pytest.mark.parametrize("shape,stride,pad", ADJOINT_CASES)
def test_adjoint_identity(rng, shape, stride, pad):
    x = rng.normal(size=shape)
    cols = im2col(x, 3, stride, pad)
    m = rng.normal(size=cols.shape)
    lhs = np.sum(m * cols)
    rhs = np.sum(col2im(m, shape, 3, stride, pad) * x)
    assert abs(lhs - rhs) <= 1e-12 * max(abs(lhs), abs(rhs), 1.0)


def test_prng_matches_scalar_reference():
    for seed in (0, 1, 1234567, 2**64 - 1):
        got = Prng(seed).next_u64(50)
        assert [int(v) for v in got] == splitmix64_reference(seed, 50)


def test_prng_blocks_continue_sequence():
    a = Prng(99)
    first = np.concatenate([a.next_u64(3), a.next_u64(7)])
    np.testing.assert_array_equal(first, Prng(99).next_u64(10))


def test_prng_reproducible_1e4():
    a, b = Prng(42), Prng(42)
    np.testing.assert_array_equal(a.random(10_000), b.random(10_000))
    assert not np.array_equal(Prng(43).random(100), Prng(42).random(100))


def test_prng_ranges():
    p = Prng(5)
    u = p.random(10_000)
    assert u.min() >= 0.0 and u.max() < 1.0 and abs(u.mean() - 0.5) < 0.02
    k = p.integers(3, 7, 5000)
    assert set(np.unique(k)) == {3, 4, 5, 6}
    z = p.normal(20_000)
    assert abs(z.mean()) < 0.03 and abs(z.std() - 1.0) < 0.03
    e = p.exponential(20_000, 2.0)
    assert e.min() >= 0 and abs(e.mean() - 2.0) < 0.06
    perm = p.permutation(50)
    assert sorted(perm) == list(range(50))


def test_prng_spawn_is_deterministic_and_distinct():
    root = Prng(7)
    np.testing.assert_array_equal(root.spawn(3).random(5), Prng(7).spawn(3).random(5))
    assert not np.array_equal(root.spawn(3).random(5), root.spawn(4).random(5))
