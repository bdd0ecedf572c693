import numpy as np
import pytest

from pmtnet.layers import LayerState

ACCEPTANCE_LINES = []


def rel_err(a, f):
    a, f = np.asarray(a, dtype=np.float64), np.asarray(f, dtype=np.float64)
    return np.abs(a - f) / np.maximum(np.maximum(np.abs(a), np.abs(f)), 1e-8)


def numeric_grad(f, x, eps=1e-5):
    """Central finite differences of scalar ``f()`` w.r.t. array ``x`` (mutated in place)."""
    g = np.zeros_like(x)
    it = np.nditer(x, flags=["multi_index"])
    for _ in it:
        i = it.multi_index
        old = x[i]
        x[i] = old + eps
        fp = f()
        x[i] = old - eps
        fm = f()
        x[i] = old
        g[i] = (fp - fm) / (2 * eps)
    return g


def random_state(rng, spec):
    s = LayerState.zeros(spec)
    s.weights = rng.normal(scale=0.5, size=s.weights.shape)
    s.bias = rng.normal(scale=0.1, size=s.bias.shape)
    return s


def check_layer_grads(forward, backward, spec, st_, x, rng):
    """Gradient of L = sum(R * layer(x)) w.r.t. x, W and b against central differences."""
    y = forward(x, st_, spec)
    r = rng.normal(size=y.shape)
    gx, gw, gb = backward(r, st_, spec)

    def loss():
        return float(np.sum(r * forward(x, st_, spec, keep_cache=False)))

    worst = 0.0
    for analytic, target in ((gx, x), (gw, st_.weights), (gb, st_.bias)):
        worst = max(worst, rel_err(analytic, numeric_grad(loss, target)).max())
    return worst


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
