"""Labeled synthetic 8x24 PMT-charge events in five classes.

Every event is drawn in a canonical frame whose reference column is 0 and
then rotated to a uniformly drawn column, so the generator is exactly
equivariant under cyclic column shifts of the unwrapped cylinder. Charges
are rounded to float32 precision so that in-memory data and dataset files
agree bit for bit.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, replace

import numpy as np

from .errors import DataError
from .tensor import Prng

ROWS, COLS = 8, 24


class Label(enum.IntEnum):
    MUON = 0
    FLASHER = 1
    IBD_PROMPT = 2
    IBD_DELAY = 3
    OTHER = 4


CLASS_NAMES = ("muon", "flasher", "ibd_prompt", "ibd_delay", "other")

# Desk-scale sample sizes per class (train, test).
SUPERVISED_PER_CLASS = (900, 300)  # 4,500 train / 1,500 test
UNSUPERVISED_PER_CLASS = (634, 158)  # 3,170 train / 790 test


@dataclass(frozen=True)
class SynthConfig:
    """Per-class recipe parameters. Amplitudes are peak charges per PMT and
    widths are Gaussian sigmas in PMT units (rows, columns)."""

    muon_amplitude: tuple[float, float] = (2000.0, 10000.0)
    muon_min_length: int = 12
    muon_slope: tuple[float, float] = (-0.25, 0.25)
    muon_halo: tuple[float, float] = (0.04, 0.06)  # fraction of amplitude on every PMT
    flasher_hot: tuple[float, float] = (100.0, 1000.0)
    flasher_blob_amplitude: tuple[float, float] = (5.0, 40.0)
    flasher_blob_width: tuple[float, float] = (1.5, 2.5)
    delay_amplitude: tuple[float, float] = (160.0, 400.0)
    prompt_amplitude: tuple[float, float] = (20.0, 180.0)
    blob_width: tuple[float, float] = (0.7, 1.3)
    blob_cutoff: float = 2.5  # blobs are truncated beyond this many sigmas
    other_amplitude: tuple[float, float] = (0.0, 30.0)
    other_sites: tuple[int, int] = (3, 8)
    other_blob_probability: float = 0.5  # faint compact deposit from low-energy background
    other_blob_amplitude: tuple[float, float] = (8.0, 30.0)
    noise_level: float = 1.0
    counts: tuple[int, ...] = (100, 100, 100, 100, 100)
    seed: int = 0

    def __post_init__(self):
        lo_p, hi_p = self.prompt_amplitude
        lo_d, hi_d = self.delay_amplitude
        if not (lo_p < hi_d and lo_d < hi_p):
            raise DataError("prompt and delay amplitude ranges must overlap")

    def with_counts(self, per_class: int, seed: int | None = None) -> "SynthConfig":
        return replace(self, counts=(per_class,) * 5, seed=self.seed if seed is None else seed)


def _cyc_dist(cols: np.ndarray, center: float) -> np.ndarray:
    d = np.abs(cols - center) % COLS
    return np.minimum(d, COLS - d)


def _blob(amplitude, row, col, sig_r, sig_c, cutoff) -> np.ndarray:
    r = np.arange(ROWS, dtype=np.float64)[:, None]
    c = np.arange(COLS, dtype=np.float64)[None, :]
    q = ((r - row) / sig_r) ** 2 + (_cyc_dist(c, col) / sig_c) ** 2
    out = amplitude * np.exp(-0.5 * q)
    out[q > cutoff * cutoff] = 0.0
    return out


def _muon(cfg: SynthConfig, rng: Prng) -> np.ndarray:
    grid = np.zeros((ROWS, COLS))
    amp = rng.uniform(*cfg.muon_amplitude)
    length = rng.integers(cfg.muon_min_length, COLS + 1)
    width = rng.integers(1, 3)
    row0 = rng.uniform(0.0, ROWS - 1.0)
    slope = rng.uniform(*cfg.muon_slope)
    halo = rng.uniform(*cfg.muon_halo)
    along = rng.uniform(0.5, 1.0, length)
    grid += amp * halo
    for j in range(length):
        r = int(np.clip(np.rint(row0 + slope * j), 0, ROWS - 1))
        grid[r, j] += amp * along[j]
        if width == 2:
            grid[r + 1 if r + 1 < ROWS else r - 1, j] += 0.6 * amp * along[j]
    return grid


def _flasher(cfg: SynthConfig, rng: Prng) -> np.ndarray:
    grid = np.zeros((ROWS, COLS))
    hot_row = rng.integers(0, ROWS)
    grid[hot_row, 0] = rng.uniform(*cfg.flasher_hot)
    amp = rng.uniform(*cfg.flasher_blob_amplitude)
    row = rng.uniform(0.0, ROWS - 1.0)
    sig_r, sig_c = rng.uniform(*cfg.flasher_blob_width, 2)
    return grid + _blob(amp, row, COLS // 2, sig_r, sig_c, cfg.blob_cutoff)


def _ibd(cfg: SynthConfig, rng: Prng, amplitude_range) -> np.ndarray:
    amp = rng.uniform(*amplitude_range)
    row = rng.uniform(0.0, ROWS - 1.0)
    sig_r, sig_c = rng.uniform(*cfg.blob_width, 2)
    return _blob(amp, row, 0.0, sig_r, sig_c, cfg.blob_cutoff)


def _other(cfg: SynthConfig, rng: Prng) -> np.ndarray:
    grid = np.zeros((ROWS, COLS))
    n = rng.integers(cfg.other_sites[0], cfg.other_sites[1] + 1)
    rows = rng.integers(0, ROWS, n)
    cols = np.concatenate([[0], rng.integers(0, COLS, n - 1)])
    amps = rng.uniform(*cfg.other_amplitude, n)
    np.add.at(grid, (rows, cols), amps)
    if rng.random() < cfg.other_blob_probability:
        grid += _ibd(cfg, rng, cfg.other_blob_amplitude)
    return grid


_RECIPES = {
    Label.MUON: _muon,
    Label.FLASHER: _flasher,
    Label.IBD_PROMPT: lambda cfg, rng: _ibd(cfg, rng, cfg.prompt_amplitude),
    Label.IBD_DELAY: lambda cfg, rng: _ibd(cfg, rng, cfg.delay_amplitude),
    Label.OTHER: _other,
}


def generate_event(label, cfg: SynthConfig, prng: Prng, column: int | None = None) -> np.ndarray:
    """One raw event grid (8x24, charges >= 0).

    ``column`` places the class's reference feature (track start, hot PMT,
    blob center, first speckle site); it is drawn from ``prng`` when omitted.
    """
    label = Label(label)
    if column is None:
        column = prng.integers(0, COLS)
    grid = _RECIPES[label](cfg, prng)
    if cfg.noise_level > 0:
        grid = grid + prng.exponential(ROWS * COLS, cfg.noise_level).reshape(ROWS, COLS)
    grid = np.roll(np.maximum(grid, 0.0), int(column), axis=1)
    return grid.astype(np.float32).astype(np.float64)


def generate_dataset(cfg: SynthConfig) -> tuple[np.ndarray, np.ndarray]:
    """Class-balanced (per ``cfg.counts``), shuffled dataset.

    Event ``i`` of the shuffled output is generated from its own substream of
    the master seed, so the result does not depend on generation order.
    """
    counts = tuple(int(c) for c in cfg.counts)
    if len(counts) != 5 or min(counts) < 1:
        raise DataError(f"need five positive class counts, got {counts}")
    root = Prng(cfg.seed)
    labels = np.repeat(np.arange(5), counts)
    labels = labels[root.spawn(0xFFFFFFFF).permutation(len(labels))]
    grids = np.stack([generate_event(lab, cfg, root.spawn(i)) for i, lab in enumerate(labels)])
    return grids, labels.astype(np.int64)


def train_test(cfg: SynthConfig, train_per_class: int, test_per_class: int):
    """Independent train and test sets drawn from distinct seeds."""
    train = generate_dataset(cfg.with_counts(train_per_class, seed=cfg.seed * 2))
    test = generate_dataset(cfg.with_counts(test_per_class, seed=cfg.seed * 2 + 1))
    return train, test
