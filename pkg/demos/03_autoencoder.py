"""
Convolutional autoencoder
=========================

Trains the autoencoder on unlabelled, log-scaled events, compares its
reconstruction error with the mean-image predictor, clusters the 10-number
codes and writes an input/reconstruction heat map.
"""
from dataclasses import replace
from pathlib import Path

import numpy as np

from pmtnet.metrics import kmeans
from pmtnet.models import InitConfig, build_conv_autoencoder, encode, reconstruct
from pmtnet.optim import CAE_SGD, fit
from pmtnet.plotting import heatmap_rows_svg
from pmtnet.preprocess import prepare
from pmtnet.synth import CLASS_NAMES, SynthConfig, train_test

out = Path("demo_out")
out.mkdir(exist_ok=True)

(train_grids, _), (test_grids, test_labels) = train_test(SynthConfig(seed=0), 200, 60)
x_train = prepare(train_grids, "unsupervised")[:, None]
x_test = prepare(test_grids, "unsupervised")

model = build_conv_autoencoder(InitConfig(1))
trace = fit(model, x_train, x_train, replace(CAE_SGD, epochs=80), "sse")
print("epoch loss %.3f -> %.3f" % (trace[0], trace[-1]))

recon = reconstruct(model, x_test)
sse = np.sum((recon - x_test) ** 2)
baseline = np.sum((x_train[:, 0].mean(axis=0) - x_test) ** 2)
print("held-out SSE %.1f vs mean image %.1f" % (sse, baseline))

# cluster the bottleneck codes. Muons separate from every other class; on a
# set this small they can still take two clusters of their own.
codes = encode(model, x_test)
clusters = kmeans(codes, 5, seed=0)
for c in range(5):
    counts = np.bincount(test_labels[clusters == c], minlength=5)
    print(f"cluster {c}: " + " ".join(f"{n}={k}" for n, k in zip(CLASS_NAMES, counts)))

picks = [int(np.flatnonzero(test_labels == k)[0]) for k in range(5)]
svg = heatmap_rows_svg([list(x_test[picks]), list(recon[picks])], [CLASS_NAMES[test_labels[i]] for i in picks])
(out / "reconstruction.svg").write_text(svg)
print("wrote", out / "reconstruction.svg")
