"""
t-SNE of learned features
=========================

Embeds the 26 penultimate-layer activations of a briefly trained CNN in two
dimensions and saves a labelled scatter plot.
"""
from pathlib import Path

from pmtnet.formats import embedding_csv
from pmtnet.models import InitConfig, build_supervised_cnn, extract_features
from pmtnet.optim import SgdConfig, fit
from pmtnet.plotting import scatter_svg
from pmtnet.preprocess import prepare
from pmtnet.synth import SynthConfig, train_test
from pmtnet.tsne import conditional_affinities, tsne_embed

out = Path("demo_out")
out.mkdir(exist_ok=True)

(train_grids, train_labels), (test_grids, test_labels) = train_test(SynthConfig(seed=0), 200, 60)
model = build_supervised_cnn(InitConfig(1))
fit(model, prepare(train_grids, "supervised")[:, None], train_labels, SgdConfig(epochs=10), "ce")

features = extract_features(model, prepare(test_grids, "supervised"))
print("features", features.shape)

# every row of P is tuned to the same effective neighbor count
p, perplexity = conditional_affinities(features, 30.0)
print("row perplexity range %.6f .. %.6f" % (perplexity.min(), perplexity.max()))

y, kl = tsne_embed(p, seed=0)
print("KL after exaggeration %.4f, final %.4f" % (kl[100], kl[-1]))

(out / "embedding.csv").write_text(embedding_csv(y, test_labels))
(out / "tsne.svg").write_text(scatter_svg(y, test_labels, title="CNN features"))
print("wrote", out / "tsne.svg")
