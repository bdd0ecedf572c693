import struct
import xml.etree.ElementTree as ET

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from pmtnet.baselines import KnnModel, SvmModel, svm_train
from pmtnet.errors import FormatError
from pmtnet.formats import (
    dataset_bytes,
    embedding_csv,
    features_csv,
    model_bytes,
    parse_dataset,
    parse_model,
    parse_table_csv,
    read_dataset,
    write_dataset,
)
from pmtnet.models import InitConfig, build_conv_autoencoder, build_supervised_cnn
from pmtnet.plotting import heatmap_rows_svg, scatter_svg
from pmtnet.synth import SynthConfig, generate_dataset

SVG = "{http://www.w3.org/2000/svg}"


# -- dataset -----------------------------------------------------------------

def test_dataset_hex_layout():
    grid = np.zeros((1, 8, 24))
    grid[0, 0, 0] = 1.0
    grid[0, 7, 23] = 2.5
    buf = dataset_bytes(grid, [3])
    assert len(buf) == 10 + 769
    assert buf[:4] == b"DYBS"
    assert buf[4:6] == b"\x01\x00" and buf[6:10] == b"\x01\x00\x00\x00"
    assert buf[10] == 3
    assert buf[11:15] == struct.pack("<f", 1.0)
    assert buf[-4:] == struct.pack("<f", 2.5)


def test_dataset_round_trip(tmp_path):
    grids, labels = generate_dataset(SynthConfig().with_counts(4, seed=1))
    path = tmp_path / "d.dybs"
    write_dataset(path, grids, labels)
    g2, l2 = read_dataset(path)
    assert np.array_equal(g2, grids) and np.array_equal(l2, labels)
    assert dataset_bytes(g2, l2) == path.read_bytes()
    assert len(path.read_bytes()) == 10 + 20 * 769


@settings(max_examples=50)
@given(arrays(np.float32, st.tuples(st.integers(0, 5), st.just(8), st.just(24)), elements=st.floats(0, 1e4, width=32)))
def test_dataset_round_trip_property(grids):
    labels = np.arange(len(grids)) % 5
    buf = dataset_bytes(grids.astype(np.float64), labels)
    g, lab = parse_dataset(buf)
    assert dataset_bytes(g, lab) == buf


@pytest.mark.parametrize(
    "mutate",
    [
        lambda b: b"XYBS" + b[4:],
        lambda b: b[:4] + b"\x02\x00" + b[6:],
        lambda b: b[:-1],
        lambda b: b[:10] + b"\x09" + b[11:],
    ],
)
def test_dataset_corruption(mutate):
    buf = dataset_bytes(np.zeros((2, 8, 24)), [0, 1])
    with pytest.raises(FormatError):
        parse_dataset(mutate(buf))


# -- models ---------------------------------------------------------------------------

def test_model_header_layout():
    buf = model_bytes(build_supervised_cnn(InitConfig(0)))
    assert buf[:4] == b"NLNS"
    assert struct.unpack_from("<HHI", buf, 4) == (1, 1, 6)
    # first record: conv, tanh, 3x3 kernel, unit stride, no pad, 1 -> 71, two tensors
    assert struct.unpack_from("<BB6HIII", buf, 12) == (0, 1, 3, 3, 1, 1, 0, 0, 1, 71, 2)
    ndim = buf[12 + 26]
    assert ndim == 4 and struct.unpack_from("<4I", buf, 12 + 27) == (71, 1, 3, 3)


def test_model_round_trip_bytes():
    for m in (build_supervised_cnn(InitConfig(1)), build_conv_autoencoder(InitConfig(1))):
        buf = model_bytes(m)
        assert model_bytes(parse_model(buf)) == buf


def test_baseline_round_trip(rng):
    x = rng.normal(size=(20, 192))
    y = np.arange(20) % 5
    knn = KnnModel.fit(x, y, k=3)
    back = parse_model(model_bytes(knn))
    assert back.k == 3 and np.array_equal(back.vectors, x) and np.array_equal(back.labels, y)
    svm = svm_train(x, y, epochs=3)
    buf = model_bytes(svm)
    back = parse_model(buf)
    assert isinstance(back, SvmModel) and back.lam == svm.lam
    assert np.array_equal(back.weights, svm.weights) and model_bytes(back) == buf


@pytest.mark.parametrize("cut", [3, 11, 40, -1])
def test_model_truncation(cut):
    buf = model_bytes(build_conv_autoencoder(InitConfig(0)))
    with pytest.raises(FormatError):
        parse_model(buf[:cut])


def test_model_trailing_bytes():
    with pytest.raises(FormatError):
        parse_model(model_bytes(build_conv_autoencoder(InitConfig(0))) + b"\x00")


def test_model_unknown_object():
    with pytest.raises(FormatError):
        model_bytes(object())


# -- CSV and SVG --------------------------------------------------------------------------

def test_embedding_csv(rng):
    y = rng.normal(size=(6, 2))
    labels = [0, 1, 2, 3, 4, 0]
    text = embedding_csv(y, labels)
    assert text.splitlines()[0] == "x,y,label"
    cols, vals, labs = parse_table_csv(text)
    assert cols == ["x", "y"] and np.array_equal(vals, y) and labs.tolist() == labels
    assert embedding_csv(vals, labs) == text
    assert embedding_csv(rng.normal(size=(2, 3)), [0, 1]).startswith("x,y,z,label\n")


def test_features_csv_columns(rng):
    text = features_csv(rng.normal(size=(3, 26)), [0, 1, 2])
    assert len(text.splitlines()[0].split(",")) == 27


def test_scatter_svg(rng):
    pts = rng.normal(size=(40, 2))
    labels = np.arange(40) % 5
    svg = scatter_svg(pts, labels, title="a < b & c")
    root = ET.fromstring(svg.encode())
    circles = [e for e in root.iter(SVG + "circle") if e.get("class") == "point"]
    assert len(circles) == 40
    assert svg == scatter_svg(pts.copy(), labels, title="a < b & c")
    texts = [e.text for e in root.iter(SVG + "text")]
    assert "muon" in texts and "a < b & c" in texts


def test_heatmap_svg():
    a = np.linspace(0, 1, 192).reshape(8, 24)
    svg = heatmap_rows_svg([[a], [1 - a]], captions=["event 0"])
    root = ET.fromstring(svg.encode())
    grids = [g for g in root.iter(SVG + "g") if g.get("class") == "grid"]
    assert len(grids) == 2
    assert all(len([r for r in g if r.get("class") == "cell"]) == 192 for g in grids)
    fills = [r.get("fill") for r in grids[0]]
    assert fills[0] == "#440154" and fills[-1] == "#fde725"
