"""Binary and text file formats. All integers and floats are little-endian.

Dataset file (``.dybs``)::

    offset  size  field
    0       4     magic b"DYBS"
    4       2     u16 format version (1)
    6       4     u32 event count N
    10      ...   N records of 769 bytes:
                    u8 label, then 192 f32 raw charges (8x24, row-major)

    total length = 10 + 769 * N

Model container (``.nlns``)::

    0       4     magic b"NLNS"
    4       2     u16 format version (1)
    6       2     u16 kind (1 cnn, 2 cae, 3 knn, 4 svm)
    8       4     u32 record count R
    12      ...   R records, each:
                    u8  record tag (layer kind 0-3; 4 k-NN store; 5 linear SVM)
                    u8  activation code (0 none, 1 tanh, 2 relu, 3 softmax)
                    6 x u16  kernel h, kernel w, stride h, stride w, pad h, pad w
                    u32 in_size, u32 filters
                    u32 tensor count T, then T tensors:
                        u8 ndim, ndim x u32 dims, prod(dims) f64 values (C order)

k-NN stores (kernel h = k) the training vectors and labels; linear SVM
stores the weight matrix, bias vector and a one-element lambda tensor.
"""
from __future__ import annotations

import io
import struct
from pathlib import Path

import numpy as np

from .baselines import KnnModel, SvmModel
from .errors import FormatError
from .layers import Act, Kind, LayerSpec, LayerState
from .models import Model, ModelKind

DATASET_MAGIC = b"DYBS"
MODEL_MAGIC = b"NLNS"
VERSION = 1
KIND_KNN = 3
KIND_SVM = 4
TAG_KNN = 4
TAG_SVM = 5

_EVENT = np.dtype([("label", "u1"), ("charge", "<f4", (192,))])
_RECORD = struct.Struct("<BB6HIII")


# -- datasets ----------------------------------------------------------------

def dataset_bytes(grids: np.ndarray, labels: np.ndarray) -> bytes:
    grids = np.asarray(grids)
    labels = np.asarray(labels)
    if grids.shape[1:] != (8, 24) or len(grids) != len(labels):
        raise FormatError(f"expected (N, 8, 24) grids with N labels, got {grids.shape}")
    rec = np.empty(len(grids), dtype=_EVENT)
    rec["label"] = labels
    rec["charge"] = grids.reshape(len(grids), 192)
    return DATASET_MAGIC + struct.pack("<HI", VERSION, len(grids)) + rec.tobytes()


def write_dataset(path, grids, labels) -> None:
    Path(path).write_bytes(dataset_bytes(grids, labels))


def parse_dataset(buf: bytes) -> tuple[np.ndarray, np.ndarray]:
    if len(buf) < 10 or buf[:4] != DATASET_MAGIC:
        raise FormatError("not a dataset file (bad magic)")
    version, n = struct.unpack_from("<HI", buf, 4)
    if version != VERSION:
        raise FormatError(f"unsupported dataset version {version}")
    if len(buf) != 10 + n * _EVENT.itemsize:
        raise FormatError(f"dataset length {len(buf)} does not match {n} events")
    rec = np.frombuffer(buf, dtype=_EVENT, offset=10, count=n)
    if n and rec["label"].max() > 4:
        raise FormatError("label out of range")
    grids = rec["charge"].astype(np.float64).reshape(n, 8, 24)
    return grids, rec["label"].astype(np.int64)


def read_dataset(path) -> tuple[np.ndarray, np.ndarray]:
    return parse_dataset(Path(path).read_bytes())


# -- model container -------------------------------------------------------------

def _write_tensor(out: io.BytesIO, a: np.ndarray) -> None:
    a = np.ascontiguousarray(a, dtype="<f8")
    out.write(struct.pack("<B", a.ndim))
    out.write(struct.pack(f"<{a.ndim}I", *a.shape))
    out.write(a.tobytes())


def _write_record(out, tag, act=0, geometry=(0,) * 6, in_size=0, filters=0, tensors=()):
    out.write(_RECORD.pack(tag, act, *geometry, in_size, filters, len(tensors)))
    for t in tensors:
        _write_tensor(out, t)


class _Reader:
    def __init__(self, buf: bytes):
        self.buf, self.pos = buf, 0

    def unpack(self, fmt: str):
        s = struct.Struct(fmt)
        if self.pos + s.size > len(self.buf):
            raise FormatError("truncated model file")
        vals = s.unpack_from(self.buf, self.pos)
        self.pos += s.size
        return vals

    def tensor(self) -> np.ndarray:
        (ndim,) = self.unpack("<B")
        dims = self.unpack(f"<{ndim}I")
        count = int(np.prod(dims)) if ndim else 1
        end = self.pos + 8 * count
        if end > len(self.buf):
            raise FormatError("truncated tensor")
        a = np.frombuffer(self.buf, dtype="<f8", count=count, offset=self.pos).reshape(dims)
        self.pos = end
        return a.astype(np.float64)


def model_bytes(model) -> bytes:
    out = io.BytesIO()
    if isinstance(model, Model):
        out.write(MODEL_MAGIC + struct.pack("<HHI", VERSION, int(model.kind), len(model.specs)))
        for spec, st in zip(model.specs, model.states):
            tensors = () if st.weights is None else (st.weights, st.bias)
            geometry = (*spec.kernel, *spec.stride, *spec.pad)
            _write_record(out, int(spec.kind), int(spec.act), geometry, spec.in_size, spec.filters, tensors)
    elif isinstance(model, KnnModel):
        out.write(MODEL_MAGIC + struct.pack("<HHI", VERSION, KIND_KNN, 1))
        _write_record(out, TAG_KNN, geometry=(model.k, 0, 0, 0, 0, 0),
                      in_size=model.vectors.shape[1], filters=5,
                      tensors=(model.vectors, model.labels.astype(np.float64)))
    elif isinstance(model, SvmModel):
        out.write(MODEL_MAGIC + struct.pack("<HHI", VERSION, KIND_SVM, 1))
        _write_record(out, TAG_SVM, in_size=model.weights.shape[1], filters=model.weights.shape[0],
                      tensors=(model.weights, model.bias, np.array([model.lam])))
    else:
        raise FormatError(f"cannot serialize {type(model).__name__}")
    return out.getvalue()


def parse_model(buf: bytes):
    if buf[:4] != MODEL_MAGIC:
        raise FormatError("not a model file (bad magic)")
    r = _Reader(buf)
    r.pos = 4
    version, kind, count = r.unpack("<HHI")
    if version != VERSION:
        raise FormatError(f"unsupported model version {version}")
    records = []
    for _ in range(count):
        tag, act, kh, kw, sh, sw, ph, pw, in_size, filters, nt = r.unpack(_RECORD.format)
        records.append((tag, act, (kh, kw), (sh, sw), (ph, pw), in_size, filters, [r.tensor() for _ in range(nt)]))
    if r.pos != len(buf):
        raise FormatError("trailing bytes after model records")
    try:
        if kind == KIND_KNN:
            tag, _, (k, _), _, _, _, _, (vecs, labels) = records[0]
            return KnnModel(vecs, labels.astype(np.int64), int(k))
        if kind == KIND_SVM:
            tag, _, _, _, _, _, _, (w, b, lam) = records[0]
            return SvmModel(w, b, float(lam[0]))
        specs, states = [], []
        for tag, act, kernel, stride, pad, in_size, filters, tensors in records:
            specs.append(LayerSpec(Kind(tag), in_size, filters, kernel, stride, pad, Act(act)))
            states.append(LayerState(*tensors) if tensors else LayerState())
        return Model(ModelKind(kind), specs, states)
    except (ValueError, IndexError, TypeError) as exc:
        raise FormatError(f"malformed model records: {exc}") from exc


def save_model(path, model) -> None:
    Path(path).write_bytes(model_bytes(model))


def load_model(path):
    return parse_model(Path(path).read_bytes())


# -- CSV -----------------------------------------------------------------------------

def _fmt(v: float) -> str:
    return repr(float(v))


def table_csv(columns: list[str], rows: np.ndarray, labels) -> str:
    lines = [",".join(columns + ["label"])]
    for row, lab in zip(np.asarray(rows), labels):
        lines.append(",".join([_fmt(v) for v in row] + [str(int(lab))]))
    return "\n".join(lines) + "\n"


def embedding_csv(y: np.ndarray, labels) -> str:
    """Header ``x,y[,z],label``; one row per input point in input order."""
    return table_csv(["x", "y", "z"][: y.shape[1]], y, labels)


def features_csv(features: np.ndarray, labels) -> str:
    return table_csv([f"f{i}" for i in range(features.shape[1])], features, labels)


def parse_table_csv(text: str) -> tuple[list[str], np.ndarray, np.ndarray]:
    lines = text.strip().splitlines()
    header = lines[0].split(",")
    if header[-1] != "label":
        raise FormatError("last CSV column must be 'label'")
    body = [ln.split(",") for ln in lines[1:]]
    values = np.array([[float(v) for v in row[:-1]] for row in body]).reshape(len(body), len(header) - 1)
    labels = np.array([int(row[-1]) for row in body], dtype=np.int64)
    return header[:-1], values, labels
