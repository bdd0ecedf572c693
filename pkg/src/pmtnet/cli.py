"""Command-line entry point: ``pmtnet <command> [flags]``.

Commands: generate, train, eval, baselines, embed, tsne, reconstruct.
Every command accepts ``--config FILE`` with ``key=value`` lines (keys are
flag names with dashes or underscores); explicit flags override the file.
All artifacts are written under ``--out``. Failures exit with status 1 and
print one line ``error: <ErrorType>: <message>`` on stderr.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import formats
from .baselines import KnnModel, SvmModel, knn_classify, svm_predict, svm_train
from .errors import ConfigError, DataError, KindError, PmtnetError
from .metrics import confusion, overall_accuracy, report_keyvalue, report_text
from .models import (
    InitConfig,
    Model,
    ModelKind,
    build_conv_autoencoder,
    build_supervised_cnn,
    encode,
    extract_features,
    predict,
    reconstruct,
)
from .optim import SgdConfig, fit
from .plotting import heatmap_rows_svg, scatter_svg
from .preprocess import prepare
from .synth import CLASS_NAMES, SUPERVISED_PER_CLASS, UNSUPERVISED_PER_CLASS, SynthConfig, train_test
from .tsne import conditional_affinities, tsne_embed

TRAIN_DEFAULTS = {
    "cnn": dict(lr=0.01, momentum=0.9, epochs=60),
    "cae": dict(lr=0.0005, momentum=0.9, epochs=100),
}


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write(path: Path, text: str) -> None:
    path.write_text(text, encoding="utf-8", newline="\n")


def _load_model(path, kind: ModelKind | None = None):
    model = formats.load_model(path)
    if kind is not None and not (isinstance(model, Model) and model.kind is kind):
        got = model.kind.name if isinstance(model, Model) else type(model).__name__
        raise KindError(f"{path}: expected a {kind.name} model, got {got}")
    return model


def _model_path(model: Model) -> str:
    return "supervised" if model.kind is ModelKind.SUPERVISED_CNN else "unsupervised"


# -- commands ---------------------------------------------------------------------

def cmd_generate(args) -> None:
    default = SUPERVISED_PER_CLASS if args.path == "supervised" else UNSUPERVISED_PER_CLASS
    n_train = args.counts or args.train_per_class or default[0]
    n_test = args.counts or args.test_per_class or default[1]
    cfg = SynthConfig(seed=args.seed, noise_level=args.noise)
    (gtr, ltr), (gte, lte) = train_test(cfg, n_train, n_test)
    out = _out_dir(args)
    formats.write_dataset(out / "train.dybs", gtr, ltr)
    formats.write_dataset(out / "test.dybs", gte, lte)
    for name, labels in (("train", ltr), ("test", lte)):
        counts = np.bincount(labels, minlength=5)
        print(f"{name}: {len(labels)} events " + " ".join(f"{c}={n}" for c, n in zip(CLASS_NAMES, counts)))


def cmd_train(args) -> None:
    grids, labels = formats.read_dataset(args.data)
    d = TRAIN_DEFAULTS[args.model]
    cfg = SgdConfig(
        learning_rate=d["lr"] if args.lr is None else args.lr,
        momentum=d["momentum"] if args.momentum is None else args.momentum,
        batch_size=args.batch_size,
        epochs=d["epochs"] if args.epochs is None else args.epochs,
        seed=args.seed,
    )
    init = InitConfig(seed=args.init_seed)
    if args.model == "cnn":
        model = build_supervised_cnn(init)
        x = prepare(grids, "supervised")[:, None]
        targets, loss_kind = labels, "ce"
    else:
        model = build_conv_autoencoder(init)
        x = prepare(grids, "unsupervised")[:, None]
        targets, loss_kind = x, "sse"
    trace = fit(model, x, targets, cfg, loss_kind, log=lambda e, l: print(f"epoch {e} loss {l:.6f}"))
    out = _out_dir(args)
    formats.save_model(out / f"{args.model}.nlns", model)
    _write(out / f"{args.model}_loss.csv", "epoch,loss\n" + "".join(f"{i},{v!r}\n" for i, v in enumerate(trace)))
    if args.model == "cnn":
        acc = float(np.mean(predict(model, x[:, 0])[0] == labels))
        print(f"train accuracy {acc:.4f}")


def _evaluate(methods: dict, test_path, title_out: Path) -> dict:
    grids, labels = formats.read_dataset(test_path)
    x = prepare(grids, "supervised")
    results = {}
    for name, model in methods.items():
        if isinstance(model, KnnModel):
            pred = knn_classify(model, x.reshape(len(x), -1))
        elif isinstance(model, SvmModel):
            pred = svm_predict(model, x.reshape(len(x), -1))
        else:
            pred = predict(model, x)[0]
        results[name] = confusion(labels, np.atleast_1d(pred))
    _write(title_out / "report.txt", report_text(results, CLASS_NAMES))
    _write(title_out / "report.kv", report_keyvalue(results, CLASS_NAMES))
    print(report_text(results, CLASS_NAMES), end="")
    return results


def cmd_eval(args) -> None:
    methods = {}
    for name in [m.strip() for m in args.methods.split(",") if m.strip()]:
        if name == "cnn":
            if not args.model:
                raise ConfigError("--model is required for the cnn method")
            methods["cnn"] = _load_model(args.model, ModelKind.SUPERVISED_CNN)
        elif name in ("knn", "svm"):
            path = getattr(args, f"{name}_model")
            if path:
                model = _load_model(path)
                expected = KnnModel if name == "knn" else SvmModel
                if not isinstance(model, expected):
                    raise KindError(f"{path}: expected a {name} model")
            elif args.train:
                model = _fit_baseline(name, args)
            else:
                raise ConfigError(f"{name} needs --{name}-model or --train")
            methods[name] = model
        else:
            raise ConfigError(f"unknown method {name!r}")
    _evaluate(methods, args.test, _out_dir(args))


def _fit_baseline(name: str, args):
    grids, labels = formats.read_dataset(args.train)
    x = prepare(grids, "supervised").reshape(len(grids), -1)
    if name == "knn":
        return KnnModel.fit(x, labels, k=args.k)
    return svm_train(x, labels, lam=args.lam, epochs=args.svm_epochs, seed=args.seed)


def cmd_baselines(args) -> None:
    out = _out_dir(args)
    models = {name: _fit_baseline(name, args) for name in ("knn", "svm")}
    for name, model in models.items():
        formats.save_model(out / f"{name}.nlns", model)
    if args.test:
        _evaluate(models, args.test, out)


def _features(model: Model, grids: np.ndarray) -> np.ndarray:
    x = prepare(grids, _model_path(model))
    return extract_features(model, x) if model.kind is ModelKind.SUPERVISED_CNN else encode(model, x)


def cmd_embed(args) -> None:
    model = _load_model(args.model)
    if not isinstance(model, Model):
        raise KindError("embed needs a cnn or cae model")
    grids, labels = formats.read_dataset(args.data)
    feats = _features(model, grids)
    _write(_out_dir(args) / "features.csv", formats.features_csv(feats, labels))
    print(f"{len(feats)} events x {feats.shape[1]} features")


def cmd_tsne(args) -> None:
    if args.features:
        _, feats, labels = formats.parse_table_csv(Path(args.features).read_text(encoding="utf-8"))
    elif args.model and args.data:
        model = _load_model(args.model)
        if not isinstance(model, Model):
            raise KindError("tsne needs a cnn or cae model")
        grids, labels = formats.read_dataset(args.data)
        feats = _features(model, grids)
    else:
        raise ConfigError("tsne needs --features, or --model with --data")
    if args.limit:
        feats, labels = feats[: args.limit], labels[: args.limit]
    p, _ = conditional_affinities(feats, min(args.perplexity, (len(feats) - 1) / 3.0))
    y, trace = tsne_embed(p, d=args.dim, iters=args.iters, learning_rate=args.learning_rate, seed=args.seed)
    out = _out_dir(args)
    _write(out / "embedding.csv", formats.embedding_csv(y, labels))
    _write(out / "tsne.svg", scatter_svg(y, labels, title=args.title))
    print(f"final KL {trace[-1]:.6f}")


def cmd_reconstruct(args) -> None:
    model = _load_model(args.model, ModelKind.CONV_AUTOENCODER)
    grids, labels = formats.read_dataset(args.data)
    idx = [int(i) for i in args.indices.split(",")]
    if any(i < 0 or i >= len(grids) for i in idx):
        raise DataError(f"event index outside [0, {len(grids)})")
    x = prepare(grids[idx], "unsupervised")
    r = reconstruct(model, x)
    sse = ((r - x) ** 2).sum(axis=(1, 2))
    captions = [f"#{i} {CLASS_NAMES[labels[i]]} SSE {s:.3f}" for i, s in zip(idx, sse)]
    rows = [list(x), list(r)]
    _write(_out_dir(args) / "reconstruction.svg", heatmap_rows_svg(rows, captions))
    for c in captions:
        print(c)


# -- argument parsing ------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pmtnet", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    parser.commands = {}

    def add(name, func, help):
        p = sub.add_parser(name, help=help)
        parser.commands[name] = p
        p.set_defaults(func=func)
        p.add_argument("--config", help="key=value file supplying defaults")
        p.add_argument("--out", default="out", help="output directory")
        p.add_argument("--seed", type=int, default=0)
        return p

    p = add("generate", cmd_generate, "write synthetic train/test dataset files")
    p.add_argument("--path", choices=("supervised", "unsupervised"), default="supervised",
                   help="selects the default sizes (4500/1500 or 3170/790 events)")
    p.add_argument("--counts", type=int, default=0, help="events per class in both files")
    p.add_argument("--train-per-class", type=int, default=0)
    p.add_argument("--test-per-class", type=int, default=0)
    p.add_argument("--noise", type=float, default=SynthConfig.noise_level)

    p = add("train", cmd_train, "train the cnn or the cae")
    p.add_argument("--data", required=True)
    p.add_argument("--model", choices=("cnn", "cae"), required=True)
    p.add_argument("--epochs", type=int)
    p.add_argument("--lr", type=float)
    p.add_argument("--momentum", type=float)
    p.add_argument("--batch-size", type=int, default=64)
    p.add_argument("--init-seed", type=int, default=1)

    p = add("eval", cmd_eval, "per-class F1 / accuracy report on a test set")
    p.add_argument("--test", required=True)
    p.add_argument("--methods", default="cnn")
    p.add_argument("--model", help="trained cnn model file")
    p.add_argument("--knn-model")
    p.add_argument("--svm-model")
    p.add_argument("--train", help="training set for baselines without model files")
    _baseline_flags(p)

    p = add("baselines", cmd_baselines, "fit k-NN and linear SVM baselines")
    p.add_argument("--train", required=True)
    p.add_argument("--test")
    _baseline_flags(p)

    p = add("embed", cmd_embed, "write learned feature vectors as CSV")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)

    p = add("tsne", cmd_tsne, "t-SNE embedding CSV and SVG scatter")
    p.add_argument("--features")
    p.add_argument("--model")
    p.add_argument("--data")
    p.add_argument("--limit", type=int, default=0)
    p.add_argument("--perplexity", type=float, default=30.0)
    p.add_argument("--iters", type=int, default=1000)
    p.add_argument("--learning-rate", type=float, default=100.0)
    p.add_argument("--dim", type=int, choices=(2, 3), default=2)
    p.add_argument("--title", default="")

    p = add("reconstruct", cmd_reconstruct, "input vs cae reconstruction heat maps")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--indices", default="0")
    return parser


def _baseline_flags(p):
    p.add_argument("--k", type=int, default=5)
    p.add_argument("--lam", type=float, default=1e-3)
    p.add_argument("--svm-epochs", type=int, default=300)


def read_config(path) -> dict[str, str]:
    values = {}
    for n, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{n}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        values[key.replace("-", "_")] = value
    return values


def parse_args(argv=None) -> argparse.Namespace:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("command", nargs="?")
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if known.config and known.command in parser.commands:
        subparser = parser.commands[known.command]
        actions = {a.dest: a for a in subparser._actions if a.dest not in ("help", "config")}
        defaults = {}
        for key, raw in read_config(known.config).items():
            if key not in actions:
                raise ConfigError(f"unknown config key {key!r} for {known.command}")
            action = actions[key]
            try:
                value = action.type(raw) if action.type else raw
            except ValueError as exc:
                raise ConfigError(f"invalid value {raw!r} for {key}") from exc
            if action.choices and value not in action.choices:
                raise ConfigError(f"invalid value {raw!r} for {key}")
            defaults[key] = value
            action.required = False
        subparser.set_defaults(**defaults)
    return parser.parse_args(argv)


def main(argv=None) -> int:
    try:
        args = parse_args(argv)
        args.func(args)
    except (PmtnetError, OSError) as exc:
        kind = "IoError" if isinstance(exc, OSError) else type(exc).__name__
        print(f"error: {kind}: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
