"""Convolutional classifiers, autoencoders and t-SNE for 8x24 PMT-charge event images."""
from .errors import (
    BuildError,
    ConfigError,
    DataError,
    DomainError,
    FormatError,
    KindError,
    LabelError,
    PmtnetError,
    ShapeError,
    StateError,
)
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
from .optim import SgdConfig, fit, sgd_step, train_epoch
from .preprocess import center_columns, log_scale, prepare
from .synth import CLASS_NAMES, Label, SynthConfig, generate_dataset, generate_event, train_test
from .tensor import Prng

__version__ = "0.1.0"
