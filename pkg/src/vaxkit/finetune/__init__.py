from .backends import (
    HASHING_BACKEND,
    KNOWN_EMBEDDING_DIMS,
    EncoderBackendSpec,
    HashingEncoder,
    TextEncoder,
    TransformerEncoder,
    build_encoder,
    encode,
    resolve_backend_spec,
)
from .checkpoint import FORMAT_VERSION, load_state, save_state
from .classifier import VaccineConcernClassifier, labels_from_probabilities, predict, threshold_labels
from .head import bce_loss, forward, head_gradients
from .state import ClassifierState
from .trainer import TrainingConfig, train

__all__ = [
    "ClassifierState",
    "EncoderBackendSpec",
    "FORMAT_VERSION",
    "HASHING_BACKEND",
    "HashingEncoder",
    "KNOWN_EMBEDDING_DIMS",
    "TextEncoder",
    "TrainingConfig",
    "TransformerEncoder",
    "VaccineConcernClassifier",
    "bce_loss",
    "build_encoder",
    "encode",
    "forward",
    "head_gradients",
    "labels_from_probabilities",
    "load_state",
    "predict",
    "resolve_backend_spec",
    "save_state",
    "threshold_labels",
    "train",
]
