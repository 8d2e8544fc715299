"""Thresholded prediction on top of a trained :class:`ClassifierState`."""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import numpy as np
import torch

from vaxkit.errors import ConfigurationError
from vaxkit.finetune.backends import TextEncoder, build_encoder
from vaxkit.finetune.checkpoint import load_state
from vaxkit.finetune.state import ClassifierState
from vaxkit.taxonomy import CANONICAL_LABELS, LabelSet, normalize_prediction


def _check_threshold(threshold: float) -> float:
    if not 0.0 < threshold < 1.0:
        raise ConfigurationError(f"threshold must lie strictly between 0 and 1, got {threshold}")
    return float(threshold)


def threshold_labels(probabilities: Sequence[float] | np.ndarray, threshold: float) -> LabelSet:
    """Labels whose probability reaches ``threshold``, before the none/empty rule."""

    threshold = _check_threshold(threshold)
    probs = np.asarray(probabilities, dtype=np.float64)
    return frozenset(label for label, prob in zip(CANONICAL_LABELS, probs) if prob >= threshold)


def labels_from_probabilities(probabilities: Sequence[float] | np.ndarray, threshold: float) -> LabelSet:
    return normalize_prediction(threshold_labels(probabilities, threshold))


class VaccineConcernClassifier:
    """A trained state bound to a live encoder."""

    def __init__(self, state: ClassifierState, encoder: TextEncoder | None = None) -> None:
        self.state = state
        if encoder is None:
            encoder = build_encoder(state.backend, pooling=state.pooling)
            if state.encoder_state is not None:
                tensors = {name: torch.from_numpy(value.copy()) for name, value in state.encoder_state.items()}
                encoder.load_state_dict(tensors)
        self.encoder = encoder
        self.encoder.eval()

    @classmethod
    def from_checkpoint(cls, path: str | Path) -> "VaccineConcernClassifier":
        return cls(load_state(path))

    def embed(self, texts: Sequence[str], *, batch_size: int = 16) -> np.ndarray:
        chunks = []
        with torch.no_grad():
            for start in range(0, len(texts), batch_size):
                chunks.append(self.encoder(list(texts[start : start + batch_size])).cpu().numpy())
        if not chunks:
            return np.zeros((0, self.state.backend.embedding_dim), dtype=np.float32)
        return np.concatenate(chunks)

    def predict_proba(self, texts: Sequence[str], *, batch_size: int = 16) -> np.ndarray:
        """Return an ``(n, 12)`` probability matrix in canonical label order."""

        return self.state.forward(self.embed(texts, batch_size=batch_size))

    def predict(self, text: str, threshold: float | None = None) -> LabelSet:
        return self.predict_many([text], threshold)[0]

    def predict_many(self, texts: Sequence[str], threshold: float | None = None) -> list[LabelSet]:
        threshold = self.state.threshold if threshold is None else threshold
        return [labels_from_probabilities(row, threshold) for row in self.predict_proba(texts)]


def predict(text: str, state: ClassifierState, threshold: float | None = None) -> LabelSet:
    return VaccineConcernClassifier(state).predict(text, threshold)


__all__ = [
    "VaccineConcernClassifier",
    "labels_from_probabilities",
    "predict",
    "threshold_labels",
]
