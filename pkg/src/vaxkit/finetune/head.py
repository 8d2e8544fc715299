"""Dense sigmoid head math in float64 numpy.

Weights are laid out ``(embedding_dim, 12)`` so that ``logits = e @ W + b``.
"""

from __future__ import annotations

import numpy as np

from vaxkit.errors import DimensionMismatch
from vaxkit.taxonomy import NUM_LABELS

_EPS = 1e-12


def sigmoid(logits: np.ndarray) -> np.ndarray:
    return 0.5 * (1.0 + np.tanh(0.5 * logits))


def _check(embedding: np.ndarray, weights: np.ndarray, bias: np.ndarray) -> None:
    if weights.ndim != 2 or weights.shape[1] != NUM_LABELS or bias.shape != (NUM_LABELS,):
        raise DimensionMismatch(NUM_LABELS, int(weights.shape[-1]), what="head output")
    if embedding.shape[-1] != weights.shape[0]:
        raise DimensionMismatch(int(weights.shape[0]), int(embedding.shape[-1]))


def logits(embedding: np.ndarray, weights: np.ndarray, bias: np.ndarray) -> np.ndarray:
    embedding = np.asarray(embedding, dtype=np.float64)
    weights = np.asarray(weights, dtype=np.float64)
    bias = np.asarray(bias, dtype=np.float64)
    _check(embedding, weights, bias)
    return embedding @ weights + bias


def forward(embedding: np.ndarray, weights: np.ndarray, bias: np.ndarray) -> np.ndarray:
    """Label probabilities for one embedding ``(dim,)`` or a batch ``(n, dim)``.

    Outputs are clipped into the open interval (0, 1).
    """

    return np.clip(sigmoid(logits(embedding, weights, bias)), _EPS, 1.0 - _EPS)


def bce_loss(embedding: np.ndarray, target: np.ndarray, weights: np.ndarray, bias: np.ndarray) -> float:
    """Binary cross-entropy averaged over the twelve labels (single example)."""

    z = logits(embedding, weights, bias)
    y = np.asarray(target, dtype=np.float64)
    return float(np.mean(np.logaddexp(0.0, z) - y * z))


def head_gradients(
    embedding: np.ndarray,
    target: np.ndarray,
    weights: np.ndarray,
    bias: np.ndarray,
) -> tuple[np.ndarray, np.ndarray]:
    """Closed-form gradients of :func:`bce_loss` with respect to ``W`` and ``b``."""

    e = np.asarray(embedding, dtype=np.float64)
    y = np.asarray(target, dtype=np.float64)
    delta = (sigmoid(logits(e, weights, bias)) - y) / NUM_LABELS
    return np.outer(e, delta), delta


__all__ = ["bce_loss", "forward", "head_gradients", "logits", "sigmoid"]
