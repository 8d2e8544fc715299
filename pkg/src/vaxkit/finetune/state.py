from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np

from vaxkit.finetune.head import forward as head_forward
from vaxkit.finetune.backends import EncoderBackendSpec, Pooling


@dataclass
class ClassifierState:
    """Everything needed to rebuild a trained classifier.

    ``encoder_state`` holds the encoder tensors when the encoder was
    fine-tuned; it is ``None`` for frozen-encoder runs, which reload the
    pretrained weights by name.
    """

    backend: EncoderBackendSpec
    head_weights: np.ndarray
    head_bias: np.ndarray
    pooling: Pooling
    training_log: list[tuple[int, float]] = field(default_factory=list)
    freeze_encoder: bool = False
    threshold: float = 0.5
    encoder_state: dict[str, np.ndarray] | None = None
    training_config: dict[str, Any] = field(default_factory=dict)

    def forward(self, embedding: np.ndarray) -> np.ndarray:
        return head_forward(embedding, self.head_weights, self.head_bias)


__all__ = ["ClassifierState"]
