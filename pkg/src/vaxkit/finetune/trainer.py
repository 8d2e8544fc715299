"""Fine-tuning loop: encoder -> dense layer -> sigmoid, trained on BCE."""

from __future__ import annotations

import logging
import math
from typing import Callable, Sequence

import numpy as np
import torch
from pydantic import BaseModel, Field
from torch import nn

from vaxkit.corpus import TweetRecord
from vaxkit.errors import InvariantViolation, MissingGold, NonFiniteLoss
from vaxkit.finetune.backends import EncoderBackendSpec, TextEncoder, build_encoder
from vaxkit.finetune.state import ClassifierState
from vaxkit.observability import log_with_correlation
from vaxkit.taxonomy import NUM_LABELS, to_multi_hot

logger = logging.getLogger(__name__)


class TrainingConfig(BaseModel):
    epochs: int = Field(default=100, ge=1)
    batch_size: int = Field(default=1, ge=1)
    learning_rate: float = Field(default=2e-5, gt=0)
    threshold: float = Field(default=0.5, gt=0, lt=1)
    seed: int = 13
    shuffle_each_epoch: bool = True
    freeze_encoder: bool = False


def _targets(records: Sequence[TweetRecord]) -> torch.Tensor:
    rows = []
    for record in records:
        if record.gold is None:
            raise MissingGold(record.id)
        rows.append(to_multi_hot(record.gold))
    return torch.tensor(np.stack(rows), dtype=torch.float32)


def train(
    records: Sequence[TweetRecord],
    backend: EncoderBackendSpec,
    config: TrainingConfig,
    *,
    encoder: TextEncoder | None = None,
    run_id: str | None = None,
    on_epoch: Callable[[int, float], None] | None = None,
) -> ClassifierState:
    """Train the dense head (and, unless frozen, the encoder) on ``records``.

    Each epoch visits every record once, in a seeded shuffled order, with
    Adam updates after every batch. The returned log has one mean loss per
    epoch.
    """

    if not records:
        raise InvariantViolation([], "no training records")
    targets = _targets(records)
    texts = [record.text for record in records]

    torch.manual_seed(config.seed)
    rng = np.random.default_rng(config.seed)
    encoder = encoder or build_encoder(backend)

    dense = nn.Linear(backend.embedding_dim, NUM_LABELS)
    nn.init.zeros_(dense.weight)
    nn.init.zeros_(dense.bias)

    cached: torch.Tensor | None = None
    parameters = list(dense.parameters())
    if config.freeze_encoder:
        encoder.requires_grad_(False)
        encoder.eval()
        with torch.no_grad():
            cached = torch.cat(
                [encoder(texts[start : start + 64]) for start in range(0, len(texts), 64)]
            ).detach()
    else:
        encoder.train()
        parameters += [param for param in encoder.parameters() if param.requires_grad]

    optimizer = torch.optim.Adam(parameters, lr=config.learning_rate)
    loss_fn = nn.BCEWithLogitsLoss()
    training_log: list[tuple[int, float]] = []

    for epoch in range(1, config.epochs + 1):
        order = rng.permutation(len(records)) if config.shuffle_each_epoch else np.arange(len(records))
        total = 0.0
        for step, start in enumerate(range(0, len(order), config.batch_size), start=1):
            batch = order[start : start + config.batch_size]
            index = torch.as_tensor(batch, dtype=torch.long)
            if cached is not None:
                embeddings = cached[index]
            else:
                embeddings = encoder([texts[i] for i in batch])
            loss = loss_fn(dense(embeddings), targets[index])
            value = float(loss.item())
            if not math.isfinite(value):
                raise NonFiniteLoss(epoch, step, value)
            optimizer.zero_grad()
            loss.backward()
            optimizer.step()
            total += value * len(batch)

        mean_loss = total / len(records)
        training_log.append((epoch, mean_loss))
        log_with_correlation(logger, logging.INFO, f"epoch {epoch}/{config.epochs} mean loss {mean_loss:.6f}", run_id=run_id)
        if on_epoch is not None:
            on_epoch(epoch, mean_loss)

    encoder.eval()
    encoder_state = None
    if not config.freeze_encoder:
        encoder_state = {name: tensor.detach().cpu().numpy().copy() for name, tensor in encoder.state_dict().items()}

    return ClassifierState(
        backend=backend,
        head_weights=dense.weight.detach().cpu().numpy().T.copy(),
        head_bias=dense.bias.detach().cpu().numpy().copy(),
        pooling=encoder.pooling,
        training_log=training_log,
        freeze_encoder=config.freeze_encoder,
        threshold=config.threshold,
        encoder_state=encoder_state,
        training_config=config.model_dump(),
    )


__all__ = ["TrainingConfig", "train"]
