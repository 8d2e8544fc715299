"""Text-encoder backends producing one pooled embedding per tweet.

Two kinds of backend exist:

* ``hashing``: a tiny deterministic encoder (sha256 token buckets, scaled
  one-hot token vectors and a fixed signed-permutation projection). It needs
  no download and makes the whole training surface testable on a CPU.
* any Hugging Face checkpoint name, loaded with ``transformers``; the pooled
  output is the model's pooler when it has one, else the attention-masked
  mean of the last hidden states.
"""

from __future__ import annotations

import abc
import hashlib
import logging
import re
from typing import ClassVar, Literal, Sequence

import numpy as np
import torch
from pydantic import BaseModel, ConfigDict, Field
from torch import nn

from vaxkit.errors import BackendUnavailable, DimensionMismatch, TokenizationFailure

logger = logging.getLogger(__name__)

Pooling = Literal["pooler", "mean", "hash-mean"]

HASHING_BACKEND = "hashing"

KNOWN_EMBEDDING_DIMS: dict[str, int] = {
    HASHING_BACKEND: 16,
    "bert-large-uncased": 1024,
    "Hate-speech-CNERG/bert-base-uncased-hatexplain": 768,
}


class EncoderBackendSpec(BaseModel):
    """Which encoder to load and the shape of what it returns."""

    model_config = ConfigDict(frozen=True)

    model_name: str
    embedding_dim: int = Field(gt=0)
    max_input_tokens: int = Field(default=512, ge=1)


def resolve_backend_spec(
    model_name: str,
    *,
    embedding_dim: int | None = None,
    max_input_tokens: int = 512,
) -> EncoderBackendSpec:
    """Build a spec for ``model_name``, looking up its pooled width when not given."""

    known = KNOWN_EMBEDDING_DIMS.get(model_name)
    if embedding_dim is None:
        embedding_dim = known if known is not None else _checkpoint_hidden_size(model_name)
    elif known is not None and model_name != HASHING_BACKEND and known != embedding_dim:
        raise DimensionMismatch(known, embedding_dim, what=f"{model_name} pooled output")
    return EncoderBackendSpec(
        model_name=model_name,
        embedding_dim=embedding_dim,
        max_input_tokens=max_input_tokens,
    )


def _checkpoint_hidden_size(model_name: str) -> int:
    from transformers import AutoConfig

    try:
        config = AutoConfig.from_pretrained(model_name)
    except (OSError, ValueError) as exc:
        raise BackendUnavailable(model_name, str(exc)) from exc
    hidden = getattr(config, "hidden_size", None)
    if not hidden:
        raise BackendUnavailable(model_name, "checkpoint config has no hidden_size")
    return int(hidden)


class TextEncoder(nn.Module, abc.ABC):
    """Maps a batch of tweets to a ``(batch, embedding_dim)`` tensor."""

    pooling: Pooling

    def __init__(self, spec: EncoderBackendSpec) -> None:
        super().__init__()
        self.spec = spec

    @abc.abstractmethod
    def forward(self, texts: Sequence[str]) -> torch.Tensor:  # pragma: no cover - interface
        raise NotImplementedError


class HashingEncoder(TextEncoder):
    """Deterministic bag-of-buckets encoder used for tests and smoke runs."""

    pooling: ClassVar[Pooling] = "hash-mean"
    _TOKEN = re.compile(r"\w+(?:[-']\w+)*")

    def __init__(self, spec: EncoderBackendSpec, *, scale: float = 256.0, seed: int = 0) -> None:
        super().__init__(spec)
        dim = spec.embedding_dim
        self.token_embeddings = nn.Embedding(dim, dim)
        self.projection = nn.Linear(dim, dim, bias=False)
        generator = torch.Generator().manual_seed(seed)
        permutation = torch.randperm(dim, generator=generator)
        signs = torch.randint(0, 2, (dim,), generator=generator).float() * 2 - 1
        with torch.no_grad():
            self.token_embeddings.weight.copy_(torch.eye(dim) * scale)
            self.projection.weight.zero_()
            self.projection.weight[torch.arange(dim), permutation] = signs
        self.projection.requires_grad_(False)

    def tokenize(self, text: str) -> list[str]:
        if not text or not text.strip():
            raise TokenizationFailure("cannot tokenize empty text")
        tokens = self._TOKEN.findall(text.lower()) or [text.strip().lower()]
        return tokens[: self.spec.max_input_tokens]

    def bucket(self, token: str) -> tuple[int, float]:
        """Return the bucket index and sign a token hashes to."""

        digest = hashlib.sha256(token.encode("utf-8")).digest()
        index = int.from_bytes(digest[:4], "little") % self.spec.embedding_dim
        sign = 1.0 if digest[4] & 1 else -1.0
        return index, sign

    def forward(self, texts: Sequence[str]) -> torch.Tensor:
        pooled = []
        for text in texts:
            buckets = [self.bucket(token) for token in self.tokenize(text)]
            indices = torch.tensor([index for index, _ in buckets], dtype=torch.long)
            signs = torch.tensor([sign for _, sign in buckets], dtype=torch.float32)
            vectors = self.token_embeddings(indices) * signs.unsqueeze(-1)
            pooled.append(vectors.mean(dim=0))
        return self.projection(torch.stack(pooled))


class TransformerEncoder(TextEncoder):
    """Pretrained Hugging Face encoder with pooled sentence output."""

    def __init__(self, spec: EncoderBackendSpec, *, pooling: Pooling | None = None) -> None:
        super().__init__(spec)
        from transformers import AutoModel, AutoTokenizer

        try:
            self.tokenizer = AutoTokenizer.from_pretrained(spec.model_name)
            self.model = AutoModel.from_pretrained(spec.model_name)
        except (OSError, ValueError) as exc:
            raise BackendUnavailable(spec.model_name, str(exc)) from exc

        hidden = int(self.model.config.hidden_size)
        if hidden != spec.embedding_dim:
            raise DimensionMismatch(spec.embedding_dim, hidden, what=f"{spec.model_name} pooled output")
        has_pooler = getattr(self.model, "pooler", None) is not None
        self.pooling = pooling or ("pooler" if has_pooler else "mean")
        if self.pooling == "pooler" and not has_pooler:
            raise BackendUnavailable(spec.model_name, "checkpoint has no pooler; use mean pooling")
        logger.info("Loaded encoder %s (dim=%d, pooling=%s)", spec.model_name, hidden, self.pooling)

    def forward(self, texts: Sequence[str]) -> torch.Tensor:
        try:
            batch = self.tokenizer(
                list(texts),
                padding=True,
                truncation=True,
                max_length=self.spec.max_input_tokens,
                return_tensors="pt",
            )
        except Exception as exc:
            raise TokenizationFailure(f"{self.spec.model_name}: {exc}") from exc
        device = next(self.model.parameters()).device
        batch = {key: value.to(device) for key, value in batch.items()}
        outputs = self.model(**batch)
        if self.pooling == "pooler":
            return outputs.pooler_output
        mask = batch["attention_mask"].unsqueeze(-1).to(outputs.last_hidden_state.dtype)
        summed = (outputs.last_hidden_state * mask).sum(dim=1)
        return summed / mask.sum(dim=1).clamp(min=1.0)


def build_encoder(spec: EncoderBackendSpec, *, pooling: Pooling | None = None) -> TextEncoder:
    if spec.model_name == HASHING_BACKEND:
        return HashingEncoder(spec)
    return TransformerEncoder(spec, pooling=None if pooling == "hash-mean" else pooling)


def encode(text: str, backend: TextEncoder | EncoderBackendSpec) -> np.ndarray:
    """Return the pooled embedding of one tweet as a float32 vector."""

    encoder = build_encoder(backend) if isinstance(backend, EncoderBackendSpec) else backend
    if not text or not text.strip():
        raise TokenizationFailure("cannot encode empty text")
    was_training = encoder.training
    encoder.eval()
    try:
        with torch.no_grad():
            vector = encoder([text])[0]
    finally:
        encoder.train(was_training)
    return vector.detach().cpu().numpy().astype(np.float32)


__all__ = [
    "EncoderBackendSpec",
    "HASHING_BACKEND",
    "HashingEncoder",
    "KNOWN_EMBEDDING_DIMS",
    "TextEncoder",
    "TransformerEncoder",
    "build_encoder",
    "encode",
    "resolve_backend_spec",
]
