"""Canonical vaccine-concern label scheme and label-set conversions."""

from __future__ import annotations

from enum import StrEnum
from typing import AbstractSet, Iterable, Sequence

import numpy as np

from vaxkit.errors import DimensionMismatch, EmptyLabelString, UnknownLabel


class LabelId(StrEnum):
    UNNECESSARY = "unnecessary"
    MANDATORY = "mandatory"
    PHARMA = "pharma"
    CONSPIRACY = "conspiracy"
    POLITICAL = "political"
    COUNTRY = "country"
    RUSHED = "rushed"
    INGREDIENTS = "ingredients"
    SIDE_EFFECT = "side-effect"
    INEFFECTIVE = "ineffective"
    RELIGIOUS = "religious"
    NONE = "none"


LabelSet = frozenset[LabelId]

CANONICAL_LABELS: tuple[LabelId, ...] = tuple(LabelId)
NUM_LABELS = len(CANONICAL_LABELS)
LABEL_INDEX: dict[LabelId, int] = {label: index for index, label in enumerate(CANONICAL_LABELS)}
DEFAULT_DELIMITER = " "

_BY_TEXT: dict[str, LabelId] = {label.value: label for label in CANONICAL_LABELS}


def canonical_labels() -> list[LabelId]:
    """Return the twelve labels in their fixed order (index 0..11)."""

    return list(CANONICAL_LABELS)


def label_from_text(token: str) -> LabelId:
    key = token.strip().lower()
    try:
        return _BY_TEXT[key]
    except KeyError:
        raise UnknownLabel(token.strip()) from None


def parse_label_string(raw: str, delimiter: str = DEFAULT_DELIMITER) -> LabelSet:
    """Parse a delimited label column such as ``"side-effect ineffective"``."""

    if not delimiter:
        raise ValueError("delimiter must be a non-empty separator")
    if raw is None or not raw.strip():
        raise EmptyLabelString()
    tokens = [token.strip() for token in raw.split(delimiter) if token.strip()]
    if not tokens:
        raise EmptyLabelString()
    return frozenset(label_from_text(token) for token in tokens)


def sort_labels(labels: Iterable[LabelId]) -> list[LabelId]:
    return sorted(set(labels), key=LABEL_INDEX.__getitem__)


def format_label_set(labels: AbstractSet[LabelId], delimiter: str = DEFAULT_DELIMITER) -> str:
    """Serialize labels in canonical order; inverse of :func:`parse_label_string`."""

    return delimiter.join(label.value for label in sort_labels(labels))


def to_multi_hot(labels: AbstractSet[LabelId]) -> np.ndarray:
    vector = np.zeros(NUM_LABELS, dtype=np.uint8)
    for label in labels:
        vector[LABEL_INDEX[label]] = 1
    return vector


def from_multi_hot(bits: Sequence[int] | np.ndarray) -> LabelSet:
    vector = np.asarray(bits)
    if vector.shape != (NUM_LABELS,):
        raise DimensionMismatch(NUM_LABELS, int(vector.size), what="multi-hot vector")
    return frozenset(CANONICAL_LABELS[index] for index in np.flatnonzero(vector))


def normalize_prediction(labels: AbstractSet[LabelId]) -> LabelSet:
    """Apply the prediction rule: empty -> {none}; none dropped next to other labels."""

    concerns = frozenset(labels) - {LabelId.NONE}
    if concerns:
        return concerns
    return frozenset({LabelId.NONE})


__all__ = [
    "CANONICAL_LABELS",
    "DEFAULT_DELIMITER",
    "LABEL_INDEX",
    "LabelId",
    "LabelSet",
    "NUM_LABELS",
    "canonical_labels",
    "format_label_set",
    "from_multi_hot",
    "label_from_text",
    "normalize_prediction",
    "parse_label_string",
    "sort_labels",
    "to_multi_hot",
]
