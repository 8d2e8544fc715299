"""Macro-F1 and Jaccard scoring of predicted against gold label sets.

Conventions (both configurable through ``MetricsSettings``):

* absent labels: a label with no gold occurrence and no prediction has an
  undefined F1. By default it scores 0 and still counts in the macro mean
  (``absent_label_policy="zero"``); ``"skip"`` drops it from the mean.
* Jaccard: by default the mean over pairs of |pred & gold| / |pred | gold|
  (``jaccard_variant="samples"``); ``"labels"`` averages tp / (tp + fp + fn)
  over labels instead, under the same absent-label policy.
"""

from __future__ import annotations

from collections import Counter
from typing import Iterable, Literal, Mapping, NamedTuple, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator
from sklearn.metrics import jaccard_score, multilabel_confusion_matrix, precision_recall_fscore_support

from vaxkit.errors import DuplicateId, EmptyEvaluation, IdMismatch, MissingGold
from vaxkit.taxonomy import CANONICAL_LABELS, NUM_LABELS, LabelId, LabelSet, to_multi_hot


class MetricsSettings(BaseModel):
    absent_label_policy: Literal["zero", "skip"] = "zero"
    jaccard_variant: Literal["samples", "labels"] = "samples"


class PredictionPair(BaseModel):
    model_config = ConfigDict(frozen=True)

    id: str
    predicted: frozenset[LabelId]
    gold: frozenset[LabelId]

    @field_validator("predicted", "gold")
    @classmethod
    def _non_empty(cls, value: frozenset[LabelId]) -> frozenset[LabelId]:
        if not value:
            raise ValueError("label sets in a prediction pair must be non-empty")
        return value


class Confusion(NamedTuple):
    tp: int
    fp: int
    fn: int


class LabelScores(BaseModel):
    model_config = ConfigDict(frozen=True)

    precision: float = Field(ge=0, le=1)
    recall: float = Field(ge=0, le=1)
    f1: float = Field(ge=0, le=1)
    support: int = Field(ge=0)


class EvaluationReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    macro_f1: float = Field(ge=0, le=1)
    jaccard: float = Field(ge=0, le=1)
    per_label: dict[LabelId, LabelScores]
    pair_count: int
    absent_label_policy: Literal["zero", "skip"] = "zero"
    jaccard_variant: Literal["samples", "labels"] = "samples"

    def to_records(self) -> list[dict[str, object]]:
        """One record per metric plus one per label, full precision."""

        records: list[dict[str, object]] = [
            {"kind": "metric", "name": "macro_f1", "value": self.macro_f1},
            {"kind": "metric", "name": "jaccard", "value": self.jaccard, "variant": self.jaccard_variant},
            {"kind": "metric", "name": "pair_count", "value": self.pair_count},
        ]
        for label in CANONICAL_LABELS:
            scores = self.per_label[label]
            records.append({"kind": "label", "name": label.value, **scores.model_dump()})
        return records


def _matrices(pairs: Sequence[PredictionPair]) -> tuple[np.ndarray, np.ndarray]:
    if not pairs:
        raise EmptyEvaluation()
    y_pred = np.stack([to_multi_hot(pair.predicted) for pair in pairs])
    y_true = np.stack([to_multi_hot(pair.gold) for pair in pairs])
    return y_true, y_pred


def _absent_mask(y_true: np.ndarray, y_pred: np.ndarray) -> np.ndarray:
    return (y_true.sum(axis=0) == 0) & (y_pred.sum(axis=0) == 0)


def _average(values: np.ndarray, absent: np.ndarray, policy: str) -> float:
    if policy == "skip":
        kept = values[~absent]
        return float(kept.mean()) if kept.size else 0.0
    return float(values.mean())


def per_label_confusion(pairs: Sequence[PredictionPair]) -> dict[LabelId, Confusion]:
    y_true, y_pred = _matrices(pairs)
    matrices = multilabel_confusion_matrix(y_true, y_pred, labels=list(range(NUM_LABELS)))
    return {
        label: Confusion(tp=int(m[1, 1]), fp=int(m[0, 1]), fn=int(m[1, 0]))
        for label, m in zip(CANONICAL_LABELS, matrices)
    }


def per_label_scores(pairs: Sequence[PredictionPair]) -> dict[LabelId, LabelScores]:
    """Precision, recall, F1 and gold support per label; 0 where undefined."""

    y_true, y_pred = _matrices(pairs)
    precision, recall, f1, support = precision_recall_fscore_support(
        y_true, y_pred, labels=list(range(NUM_LABELS)), average=None, zero_division=0
    )
    return {
        label: LabelScores(precision=float(p), recall=float(r), f1=float(f), support=int(s))
        for label, p, r, f, s in zip(CANONICAL_LABELS, precision, recall, f1, support)
    }


def macro_f1(pairs: Sequence[PredictionPair], settings: MetricsSettings | None = None) -> float:
    settings = settings or MetricsSettings()
    y_true, y_pred = _matrices(pairs)
    _, _, f1, _ = precision_recall_fscore_support(
        y_true, y_pred, labels=list(range(NUM_LABELS)), average=None, zero_division=0
    )
    return _average(np.asarray(f1, dtype=np.float64), _absent_mask(y_true, y_pred), settings.absent_label_policy)


def jaccard_similarity(pairs: Sequence[PredictionPair], settings: MetricsSettings | None = None) -> float:
    settings = settings or MetricsSettings()
    y_true, y_pred = _matrices(pairs)
    if settings.jaccard_variant == "samples":
        return float(jaccard_score(y_true, y_pred, average="samples"))
    per_label = jaccard_score(y_true, y_pred, labels=list(range(NUM_LABELS)), average=None, zero_division=0)
    return _average(np.asarray(per_label, dtype=np.float64), _absent_mask(y_true, y_pred), settings.absent_label_policy)


def evaluate(pairs: Sequence[PredictionPair], settings: MetricsSettings | None = None) -> EvaluationReport:
    settings = settings or MetricsSettings()
    if not pairs:
        raise EmptyEvaluation()
    counts = Counter(pair.id for pair in pairs)
    duplicates = sorted(pair_id for pair_id, n in counts.items() if n > 1)
    if duplicates:
        raise DuplicateId(duplicates[0])
    return EvaluationReport(
        macro_f1=macro_f1(pairs, settings),
        jaccard=jaccard_similarity(pairs, settings),
        per_label=per_label_scores(pairs),
        pair_count=len(pairs),
        absent_label_policy=settings.absent_label_policy,
        jaccard_variant=settings.jaccard_variant,
    )


def pair_predictions(
    predictions: Iterable[tuple[str, LabelSet]],
    gold: Mapping[str, LabelSet | None],
) -> list[PredictionPair]:
    """Join predictions to gold by id; ids must match as sets.

    Pairs come out in ``gold`` order.
    """

    predicted: dict[str, LabelSet] = {}
    for tweet_id, labels in predictions:
        if tweet_id in predicted:
            raise DuplicateId(tweet_id)
        predicted[tweet_id] = labels
    missing = set(gold) - set(predicted)
    extra = set(predicted) - set(gold)
    if missing or extra:
        raise IdMismatch(missing, extra)
    pairs: list[PredictionPair] = []
    for tweet_id, gold_labels in gold.items():
        if gold_labels is None:
            raise MissingGold(tweet_id)
        pairs.append(PredictionPair(id=tweet_id, predicted=predicted[tweet_id], gold=gold_labels))
    return pairs


__all__ = [
    "Confusion",
    "EvaluationReport",
    "LabelScores",
    "MetricsSettings",
    "PredictionPair",
    "evaluate",
    "jaccard_similarity",
    "macro_f1",
    "pair_predictions",
    "per_label_confusion",
    "per_label_scores",
]
