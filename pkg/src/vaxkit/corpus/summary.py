from __future__ import annotations

from typing import Sequence

from pydantic import BaseModel, Field

from vaxkit.errors import MissingGold
from vaxkit.corpus.records import TweetRecord
from vaxkit.taxonomy import CANONICAL_LABELS, LabelId


class CorpusSummary(BaseModel):
    record_count: int = 0
    per_label_counts: dict[LabelId, int] = Field(default_factory=dict)
    multi_label_fraction: float = 0.0


def summarize(records: Sequence[TweetRecord]) -> CorpusSummary:
    """Count records per label and the share of multi-label records."""

    counts = {label: 0 for label in CANONICAL_LABELS}
    multi = 0
    for record in records:
        if record.gold is None:
            raise MissingGold(record.id)
        for label in record.gold:
            counts[label] += 1
        if len(record.gold) >= 2:
            multi += 1
    total = len(records)
    return CorpusSummary(
        record_count=total,
        per_label_counts=counts,
        multi_label_fraction=multi / total if total else 0.0,
    )


def render_summary(summary: CorpusSummary) -> str:
    width = max(len(label.value) for label in CANONICAL_LABELS)
    lines = [
        f"{'records':<{width}}  {summary.record_count:>7}",
        f"{'multi-label':<{width}}  {summary.multi_label_fraction:>7.2%}",
        "-" * (width + 9),
    ]
    for label in CANONICAL_LABELS:
        lines.append(f"{label.value:<{width}}  {summary.per_label_counts.get(label, 0):>7}")
    return "\n".join(lines)


__all__ = ["CorpusSummary", "render_summary", "summarize"]
