"""Turning free-form model replies into label sets.

Lenient mode scans the reply for label names and close surface variants
("side effects", "Big Pharma", "conspiracies"). Strict mode requires the
reply to be a comma/semicolon/newline separated list where every item is a
label name. Either way the result is never empty: replies with no usable
label yield ``{none}`` and a warning.
"""

from __future__ import annotations

import logging
import re

from vaxkit.taxonomy import LabelId, LabelSet, normalize_prediction

logger = logging.getLogger(__name__)

_VARIANTS: dict[LabelId, str] = {
    LabelId.UNNECESSARY: r"unnecessary",
    LabelId.MANDATORY: r"mandatory",
    LabelId.PHARMA: r"(?:big[\s_-]?)?pharma",
    LabelId.CONSPIRACY: r"conspirac(?:y|ies)",
    LabelId.POLITICAL: r"political",
    LabelId.COUNTRY: r"country",
    LabelId.RUSHED: r"rushed",
    LabelId.INGREDIENTS: r"ingredients?",
    LabelId.SIDE_EFFECT: r"side[\s_-]?effects?",
    LabelId.INEFFECTIVE: r"ineffective",
    LabelId.RELIGIOUS: r"religious",
    LabelId.NONE: r"none",
}

_SCAN: dict[LabelId, re.Pattern[str]] = {
    label: re.compile(rf"(?<![\w-]){pattern}(?![\w-])", re.IGNORECASE) for label, pattern in _VARIANTS.items()
}
_EXACT: dict[LabelId, re.Pattern[str]] = {
    label: re.compile(rf"{pattern}", re.IGNORECASE) for label, pattern in _VARIANTS.items()
}
_ITEM_SEPARATORS = re.compile(r"[,;\n]+")
_ITEM_NOISE = " \t\"'`*.[]()-:"
_LIST_PREFIX = re.compile(r"^\s*labels?\s*:\s*", re.IGNORECASE)


def match_labels(raw: str, *, strict: bool = False) -> set[LabelId]:
    """Labels named in ``raw`` before the none/empty rule; empty when unusable."""

    if not raw or not raw.strip():
        return set()
    if not strict:
        return {label for label, pattern in _SCAN.items() if pattern.search(raw)}

    found: set[LabelId] = set()
    for item in _ITEM_SEPARATORS.split(_LIST_PREFIX.sub("", raw.strip())):
        item = item.strip(_ITEM_NOISE)
        if not item:
            continue
        label = next((label for label, pattern in _EXACT.items() if pattern.fullmatch(item)), None)
        if label is None:
            return set()
        found.add(label)
    return found


def parse_response(raw: str, *, strict: bool = False) -> LabelSet:
    """Parse a model reply; total, deterministic, never empty."""

    found = match_labels(raw, strict=strict)
    if not found:
        logger.warning("No label found in model reply %r; falling back to 'none'", (raw or "")[:200])
    return normalize_prediction(found)


__all__ = ["match_labels", "parse_response"]
