"""Label metadata (descriptions and prompt keywords) loaded from YAML."""

from __future__ import annotations

import re
from importlib import resources
from pathlib import Path
from typing import Any

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from vaxkit.errors import ConfigurationError
from vaxkit.taxonomy.labels import CANONICAL_LABELS, LABEL_INDEX, LabelId

# keywords may not repeat a label id; the prompt names each id once, as its line head
_LABEL_WORD = re.compile(
    r"(?<![\w-])(?:" + "|".join(re.escape(label.value) for label in CANONICAL_LABELS) + r")(?![\w-])",
    re.IGNORECASE,
)


class LabelMeta(BaseModel):
    """Description and keywords for one label."""

    model_config = ConfigDict(frozen=True)

    id: LabelId
    description: str
    keywords: tuple[str, ...] = Field(default_factory=tuple)

    @field_validator("description")
    @classmethod
    def _description_not_blank(cls, value: str) -> str:
        value = value.strip()
        if not value:
            raise ValueError("description must not be empty")
        return value

    @field_validator("keywords", mode="before")
    @classmethod
    def _keywords_list(cls, value: Any) -> Any:
        if value is None:
            return ()
        return tuple(str(item).strip() for item in value if str(item).strip())

    @field_validator("keywords")
    @classmethod
    def _keywords_avoid_label_ids(cls, value: tuple[str, ...]) -> tuple[str, ...]:
        named = [keyword for keyword in value if _LABEL_WORD.search(keyword)]
        if named:
            raise ValueError(f"keywords must not repeat label ids: {', '.join(named)}")
        return value


def _read_metadata_text(path: str | Path | None) -> tuple[str, str]:
    if path is None:
        source = resources.files("vaxkit.taxonomy").joinpath("labels.yaml")
        return source.read_text(encoding="utf-8"), "vaxkit/taxonomy/labels.yaml"
    try:
        return Path(path).read_text(encoding="utf-8"), str(path)
    except OSError as exc:
        raise ConfigurationError(f"Cannot read label metadata {path}: {exc}") from exc


def load_label_metadata(path: str | Path | None = None) -> tuple[LabelMeta, ...]:
    """Load all twelve label records, returned in canonical order.

    ``path=None`` reads the metadata shipped with the package.
    """

    text, origin = _read_metadata_text(path)
    try:
        payload = yaml.safe_load(text) or {}
    except yaml.YAMLError as exc:
        raise ConfigurationError(f"Invalid YAML in {origin}: {exc}") from exc

    raw_labels = payload.get("labels") if isinstance(payload, dict) else None
    if not isinstance(raw_labels, list):
        raise ConfigurationError(f"{origin}: expected a top-level 'labels' list")

    metas: dict[LabelId, LabelMeta] = {}
    for raw in raw_labels:
        try:
            meta = LabelMeta.model_validate(raw)
        except ValidationError as exc:
            raise ConfigurationError(f"{origin}: invalid label record {raw!r}: {exc}") from exc
        if meta.id in metas:
            raise ConfigurationError(f"{origin}: label {meta.id.value!r} defined twice")
        metas[meta.id] = meta

    missing = [label.value for label in CANONICAL_LABELS if label not in metas]
    if missing:
        raise ConfigurationError(f"{origin}: missing labels {', '.join(missing)}")
    return tuple(sorted(metas.values(), key=lambda meta: LABEL_INDEX[meta.id]))


__all__ = ["LabelMeta", "load_label_metadata"]
