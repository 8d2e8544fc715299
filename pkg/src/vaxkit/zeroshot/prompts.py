"""Prompt template loading and rendering for zero-shot classification.

Templates are plain text files with a ``[system]`` and a ``[user]`` section.
The system section receives one line per label:
``- <label>: <description> (keywords: a, b, c)``; the user section receives
the tweet verbatim.
"""

from __future__ import annotations

import hashlib
import json
import re
from importlib import resources
from pathlib import Path
from typing import Sequence

from pydantic import BaseModel, ConfigDict, Field

from vaxkit.errors import ConfigurationError
from vaxkit.taxonomy import CANONICAL_LABELS, LabelMeta

DEFAULT_TEMPLATE = "concern_v1"
DEFAULT_MODEL = "gpt-3.5-turbo"

_SECTION = re.compile(r"^\[(system|user)\]\s*$")


class DecodingParams(BaseModel):
    model_config = ConfigDict(frozen=True)

    temperature: float = Field(default=0.7, ge=0)
    max_tokens: int = Field(default=50, ge=1)
    stop: tuple[str, ...] | None = None


class PromptTemplate(BaseModel):
    model_config = ConfigDict(frozen=True)

    name: str
    system: str
    user: str

    @classmethod
    def parse(cls, name: str, text: str) -> "PromptTemplate":
        sections: dict[str, list[str]] = {}
        current: str | None = None
        for line in text.splitlines():
            match = _SECTION.match(line)
            if match:
                current = match.group(1)
                sections[current] = []
            elif current is not None:
                sections[current].append(line)
            elif line.strip() and not line.lstrip().startswith("#"):
                raise ConfigurationError(f"template {name}: text before the first section")
        if set(sections) != {"system", "user"}:
            raise ConfigurationError(f"template {name}: needs exactly one [system] and one [user] section")
        system = "\n".join(sections["system"]).strip("\n")
        user = "\n".join(sections["user"]).strip("\n")
        if "{label_lines}" not in system or "{tweet}" not in user:
            raise ConfigurationError(f"template {name}: missing {{label_lines}} or {{tweet}} placeholder")
        return cls(name=name, system=system, user=user)


def load_template(name_or_path: str | Path = DEFAULT_TEMPLATE) -> PromptTemplate:
    """Load a shipped template by name, or any template file by path."""

    path = Path(name_or_path)
    if path.suffix == ".txt" or path.exists():
        try:
            return PromptTemplate.parse(path.stem, path.read_text(encoding="utf-8"))
        except OSError as exc:
            raise ConfigurationError(f"cannot read prompt template {path}: {exc}") from exc
    source = resources.files("vaxkit.zeroshot").joinpath("templates", f"{name_or_path}.txt")
    if not source.is_file():
        raise ConfigurationError(f"unknown prompt template {name_or_path!r}")
    return PromptTemplate.parse(str(name_or_path), source.read_text(encoding="utf-8"))


class PromptBundle(BaseModel):
    """Rendered prompt plus decoding parameters for one endpoint call."""

    model_config = ConfigDict(frozen=True)

    system_text: str
    user_text: str
    params: DecodingParams
    model_name: str
    template_name: str = DEFAULT_TEMPLATE

    @property
    def prompt_hash(self) -> str:
        payload = json.dumps({"system": self.system_text, "user": self.user_text}, sort_keys=True)
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()

    @property
    def cache_key(self) -> str:
        payload = json.dumps(
            {"model": self.model_name, "prompt": self.prompt_hash, "params": self.params.model_dump(mode="json")},
            sort_keys=True,
        )
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()

    def messages(self) -> list[dict[str, str]]:
        return [
            {"role": "system", "content": self.system_text},
            {"role": "user", "content": self.user_text},
        ]


def render_label_lines(metas: Sequence[LabelMeta]) -> str:
    by_id = {meta.id: meta for meta in metas}
    missing = [label.value for label in CANONICAL_LABELS if label not in by_id]
    if missing:
        raise ConfigurationError(f"label metadata incomplete, missing {', '.join(missing)}")
    lines = []
    for label in CANONICAL_LABELS:
        meta = by_id[label]
        line = f"- {label.value}: {meta.description}"
        if meta.keywords:
            line += f" (keywords: {', '.join(meta.keywords)})"
        lines.append(line)
    return "\n".join(lines)


def build_prompt(
    tweet: str,
    metas: Sequence[LabelMeta],
    params: DecodingParams | None = None,
    *,
    model_name: str = DEFAULT_MODEL,
    template: PromptTemplate | None = None,
) -> PromptBundle:
    """Render the classification prompt for one tweet; pure and deterministic."""

    if not tweet or not tweet.strip():
        raise ValueError("tweet must not be empty")
    template = template or load_template()
    system_text = template.system.replace("{label_lines}", render_label_lines(metas))
    user_text = template.user.replace("{tweet}", tweet)
    return PromptBundle(
        system_text=system_text,
        user_text=user_text,
        params=params or DecodingParams(),
        model_name=model_name,
        template_name=template.name,
    )


__all__ = [
    "DEFAULT_MODEL",
    "DEFAULT_TEMPLATE",
    "DecodingParams",
    "PromptBundle",
    "PromptTemplate",
    "build_prompt",
    "load_template",
    "render_label_lines",
]
