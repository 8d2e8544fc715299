"""Resolved toolkit settings.

Sources are layered, later ones winning: model defaults, a YAML config file,
``VAXKIT_*`` environment variables, then command-line flags.
"""

from __future__ import annotations

import os
from pathlib import Path
from typing import Any, Mapping

import yaml
from pydantic import BaseModel, Field, ValidationError

from vaxkit.corpus import CorpusSettings
from vaxkit.errors import ConfigurationError
from vaxkit.finetune import HASHING_BACKEND, TrainingConfig
from vaxkit.metrics import MetricsSettings
from vaxkit.zeroshot import EndpointPolicy

# environment variable -> dotted settings key
ENV_OVERRIDES: dict[str, str] = {
    "VAXKIT_LLM_BASE_URL": "endpoint.base_url",
    "VAXKIT_LLM_MODEL": "endpoint.model",
    "VAXKIT_CACHE_DIR": "endpoint.cache_dir",
    "VAXKIT_DELIMITER": "corpus.delimiter",
}


class VaxkitSettings(BaseModel):
    backend: str = HASHING_BACKEND
    label_metadata: str | None = None
    log_level: str = "INFO"
    corpus: CorpusSettings = Field(default_factory=CorpusSettings)
    training: TrainingConfig = Field(default_factory=TrainingConfig)
    endpoint: EndpointPolicy = Field(default_factory=EndpointPolicy)
    metrics: MetricsSettings = Field(default_factory=MetricsSettings)

    def snapshot(self) -> dict[str, Any]:
        return self.model_dump(mode="json")


def deep_merge(base: Mapping[str, Any], override: Mapping[str, Any]) -> dict[str, Any]:
    merged = dict(base)
    for key, value in override.items():
        if isinstance(value, Mapping) and isinstance(merged.get(key), Mapping):
            merged[key] = deep_merge(merged[key], value)
        else:
            merged[key] = value
    return merged


def dotted(key: str, value: Any) -> dict[str, Any]:
    """``dotted("endpoint.model", "m")`` -> ``{"endpoint": {"model": "m"}}``."""

    head, _, rest = key.partition(".")
    return {head: dotted(rest, value) if rest else value}


def read_config_file(path: str | Path) -> dict[str, Any]:
    path = Path(path)
    try:
        data = yaml.safe_load(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigurationError(f"cannot read config file {path}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigurationError(f"config file {path} is not valid YAML: {exc}") from exc
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigurationError(f"config file {path} must hold a mapping at the top level")
    return data


def env_overrides(environ: Mapping[str, str] | None = None) -> dict[str, Any]:
    environ = os.environ if environ is None else environ
    layer: dict[str, Any] = {}
    for variable, key in ENV_OVERRIDES.items():
        value = environ.get(variable)
        if value:
            layer = deep_merge(layer, dotted(key, value))
    return layer


def load_settings(
    config_path: str | Path | None = None,
    *,
    flags: Mapping[str, Any] | None = None,
    environ: Mapping[str, str] | None = None,
) -> VaxkitSettings:
    """Resolve settings; ``flags`` maps dotted keys to values already parsed."""

    layers: dict[str, Any] = {}
    if config_path is not None:
        layers = deep_merge(layers, read_config_file(config_path))
    layers = deep_merge(layers, env_overrides(environ))
    for key, value in (flags or {}).items():
        if value is not None:
            layers = deep_merge(layers, dotted(key, value))
    try:
        return VaxkitSettings.model_validate(layers)
    except ValidationError as exc:
        raise ConfigurationError(f"invalid configuration: {exc}") from exc


__all__ = [
    "ENV_OVERRIDES",
    "VaxkitSettings",
    "deep_merge",
    "dotted",
    "env_overrides",
    "load_settings",
    "read_config_file",
]
