from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Any


@dataclass
class MetricsReporter:
    """In-memory counters for zero-shot endpoint traffic."""

    counters: Counter = field(default_factory=Counter)

    def record_call(self, *, model: str, status: str) -> None:
        self.counters["endpoint.calls"] += 1
        self.counters[f"endpoint.status.{status}"] += 1
        self.counters[f"endpoint.model.{model}"] += 1

    def record_retry(self, *, reason: str) -> None:
        self.counters["endpoint.retries"] += 1
        self.counters[f"endpoint.retries.{reason}"] += 1

    def record_cache_hit(self) -> None:
        self.counters["cache.hits"] += 1

    def record_replay_hit(self) -> None:
        self.counters["replay.hits"] += 1

    def record_parse_fallback(self) -> None:
        self.counters["parse.fallbacks"] += 1

    def snapshot(self) -> dict[str, Any]:
        return dict(self.counters)


__all__ = ["MetricsReporter"]
