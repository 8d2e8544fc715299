"""Response cache, exchange transcripts and transcript replay."""

from __future__ import annotations

import json
import logging
import os
import tempfile
from datetime import datetime
from pathlib import Path
from typing import Iterable

from pydantic import BaseModel, ValidationError

from vaxkit.taxonomy import LabelId

logger = logging.getLogger(__name__)


class ResponseCache:
    """Raw replies stored as one JSON file per cache key.

    Writes go to a temporary file in the cache directory and are renamed into
    place, so readers never observe a partial entry.
    """

    def __init__(self, directory: str | Path) -> None:
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)

    def _path(self, key: str) -> Path:
        return self.directory / f"{key}.json"

    def get(self, key: str) -> str | None:
        path = self._path(key)
        try:
            payload = json.loads(path.read_text(encoding="utf-8"))
        except FileNotFoundError:
            return None
        except (OSError, json.JSONDecodeError) as exc:
            logger.warning("Ignoring unreadable cache entry %s: %s", path.name, exc)
            return None
        return payload.get("raw_response")

    def put(self, key: str, raw_response: str, **meta: str) -> None:
        payload = json.dumps({"key": key, "raw_response": raw_response, **meta}, sort_keys=True)
        fd, tmp_name = tempfile.mkstemp(prefix=f".{key}.", dir=self.directory)
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as handle:
                handle.write(payload)
            os.replace(tmp_name, self._path(key))
        except BaseException:
            Path(tmp_name).unlink(missing_ok=True)
            raise


class TranscriptRecord(BaseModel):
    """One recorded exchange, one JSON line in a transcript file."""

    tweet_id: str | None = None
    prompt_hash: str
    model: str
    raw_response: str
    labels: list[LabelId]
    started_at: datetime
    finished_at: datetime
    attempt_count: int
    cache_hit: bool
    source: str


class TranscriptWriter:
    """Appends records as they complete so an aborted run can resume."""

    def __init__(self, path: str | Path) -> None:
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)

    def append(self, record: TranscriptRecord) -> None:
        with self.path.open("a", encoding="utf-8") as handle:
            handle.write(record.model_dump_json() + "\n")
            handle.flush()


def load_transcript(path: str | Path) -> list[TranscriptRecord]:
    """Read a transcript; a torn final line (crash mid-write) is skipped."""

    path = Path(path)
    if not path.exists():
        return []
    records: list[TranscriptRecord] = []
    for number, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        try:
            records.append(TranscriptRecord.model_validate_json(line))
        except ValidationError as exc:
            logger.warning("Skipping unreadable transcript line %d in %s: %s", number, path, exc)
    return records


class TranscriptReplay:
    """Serves recorded replies by prompt hash (and completed rows by tweet id)."""

    def __init__(self, records: Iterable[TranscriptRecord]) -> None:
        self.by_prompt: dict[str, TranscriptRecord] = {}
        self.by_tweet: dict[str, TranscriptRecord] = {}
        for record in records:
            self.by_prompt[record.prompt_hash] = record
            if record.tweet_id is not None:
                self.by_tweet[record.tweet_id] = record

    @classmethod
    def from_file(cls, path: str | Path) -> "TranscriptReplay":
        return cls(load_transcript(path))

    def lookup(self, prompt_hash: str) -> TranscriptRecord | None:
        return self.by_prompt.get(prompt_hash)

    def completed(self, tweet_id: str, prompt_hash: str) -> TranscriptRecord | None:
        record = self.by_tweet.get(tweet_id)
        if record is not None and record.prompt_hash == prompt_hash:
            return record
        return None

    def __len__(self) -> int:
        return len(self.by_prompt)


__all__ = ["ResponseCache", "TranscriptRecord", "TranscriptReplay", "TranscriptWriter", "load_transcript"]
