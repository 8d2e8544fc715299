from __future__ import annotations

from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Literal

from pydantic import BaseModel, Field

from vaxkit import __version__

Subcommand = Literal["train", "predict", "zeroshot", "evaluate", "summarize"]


class RunManifest(BaseModel):
    """Audit record written beside the primary output of every run."""

    subcommand: Subcommand
    run_id: str
    status: Literal["running", "succeeded", "failed"] = "running"
    config: dict[str, Any] = Field(default_factory=dict)
    inputs: dict[str, str] = Field(default_factory=dict)
    outputs: dict[str, str] = Field(default_factory=dict)
    seed: int | None = None
    started_at: datetime = Field(default_factory=lambda: datetime.now(timezone.utc))
    finished_at: datetime | None = None
    version: str = __version__
    exit_code: int | None = None
    error_family: str | None = None
    error_message: str | None = None
    details: dict[str, Any] = Field(default_factory=dict)

    def finish(self, *, exit_code: int, error: BaseException | None = None) -> "RunManifest":
        self.finished_at = datetime.now(timezone.utc)
        self.exit_code = exit_code
        self.status = "succeeded" if exit_code == 0 else "failed"
        if error is not None:
            self.error_family = getattr(error, "family", "internal")
            self.error_message = str(error)
        return self


def manifest_path_for(primary_output: str | Path) -> Path:
    """``runs/gpt.csv`` -> ``runs/gpt.manifest.json``."""

    path = Path(primary_output)
    return path.with_name(f"{path.stem}.manifest.json")


def write_manifest(manifest: RunManifest, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(manifest.model_dump_json(indent=2) + "\n", encoding="utf-8")
    return path


def read_manifest(path: str | Path) -> RunManifest:
    return RunManifest.model_validate_json(Path(path).read_text(encoding="utf-8"))


__all__ = ["RunManifest", "Subcommand", "manifest_path_for", "read_manifest", "write_manifest"]
