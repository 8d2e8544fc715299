from __future__ import annotations

from pydantic import BaseModel, ConfigDict, field_validator

from vaxkit.taxonomy import LabelSet


class CorpusSettings(BaseModel):
    """Layout of tweet CSV files."""

    delimiter: str = " "
    id_column: str = "id"
    text_column: str = "tweet"
    label_column: str = "labels"
    has_header: bool = True

    @field_validator("delimiter")
    @classmethod
    def _delimiter_not_empty(cls, value: str) -> str:
        if not value:
            raise ValueError("delimiter must be a non-empty separator")
        return value


class TweetRecord(BaseModel):
    """One corpus row: tweet id, body and (optionally) gold labels."""

    model_config = ConfigDict(frozen=True)

    id: str
    text: str
    gold: LabelSet | None = None

    @field_validator("id")
    @classmethod
    def _id_not_blank(cls, value: str) -> str:
        if not value.strip():
            raise ValueError("id must not be empty")
        return value

    @field_validator("text")
    @classmethod
    def _text_not_blank(cls, value: str) -> str:
        value = value.strip()
        if not value:
            raise ValueError("tweet text must not be empty")
        return value


__all__ = ["CorpusSettings", "TweetRecord"]
