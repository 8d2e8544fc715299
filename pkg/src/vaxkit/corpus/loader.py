"""Reading and writing tweet corpora stored as CSV."""

from __future__ import annotations

import csv
import logging
import re
from pathlib import Path
from typing import Iterable, Sequence

import pandas as pd
from pydantic import ValidationError

from vaxkit.corpus.records import CorpusSettings, TweetRecord
from vaxkit.errors import DuplicateId, EmptyLabelString, FileUnreadable, MalformedRow, UnknownLabel
from vaxkit.taxonomy import format_label_set, parse_label_string

logger = logging.getLogger(__name__)

_PARSER_LINE = re.compile(r"line (\d+)")


def _read_frame(path: Path, settings: CorpusSettings, columns: list[str]) -> pd.DataFrame:
    """Read all lines as data: the first line fixes the field count, longer rows are parser errors."""

    if not path.is_file():
        raise FileUnreadable(path, "no such file")
    try:
        frame = pd.read_csv(
            path,
            header=None,
            dtype=str,
            keep_default_na=False,
            skip_blank_lines=True,
            on_bad_lines="error",
            quoting=csv.QUOTE_MINIMAL,
        )
    except pd.errors.EmptyDataError:
        return pd.DataFrame(columns=columns)
    except pd.errors.ParserError as exc:
        match = _PARSER_LINE.search(str(exc))
        line = int(match.group(1)) if match else None
        raise MalformedRow(line, "wrong number of columns") from exc
    except (OSError, UnicodeDecodeError) as exc:
        raise FileUnreadable(path, str(exc)) from exc

    if settings.has_header:
        header = [str(name) for name in frame.iloc[0]]
        frame = frame.iloc[1:].reset_index(drop=True)
        frame.columns = header
        return frame
    width = frame.shape[1]
    if not 2 <= width <= len(columns):
        raise MalformedRow(1, f"expected {len(columns)} columns, got {width}")
    frame.columns = columns[:width]
    return frame


def load_csv(
    path: str | Path,
    has_gold: bool = True,
    delimiter: str | None = None,
    *,
    settings: CorpusSettings | None = None,
) -> list[TweetRecord]:
    """Load a tweet CSV into records, preserving file order.

    Line numbers in errors count the header as line 1; a record spanning
    several physical lines (a tweet with embedded newlines) counts as one.
    """

    settings = settings or CorpusSettings()
    delimiter = delimiter or settings.delimiter
    path = Path(path)
    columns = [settings.id_column, settings.text_column]
    if has_gold or not settings.has_header:
        columns.append(settings.label_column)

    frame = _read_frame(path, settings, columns)
    required = columns if has_gold else columns[:2]
    absent = [name for name in required if name not in frame.columns]
    if absent:
        raise MalformedRow(1, f"missing column(s) {', '.join(absent)}")

    first_line = 2 if settings.has_header else 1
    records: list[TweetRecord] = []
    seen: set[str] = set()
    for offset, row in enumerate(frame[required].itertuples(index=False, name=None)):
        line = first_line + offset
        if any(pd.isna(value) for value in row):
            raise MalformedRow(line, f"expected {len(required)} columns")
        record_id, text = row[0], row[1]
        gold = None
        if has_gold:
            try:
                gold = parse_label_string(row[2], delimiter)
            except (UnknownLabel, EmptyLabelString) as exc:
                raise exc.at_line(line) from None
        try:
            record = TweetRecord(id=record_id, text=text, gold=gold)
        except ValidationError as exc:
            reason = "; ".join(error["msg"] for error in exc.errors())
            raise MalformedRow(line, reason) from None
        if record.id in seen:
            raise DuplicateId(record.id)
        seen.add(record.id)
        records.append(record)

    logger.debug("Loaded %d records from %s", len(records), path)
    return records


def write_csv(
    records: Iterable[TweetRecord],
    path: str | Path,
    *,
    settings: CorpusSettings | None = None,
) -> Path:
    """Write records in the layout :func:`load_csv` reads back."""

    settings = settings or CorpusSettings()
    path = Path(path)
    rows: Sequence[tuple[str, str, str]] = [
        (
            record.id,
            record.text,
            format_label_set(record.gold, settings.delimiter) if record.gold is not None else "",
        )
        for record in records
    ]
    frame = pd.DataFrame(rows, columns=[settings.id_column, settings.text_column, settings.label_column])
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False, header=settings.has_header, lineterminator="\n", quoting=csv.QUOTE_MINIMAL)
    return path


__all__ = ["load_csv", "write_csv"]
