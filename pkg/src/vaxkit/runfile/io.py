"""Run files: one ``id,labels`` row per classified tweet."""

from __future__ import annotations

import csv
import logging
import re
from collections import Counter
from pathlib import Path

import pandas as pd
from pydantic import BaseModel, Field

from vaxkit.errors import DuplicateId, EmptyLabelString, FileUnreadable, InvariantViolation, IoFailure, MalformedRow, UnknownLabel
from vaxkit.taxonomy import DEFAULT_DELIMITER, LabelSet, format_label_set, parse_label_string

logger = logging.getLogger(__name__)

RUN_COLUMNS = ["id", "labels"]
_PARSER_LINE = re.compile(r"line (\d+)")


class RunFile(BaseModel):
    """Predictions of one method, in submission order."""

    method_tag: str
    rows: list[tuple[str, LabelSet]] = Field(default_factory=list)

    def check(self) -> None:
        """Raise ``InvariantViolation`` for duplicate ids or empty label sets."""

        counts = Counter(row_id for row_id, _ in self.rows)
        duplicated = sorted(row_id for row_id, n in counts.items() if n > 1)
        if duplicated:
            raise InvariantViolation(duplicated, "duplicate run-file ids")
        empty = [row_id for row_id, labels in self.rows if not labels]
        if empty:
            raise InvariantViolation(empty, "empty label sets")

    @property
    def ids(self) -> list[str]:
        return [row_id for row_id, _ in self.rows]


def write_run(run: RunFile, path: str | Path, *, delimiter: str = DEFAULT_DELIMITER) -> Path:
    run.check()
    path = Path(path)
    frame = pd.DataFrame(
        [(row_id, format_label_set(labels, delimiter)) for row_id, labels in run.rows],
        columns=RUN_COLUMNS,
    )
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        frame.to_csv(path, index=False, lineterminator="\n", quoting=csv.QUOTE_MINIMAL)
    except OSError as exc:
        raise IoFailure(f"cannot write run file {path}: {exc}") from exc
    logger.debug("Wrote %d rows to %s", len(run.rows), path)
    return path


def read_run(path: str | Path, method_tag: str | None = None, *, delimiter: str = DEFAULT_DELIMITER) -> RunFile:
    path = Path(path)
    if not path.is_file():
        raise FileUnreadable(path, "no such file")
    try:
        frame = pd.read_csv(path, header=None, dtype=str, keep_default_na=False, on_bad_lines="error")
    except pd.errors.EmptyDataError as exc:
        raise MalformedRow(1, "missing header id,labels") from exc
    except pd.errors.ParserError as exc:
        match = _PARSER_LINE.search(str(exc))
        raise MalformedRow(int(match.group(1)) if match else None, "expected 2 columns") from exc
    except (OSError, UnicodeDecodeError) as exc:
        raise FileUnreadable(path, str(exc)) from exc
    header = [str(name) for name in frame.iloc[0]]
    if header != RUN_COLUMNS:
        raise MalformedRow(1, f"expected header id,labels, got {','.join(header)}")
    frame = frame.iloc[1:]

    rows: list[tuple[str, LabelSet]] = []
    seen: set[str] = set()
    for offset, (row_id, raw_labels) in enumerate(frame.itertuples(index=False, name=None)):
        line = offset + 2
        if not isinstance(row_id, str) or not isinstance(raw_labels, str):
            raise MalformedRow(line, "expected 2 columns")
        if not row_id:
            raise MalformedRow(line, "empty id")
        try:
            labels = parse_label_string(raw_labels, delimiter)
        except (UnknownLabel, EmptyLabelString) as exc:
            raise exc.at_line(line) from None
        if row_id in seen:
            raise DuplicateId(row_id)
        seen.add(row_id)
        rows.append((row_id, labels))
    return RunFile(method_tag=method_tag or path.stem, rows=rows)


__all__ = ["RUN_COLUMNS", "RunFile", "read_run", "write_run"]
