"""Text and JSON renderings of evaluation reports."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Sequence

from vaxkit.metrics.evaluation import EvaluationReport
from vaxkit.taxonomy import CANONICAL_LABELS


def _table(header: Sequence[str], rows: Sequence[Sequence[str]]) -> str:
    widths = [max(len(header[i]), *(len(row[i]) for row in rows)) if rows else len(header[i]) for i in range(len(header))]
    lines = ["  ".join(cell.ljust(width) for cell, width in zip(header, widths)).rstrip()]
    lines.append("  ".join("-" * width for width in widths))
    lines.extend("  ".join(cell.ljust(width) for cell, width in zip(row, widths)).rstrip() for row in rows)
    return "\n".join(lines)


def render_report(report: EvaluationReport, method: str) -> str:
    """Headline row (method, Macro-F1, Jaccard) followed by the per-label table."""

    headline = _table(["Method", "Macro-F1", "Jaccard"], [[method, f"{report.macro_f1:.2f}", f"{report.jaccard:.2f}"]])
    label_rows = [
        [
            label.value,
            f"{report.per_label[label].precision:.2f}",
            f"{report.per_label[label].recall:.2f}",
            f"{report.per_label[label].f1:.2f}",
            str(report.per_label[label].support),
        ]
        for label in CANONICAL_LABELS
    ]
    per_label = _table(["Label", "Precision", "Recall", "F1", "Support"], label_rows)
    return f"{headline}\n\n{per_label}\n\n{report.pair_count} pairs"


def rank_reports(rows: Sequence[tuple[str, EvaluationReport]]) -> list[tuple[int, str, EvaluationReport]]:
    """Order by Macro-F1, ties broken by Jaccard, then by method name."""

    ordered = sorted(rows, key=lambda row: (-row[1].macro_f1, -row[1].jaccard, row[0]))
    return [(rank, method, report) for rank, (method, report) in enumerate(ordered, start=1)]


def render_comparison(rows: Sequence[tuple[str, EvaluationReport]]) -> str:
    body = [
        [method, f"{report.macro_f1:.2f}", f"{report.jaccard:.2f}", str(rank)]
        for rank, method, report in rank_reports(rows)
    ]
    return _table(["Method", "Macro-F1", "Jaccard", "Rank"], body)


def write_report_json(rows: Sequence[tuple[str, EvaluationReport]], path: str | Path) -> Path:
    """Structured report: per run, its rank and one record per metric and per label."""

    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = {
        "runs": [
            {"method": method, "rank": rank, "records": report.to_records()}
            for rank, method, report in rank_reports(rows)
        ]
    }
    path.write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
    return path


__all__ = ["rank_reports", "render_comparison", "render_report", "write_report_json"]
