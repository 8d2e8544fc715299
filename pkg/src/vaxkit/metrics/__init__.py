from .evaluation import (
    Confusion,
    EvaluationReport,
    LabelScores,
    MetricsSettings,
    PredictionPair,
    evaluate,
    jaccard_similarity,
    macro_f1,
    pair_predictions,
    per_label_confusion,
    per_label_scores,
)
from .report import rank_reports, render_comparison, render_report, write_report_json

__all__ = [
    "Confusion",
    "EvaluationReport",
    "LabelScores",
    "MetricsSettings",
    "PredictionPair",
    "evaluate",
    "jaccard_similarity",
    "macro_f1",
    "pair_predictions",
    "per_label_confusion",
    "per_label_scores",
    "rank_reports",
    "render_comparison",
    "render_report",
    "write_report_json",
]
