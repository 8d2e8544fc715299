from .labels import (
    CANONICAL_LABELS,
    DEFAULT_DELIMITER,
    LABEL_INDEX,
    NUM_LABELS,
    LabelId,
    LabelSet,
    canonical_labels,
    format_label_set,
    from_multi_hot,
    label_from_text,
    normalize_prediction,
    parse_label_string,
    sort_labels,
    to_multi_hot,
)
from .metadata import LabelMeta, load_label_metadata

__all__ = [
    "CANONICAL_LABELS",
    "DEFAULT_DELIMITER",
    "LABEL_INDEX",
    "LabelId",
    "LabelMeta",
    "LabelSet",
    "NUM_LABELS",
    "canonical_labels",
    "format_label_set",
    "from_multi_hot",
    "label_from_text",
    "load_label_metadata",
    "normalize_prediction",
    "parse_label_string",
    "sort_labels",
    "to_multi_hot",
]
