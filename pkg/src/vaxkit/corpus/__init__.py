from .loader import load_csv, write_csv
from .records import CorpusSettings, TweetRecord
from .summary import CorpusSummary, render_summary, summarize

__all__ = [
    "CorpusSettings",
    "CorpusSummary",
    "TweetRecord",
    "load_csv",
    "render_summary",
    "summarize",
    "write_csv",
]
