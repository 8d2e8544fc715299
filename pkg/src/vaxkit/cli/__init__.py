"""Command-line entry point: ``vaxkit {train,predict,zeroshot,evaluate,summarize}``."""

from .main import build_parser, main, run
from .manifest import RunManifest, manifest_path_for, read_manifest

__all__ = ["RunManifest", "build_parser", "main", "manifest_path_for", "read_manifest", "run"]
