from __future__ import annotations

import argparse
import logging
import sys
import uuid
from typing import Any, Sequence

from vaxkit import __version__
from vaxkit.cli.commands import COMMANDS, RunContext, primary_output
from vaxkit.cli.manifest import RunManifest, manifest_path_for, write_manifest
from vaxkit.config import load_settings
from vaxkit.errors import ConfigurationError, VaxkitError
from vaxkit.observability import configure_logging, log_with_correlation
from vaxkit.zeroshot import LLMClientFactory

logger = logging.getLogger("vaxkit.cli")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=None, help="YAML config file (below env and flags in precedence).")
    common.add_argument("--log-level", default=None, help="Logging level (default INFO).")
    common.add_argument("--delimiter", default=None, help="Separator between labels inside the labels column.")
    common.add_argument("--seed", type=int, default=None, help="Random seed for training.")
    common.add_argument("--out", default=None, help="Primary output path; the manifest is written beside it.")

    parser = argparse.ArgumentParser(
        prog="vaxkit",
        description="Multi-label vaccine-concern classification of tweets.",
    )
    parser.add_argument("--version", action="version", version=f"vaxkit {__version__}")
    subparsers = parser.add_subparsers(dest="command", required=True)

    train = subparsers.add_parser("train", parents=[common], help="Fine-tune an encoder + dense head; writes a checkpoint.")
    train.add_argument("--train", required=True, help="Training CSV (id, tweet, labels).")
    train.add_argument("--backend", default=None, help="Encoder: 'hashing' or a transformers checkpoint name.")
    train.add_argument("--epochs", type=int, default=None)
    train.add_argument("--batch-size", type=int, default=None)
    train.add_argument("--lr", type=float, default=None, help="Adam learning rate.")
    train.add_argument("--threshold", type=float, default=None, help="Decision threshold stored in the checkpoint.")
    train.add_argument(
        "--freeze-encoder",
        action=argparse.BooleanOptionalAction,
        default=None,
        help="Train only the dense head on fixed embeddings.",
    )

    predict = subparsers.add_parser("predict", parents=[common], help="Label a CSV with a trained checkpoint.")
    predict.add_argument("--test", required=True, help="CSV to label (gold labels optional).")
    predict.add_argument("--checkpoint", required=True)
    predict.add_argument("--threshold", type=float, default=None, help="Override the checkpoint's threshold.")
    predict.add_argument("--method-tag", default=None)
    predict.add_argument("--probabilities-out", default=None, help="Also write the n x 12 probability matrix as CSV.")

    zeroshot = subparsers.add_parser("zeroshot", parents=[common], help="Label a CSV by prompting a chat model.")
    zeroshot.add_argument("--test", required=True)
    zeroshot.add_argument("--endpoint", default=None, help="Base URL of a chat-completions compatible endpoint.")
    zeroshot.add_argument("--model", default=None)
    zeroshot.add_argument("--replay", default=None, help="Answer from a recorded transcript instead of the endpoint.")
    zeroshot.add_argument("--cache-dir", default=None)
    zeroshot.add_argument("--transcript", default=None, help="Transcript path (default: <out stem>.transcript.jsonl).")
    zeroshot.add_argument("--resume", action="store_true", help="Skip tweets already answered in the transcript.")
    zeroshot.add_argument("--concurrency", type=int, default=None)
    zeroshot.add_argument("--template", default=None, help="Prompt template name or path.")
    zeroshot.add_argument("--strict-parsing", action=argparse.BooleanOptionalAction, default=None)
    zeroshot.add_argument("--method-tag", default=None)

    evaluate = subparsers.add_parser("evaluate", parents=[common], help="Score run files against gold labels.")
    evaluate.add_argument("--test", required=True, help="Gold CSV.")
    evaluate.add_argument("--run", action="append", required=True, help="Run file, optionally NAME=PATH; repeatable.")
    evaluate.add_argument("--absent-labels", choices=["zero", "skip"], default=None)
    evaluate.add_argument("--jaccard", choices=["samples", "labels"], default=None)

    summarize = subparsers.add_parser("summarize", parents=[common], help="Label counts of a gold CSV.")
    source = summarize.add_mutually_exclusive_group(required=True)
    source.add_argument("--train", default=None)
    source.add_argument("--test", default=None)

    return parser


def _flag_overrides(args: argparse.Namespace) -> dict[str, Any]:
    """Map parsed flags onto dotted settings keys; unset flags are ``None``."""

    get = lambda name: getattr(args, name, None)  # noqa: E731
    return {
        "log_level": get("log_level"),
        "backend": get("backend"),
        "corpus.delimiter": get("delimiter"),
        "training.seed": get("seed"),
        "training.epochs": get("epochs"),
        "training.batch_size": get("batch_size"),
        "training.learning_rate": get("lr"),
        "training.threshold": get("threshold") if args.command == "train" else None,
        "training.freeze_encoder": get("freeze_encoder"),
        "endpoint.base_url": get("endpoint"),
        "endpoint.model": get("model"),
        "endpoint.cache_dir": get("cache_dir"),
        "endpoint.concurrency": get("concurrency"),
        "endpoint.template": get("template"),
        "endpoint.strict_parsing": get("strict_parsing"),
        "metrics.absent_label_policy": get("absent_labels"),
        "metrics.jaccard_variant": get("jaccard"),
    }


def run(argv: Sequence[str] | None = None, *, client_factory: LLMClientFactory | None = None) -> int:
    """Execute one subcommand and return its exit code."""

    args = build_parser().parse_args(argv)
    run_id = uuid.uuid4().hex[:12]
    manifest = RunManifest(subcommand=args.command, run_id=run_id)
    manifest_path = None
    ctx: RunContext | None = None
    error: BaseException | None = None
    exit_code = 0
    try:
        manifest_path = manifest_path_for(primary_output(args))
        settings = load_settings(args.config, flags=_flag_overrides(args))
        configure_logging(settings.log_level)
        manifest.config = settings.snapshot()
        manifest.seed = settings.training.seed
        ctx = RunContext(args=args, settings=settings, run_id=run_id, client_factory=client_factory or LLMClientFactory())
        COMMANDS[args.command](ctx)
    except VaxkitError as exc:
        error, exit_code = exc, exc.exit_code
    except ValueError as exc:
        # pydantic and threshold checks surfacing from user input
        error, exit_code = ConfigurationError(str(exc)), ConfigurationError.exit_code
    except Exception as exc:  # noqa: BLE001
        logger.exception("Unexpected failure")
        error, exit_code = exc, 1

    if ctx is not None:
        if error is not None:
            ctx.discard_partial_outputs()
        manifest.inputs = dict(ctx.inputs)
        manifest.outputs = {name: str(path) for name, path in ctx.outputs.items() if path.exists()}
        manifest.details = ctx.details
    manifest.finish(exit_code=exit_code, error=error)
    if error is not None:
        log_with_correlation(logger, logging.ERROR, f"{args.command} failed ({getattr(error, 'family', 'internal')}): {error}", run_id=run_id)
        print(f"error: {error}", file=sys.stderr)
    if manifest_path is not None:
        write_manifest(manifest, manifest_path)
    return exit_code


def main(argv: Sequence[str] | None = None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
