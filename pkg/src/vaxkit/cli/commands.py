"""Subcommand bodies. Each reads its inputs, writes its outputs and fills in
the run context; error handling and the manifest live in :mod:`vaxkit.cli.main`.
"""

from __future__ import annotations

import argparse
import asyncio
import csv
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import pandas as pd

from vaxkit.config import VaxkitSettings
from vaxkit.corpus import load_csv, render_summary, summarize
from vaxkit.errors import ConfigurationError
from vaxkit.finetune import VaccineConcernClassifier, labels_from_probabilities, load_state, resolve_backend_spec, save_state, train
from vaxkit.metrics import evaluate, pair_predictions, render_comparison, render_report, write_report_json
from vaxkit.observability import MetricsReporter, log_with_correlation
from vaxkit.runfile import RunFile, read_run, write_run
from vaxkit.taxonomy import CANONICAL_LABELS, load_label_metadata
from vaxkit.zeroshot import LLMClientFactory, TranscriptReplay, TranscriptWriter, ZeroShotClassifier, classify_many

logger = logging.getLogger(__name__)


@dataclass
class RunContext:
    args: argparse.Namespace
    settings: VaxkitSettings
    run_id: str
    client_factory: LLMClientFactory = field(default_factory=LLMClientFactory)
    inputs: dict[str, str] = field(default_factory=dict)
    outputs: dict[str, Path] = field(default_factory=dict)
    # outputs that survive a failed run (the transcript, for resuming)
    kept_on_failure: set[str] = field(default_factory=set)
    details: dict[str, Any] = field(default_factory=dict)

    def output(self, name: str, path: str | Path, *, keep_on_failure: bool = False) -> Path:
        path = Path(path)
        self.outputs[name] = path
        if keep_on_failure:
            self.kept_on_failure.add(name)
        return path

    def discard_partial_outputs(self) -> None:
        for name, path in self.outputs.items():
            if name not in self.kept_on_failure and path.exists():
                path.unlink()
                logger.info("Removed partial output %s", path)


def sibling(path: Path, suffix: str) -> Path:
    return path.with_name(f"{path.stem}{suffix}")


def primary_output(args: argparse.Namespace) -> Path:
    """Where the run's main artefact (and hence its manifest) goes."""

    if args.out:
        return Path(args.out)
    if args.command == "evaluate":
        _, path = parse_run_spec(args.run[0])
        return sibling(Path(path), ".report.json")
    if args.command == "summarize":
        return sibling(Path(args.train or args.test), ".summary.json")
    raise ConfigurationError(f"{args.command} needs --out")


def parse_run_spec(spec: str) -> tuple[str, str]:
    """``NAME=PATH`` or a bare ``PATH`` (method named after the file stem)."""

    name, sep, path = spec.partition("=")
    if sep and name and path:
        return name, path
    return Path(spec).stem, spec


def cmd_train(ctx: RunContext) -> None:
    args, settings = ctx.args, ctx.settings
    ctx.inputs["train"] = args.train
    out = ctx.output("checkpoint", args.out)

    records = load_csv(args.train, has_gold=True, settings=settings.corpus)
    spec = resolve_backend_spec(settings.backend)
    log_with_correlation(
        logger,
        logging.INFO,
        f"Training on {len(records)} records with backend {spec.model_name} (freeze_encoder={settings.training.freeze_encoder})",
        run_id=ctx.run_id,
    )
    state = train(records, spec, settings.training, run_id=ctx.run_id)
    save_state(state, out)

    print("epoch  mean_loss")
    for epoch, loss in state.training_log:
        print(f"{epoch:>5}  {loss:.6f}")
    ctx.details.update(
        backend=spec.model_dump(),
        freeze_encoder=state.freeze_encoder,
        training_log=[[epoch, loss] for epoch, loss in state.training_log],
    )


def _write_probabilities(path: Path, ids: list[str], probabilities: Any) -> None:
    frame = pd.DataFrame(probabilities, columns=[label.value for label in CANONICAL_LABELS])
    frame.insert(0, "id", ids)
    frame.to_csv(path, index=False, lineterminator="\n", quoting=csv.QUOTE_MINIMAL, float_format="%.8f")


def cmd_predict(ctx: RunContext) -> None:
    args, settings = ctx.args, ctx.settings
    ctx.inputs.update(test=args.test, checkpoint=args.checkpoint)
    out = ctx.output("run", args.out)

    classifier = VaccineConcernClassifier.from_checkpoint(args.checkpoint)
    threshold = args.threshold if args.threshold is not None else classifier.state.threshold
    records = load_csv(args.test, has_gold=False, settings=settings.corpus)
    ids = [record.id for record in records]
    probabilities = classifier.predict_proba([record.text for record in records])
    rows = [(record_id, labels_from_probabilities(row, threshold)) for record_id, row in zip(ids, probabilities)]

    write_run(RunFile(method_tag=args.method_tag or out.stem, rows=rows), out, delimiter=settings.corpus.delimiter)
    if args.probabilities_out:
        _write_probabilities(ctx.output("probabilities", args.probabilities_out), ids, probabilities)
    ctx.details.update(method_tag=args.method_tag or out.stem, threshold=threshold, rows=len(rows))


def cmd_zeroshot(ctx: RunContext) -> None:
    args, settings = ctx.args, ctx.settings
    policy = settings.endpoint
    ctx.inputs["test"] = args.test
    out = ctx.output("run", args.out)
    transcript_path = ctx.output("transcript", args.transcript or sibling(out, ".transcript.jsonl"), keep_on_failure=True)

    replay = None
    client = None
    if args.replay:
        ctx.inputs["replay"] = args.replay
        replay = TranscriptReplay.from_file(args.replay)
    else:
        client = ctx.client_factory.for_policy(policy)

    resume = None
    writer = None
    if replay is None or transcript_path.resolve() != Path(args.replay).resolve():
        if args.resume and transcript_path.exists():
            resume = TranscriptReplay.from_file(transcript_path)
            log_with_correlation(logger, logging.INFO, f"Resuming with {len(resume)} recorded exchanges", run_id=ctx.run_id)
        elif transcript_path.exists():
            transcript_path.unlink()
        writer = TranscriptWriter(transcript_path)

    records = load_csv(args.test, has_gold=False, settings=settings.corpus)
    metrics = MetricsReporter()
    classifier = ZeroShotClassifier(
        client,
        policy=policy,
        metas=load_label_metadata(settings.label_metadata),
        replay=replay,
        transcript=writer,
        metrics=metrics,
        run_id=ctx.run_id,
    )
    try:
        exchanges = asyncio.run(classify_many([(record.id, record.text) for record in records], classifier, resume=resume))
    finally:
        ctx.details["metrics"] = metrics.snapshot()

    method_tag = args.method_tag or out.stem
    write_run(
        RunFile(method_tag=method_tag, rows=[(exchange.tweet_id, exchange.parsed) for exchange in exchanges]),
        out,
        delimiter=settings.corpus.delimiter,
    )
    ctx.details.update(
        method_tag=method_tag,
        model=policy.model,
        template=classifier.template.name,
        rows=len(exchanges),
        sources={source: sum(1 for ex in exchanges if ex.source == source) for source in ("endpoint", "cache", "replay", "transcript")},
    )


def cmd_evaluate(ctx: RunContext) -> None:
    args, settings = ctx.args, ctx.settings
    ctx.inputs["gold"] = args.test
    out = ctx.output("report", primary_output(args))

    gold = {record.id: record.gold for record in load_csv(args.test, has_gold=True, settings=settings.corpus)}
    rows = []
    for spec in args.run:
        name, path = parse_run_spec(spec)
        ctx.inputs[f"run:{name}"] = path
        run = read_run(path, name, delimiter=settings.corpus.delimiter)
        report = evaluate(pair_predictions(run.rows, gold), settings.metrics)
        rows.append((name, report))
        print(render_report(report, name))
        print()
    if len(rows) > 1:
        print(render_comparison(rows))
    write_report_json(rows, out)
    ctx.details["scores"] = {name: {"macro_f1": report.macro_f1, "jaccard": report.jaccard} for name, report in rows}


def cmd_summarize(ctx: RunContext) -> None:
    args, settings = ctx.args, ctx.settings
    source = args.train or args.test
    ctx.inputs["corpus"] = source
    out = ctx.output("summary", primary_output(args))

    summary = summarize(load_csv(source, has_gold=True, settings=settings.corpus))
    print(render_summary(summary))
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(json.dumps(summary.model_dump(mode="json"), indent=2) + "\n", encoding="utf-8")
    ctx.details["record_count"] = summary.record_count


COMMANDS = {
    "train": cmd_train,
    "predict": cmd_predict,
    "zeroshot": cmd_zeroshot,
    "evaluate": cmd_evaluate,
    "summarize": cmd_summarize,
}

__all__ = ["COMMANDS", "RunContext", "parse_run_spec", "primary_output"]
