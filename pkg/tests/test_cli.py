from __future__ import annotations

import json
from pathlib import Path

import pytest

from utils import RecordingFactory, ScriptedChatClient, auth_error, keyword_responder, separable_records
from vaxkit.cli import read_manifest, run
from vaxkit.corpus import TweetRecord, write_csv
from vaxkit.runfile import RunFile, read_run, write_run
from vaxkit.taxonomy import LabelId
from vaxkit.zeroshot import load_transcript


@pytest.fixture
def corpus(tmp_path: Path) -> Path:
    return write_csv(separable_records(), tmp_path / "train.csv")


@pytest.fixture
def checkpoint(tmp_path: Path, corpus: Path) -> Path:
    out = tmp_path / "model.vxkt"
    assert run(["train", "--train", str(corpus), "--backend", "hashing", "--epochs", "3", "--lr", "0.01", "--out", str(out)]) == 0
    return out


def test_train_writes_checkpoint_and_manifest(tmp_path: Path, checkpoint: Path, capsys) -> None:
    assert checkpoint.exists()
    manifest = read_manifest(tmp_path / "model.manifest.json")
    assert manifest.status == "succeeded"
    assert manifest.subcommand == "train"
    assert manifest.exit_code == 0
    assert len(manifest.details["training_log"]) == 3
    assert manifest.config["training"]["epochs"] == 3
    assert manifest.outputs["checkpoint"] == str(checkpoint)
    assert "mean_loss" in capsys.readouterr().out


def test_train_records_freeze_mode(tmp_path: Path, corpus: Path) -> None:
    out = tmp_path / "frozen.vxkt"
    code = run(["train", "--train", str(corpus), "--epochs", "2", "--freeze-encoder", "--out", str(out)])
    assert code == 0
    manifest = read_manifest(tmp_path / "frozen.manifest.json")
    assert manifest.details["freeze_encoder"] is True
    assert manifest.config["training"]["freeze_encoder"] is True


def test_train_missing_csv_fails_with_data_exit_code(tmp_path: Path) -> None:
    out = tmp_path / "never.vxkt"
    code = run(["train", "--train", str(tmp_path / "absent.csv"), "--epochs", "1", "--out", str(out)])
    assert code == 11
    assert not out.exists()
    manifest = read_manifest(tmp_path / "never.manifest.json")
    assert manifest.status == "failed"
    assert manifest.error_family == "data"


def test_invalid_flag_value_is_a_configuration_error(tmp_path: Path, corpus: Path) -> None:
    code = run(["train", "--train", str(corpus), "--epochs", "0", "--out", str(tmp_path / "m.vxkt")])
    assert code == 3
    assert read_manifest(tmp_path / "m.manifest.json").error_family == "configuration"


def test_predict_is_repeatable(tmp_path: Path, checkpoint: Path) -> None:
    test_csv = write_csv(separable_records()[:5], tmp_path / "test.csv")
    first, second = tmp_path / "a.csv", tmp_path / "b.csv"
    probabilities = tmp_path / "probs.csv"
    for out in (first, second):
        args = ["predict", "--test", str(test_csv), "--checkpoint", str(checkpoint), "--out", str(out)]
        assert run([*args, "--probabilities-out", str(probabilities)]) == 0
    assert first.read_bytes() == second.read_bytes()
    assert len(read_run(first).rows) == 5
    assert [row_id for row_id, _ in read_run(first).rows] == [f"t{index:02d}" for index in range(5)]

    lines = probabilities.read_text(encoding="utf-8").splitlines()
    assert lines[0].split(",")[:3] == ["id", "unnecessary", "mandatory"]
    assert len(lines) == 6
    assert read_manifest(tmp_path / "a.manifest.json").outputs["probabilities"] == str(probabilities)


def test_predict_high_threshold_falls_back_to_none(tmp_path: Path, checkpoint: Path) -> None:
    test_csv = write_csv(separable_records()[:5], tmp_path / "test.csv")
    out = tmp_path / "strict.csv"
    assert run(["predict", "--test", str(test_csv), "--checkpoint", str(checkpoint), "--threshold", "0.99", "--out", str(out)]) == 0
    assert all(labels == {LabelId.NONE} for _, labels in read_run(out).rows)


def test_predict_rejects_corrupt_checkpoint(tmp_path: Path, corpus: Path) -> None:
    bogus = tmp_path / "bogus.vxkt"
    bogus.write_bytes(b"not a checkpoint at all, clearly not one")
    out = tmp_path / "run.csv"
    code = run(["predict", "--test", str(corpus), "--checkpoint", str(bogus), "--out", str(out)])
    assert code == 13
    assert not out.exists()
    assert read_manifest(tmp_path / "run.manifest.json").error_family == "checkpoint"


def _gold_csv(tmp_path: Path) -> tuple[Path, list[TweetRecord]]:
    records = [
        TweetRecord(id="1", text="big pharma profit", gold=frozenset({LabelId.PHARMA})),
        TweetRecord(id="2", text="rushed trials, side-effect fears", gold=frozenset({LabelId.RUSHED, LabelId.SIDE_EFFECT})),
        TweetRecord(id="3", text="just no", gold=frozenset({LabelId.NONE})),
        TweetRecord(id="4", text="a political stunt", gold=frozenset({LabelId.POLITICAL})),
        TweetRecord(id="5", text="god decides", gold=frozenset({LabelId.RELIGIOUS})),
    ]
    return write_csv(records, tmp_path / "gold.csv"), records


def test_evaluate_perfect_run(tmp_path: Path, capsys) -> None:
    gold_csv, records = _gold_csv(tmp_path)
    run_path = write_run(RunFile(method_tag="oracle", rows=[(r.id, r.gold) for r in records]), tmp_path / "oracle.csv")
    out = tmp_path / "report.json"
    assert run(["evaluate", "--test", str(gold_csv), "--run", str(run_path), "--out", str(out)]) == 0
    printed = capsys.readouterr().out
    assert "oracle" in printed
    assert "1.00" in printed
    payload = json.loads(out.read_text(encoding="utf-8"))
    assert payload["runs"][0]["records"][1]["value"] == 1.0
    assert read_manifest(tmp_path / "report.manifest.json").details["scores"]["oracle"]["jaccard"] == 1.0


def test_evaluate_ranks_several_runs(tmp_path: Path, capsys) -> None:
    gold_csv, records = _gold_csv(tmp_path)
    perfect = write_run(RunFile(method_tag="p", rows=[(r.id, r.gold) for r in records]), tmp_path / "perfect.csv")
    lazy = write_run(RunFile(method_tag="l", rows=[(r.id, frozenset({LabelId.NONE})) for r in records]), tmp_path / "lazy.csv")
    code = run(["evaluate", "--test", str(gold_csv), "--run", f"lazy={lazy}", "--run", f"fine-tuned={perfect}"])
    assert code == 0
    printed = capsys.readouterr().out
    ranking = printed.strip().splitlines()[-2:]
    assert ranking[0].startswith("fine-tuned")
    assert ranking[1].startswith("lazy")
    assert (tmp_path / "lazy.report.json").exists()
    assert (tmp_path / "lazy.report.manifest.json").exists()


def test_evaluate_missing_id(tmp_path: Path, capsys) -> None:
    gold_csv, records = _gold_csv(tmp_path)
    run_path = write_run(RunFile(method_tag="m", rows=[(r.id, r.gold) for r in records[:-1]]), tmp_path / "short.csv")
    out = tmp_path / "report.json"
    code = run(["evaluate", "--test", str(gold_csv), "--run", str(run_path), "--out", str(out)])
    assert code == 11
    assert "missing ids: 5" in capsys.readouterr().err
    assert not out.exists()


def test_zeroshot_stub_pipeline(tmp_path: Path) -> None:
    gold_csv, _ = _gold_csv(tmp_path)
    client = ScriptedChatClient(responder=lambda request: "none")
    out = tmp_path / "gpt.csv"
    assert run(["zeroshot", "--test", str(gold_csv), "--out", str(out)], client_factory=RecordingFactory(client)) == 0
    assert [labels for _, labels in read_run(out).rows] == [frozenset({LabelId.NONE})] * 5
    assert client.calls == 5
    assert len(load_transcript(tmp_path / "gpt.transcript.jsonl")) == 5
    manifest = read_manifest(tmp_path / "gpt.manifest.json")
    assert manifest.details["metrics"]["endpoint.calls"] == 5
    assert manifest.details["sources"]["endpoint"] == 5


def test_zeroshot_replay_is_byte_identical_and_offline(tmp_path: Path) -> None:
    records = [
        TweetRecord(id=f"s{index:02d}", text=f"{topic} number {index}")
        for index, topic in enumerate(["pharma greed", "rushed shots", "side-effect stories", "religious reasons", "meh"] * 10)
    ]
    test_csv = write_csv(records, tmp_path / "synthetic.csv")
    client = ScriptedChatClient(responder=keyword_responder)
    factory = RecordingFactory(client)
    recorded = tmp_path / "recorded.csv"
    assert run(["zeroshot", "--test", str(test_csv), "--model", "stub-model", "--out", str(recorded)], client_factory=factory) == 0
    assert client.calls == 50

    transcript = tmp_path / "recorded.transcript.jsonl"
    replayed = tmp_path / "replayed.csv"
    args = ["zeroshot", "--test", str(test_csv), "--model", "stub-model", "--replay", str(transcript), "--out", str(replayed)]
    assert run(args, client_factory=factory) == 0
    assert client.calls == 50
    assert len(factory.policies) == 1
    assert replayed.read_bytes() == recorded.read_bytes()
    assert read_manifest(tmp_path / "replayed.manifest.json").details["metrics"]["replay.hits"] == 50


def test_zeroshot_resume_after_crash(tmp_path: Path) -> None:
    gold_csv, _ = _gold_csv(tmp_path)
    out = tmp_path / "gpt.csv"
    crashing = ScriptedChatClient(["pharma", "rushed, side-effect", "none", auth_error(), auth_error()])
    args = ["zeroshot", "--test", str(gold_csv), "--concurrency", "1", "--out", str(out)]
    assert run(args, client_factory=RecordingFactory(crashing)) == 14
    assert not out.exists()
    transcript = tmp_path / "gpt.transcript.jsonl"
    assert [record.tweet_id for record in load_transcript(transcript)] == ["1", "2", "3"]
    assert read_manifest(tmp_path / "gpt.manifest.json").status == "failed"

    fresh = ScriptedChatClient(responder=keyword_responder)
    assert run([*args, "--resume"], client_factory=RecordingFactory(fresh)) == 0
    assert fresh.calls == 2
    rows = dict(read_run(out).rows)
    assert rows["2"] == {LabelId.RUSHED, LabelId.SIDE_EFFECT}
    assert rows["4"] == {LabelId.POLITICAL}
    assert rows["5"] == {LabelId.NONE}


def test_zeroshot_without_key_is_an_auth_failure(tmp_path: Path) -> None:
    gold_csv, _ = _gold_csv(tmp_path)
    out = tmp_path / "gpt.csv"
    assert run(["zeroshot", "--test", str(gold_csv), "--out", str(out)]) == 14
    assert read_manifest(tmp_path / "gpt.manifest.json").error_family == "endpoint"


def test_summarize(tmp_path: Path, capsys) -> None:
    gold_csv, _ = _gold_csv(tmp_path)
    assert run(["summarize", "--test", str(gold_csv)]) == 0
    assert "side-effect" in capsys.readouterr().out
    summary = json.loads((tmp_path / "gold.summary.json").read_text(encoding="utf-8"))
    assert summary["record_count"] == 5
    assert summary["per_label_counts"]["rushed"] == 1
    assert (tmp_path / "gold.summary.manifest.json").exists()
