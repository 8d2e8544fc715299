from __future__ import annotations

import asyncio
import json
import random
import re
from pathlib import Path
from unittest.mock import patch

import httpx
import pytest
from pydantic import ValidationError

from utils import (
    RecordingFactory,
    ScriptedChatClient,
    auth_error,
    keyword_responder,
    rate_limit_error,
    server_error,
    timeout_error,
    tweet_of,
)
from vaxkit.errors import (
    AuthFailure,
    EndpointError,
    EndpointTimeout,
    EndpointUnavailable,
    RateLimited,
    ReplayMiss,
    RetriesExhausted,
)
from vaxkit.observability import MetricsReporter
from vaxkit.taxonomy import CANONICAL_LABELS, LabelId, load_label_metadata
from vaxkit.zeroshot import (
    DecodingParams,
    EndpointPolicy,
    LLMClientFactory,
    LlmExchange,
    ResponseCache,
    TranscriptReplay,
    TranscriptWriter,
    ZeroShotClassifier,
    build_prompt,
    classify,
    classify_many,
    load_transcript,
    match_labels,
    parse_response,
    translate_openai_error,
)
from vaxkit.zeroshot import parser as parser_module

GOLDEN = Path(__file__).parent / "data" / "golden_prompt.txt"
GOLDEN_TWEET = 'Not taking the jab, too many side effects and it was "rushed".'

FAST = EndpointPolicy(backoff_initial=0, backoff_max=0)


# --- prompts ------------------------------------------------------------------


def test_prompt_is_deterministic() -> None:
    metas = load_label_metadata()
    first = build_prompt("They rushed it.", metas)
    second = build_prompt("They rushed it.", metas)
    assert first == second
    assert first.prompt_hash == second.prompt_hash


def test_prompt_lists_each_label_once_in_order() -> None:
    bundle = build_prompt("anything", load_label_metadata())
    entries = [line[2:].split(":", 1)[0] for line in bundle.system_text.splitlines() if line.startswith("- ")]
    assert entries == [label.value for label in CANONICAL_LABELS]
    assert "(keywords: profit, pfizer" in bundle.system_text


def test_prompt_names_each_label_id_once() -> None:
    bundle = build_prompt("anything", load_label_metadata())
    heads_and_keywords = []
    for line in bundle.system_text.splitlines():
        if line.startswith("- "):
            head = line[2:].split(":", 1)[0]
            keywords = line.rsplit("(keywords: ", 1)[1] if "(keywords: " in line else ""
            heads_and_keywords.append(f"{head} {keywords}")
    text = "\n".join(heads_and_keywords)
    for label in CANONICAL_LABELS:
        whole_word = re.compile(rf"(?<![\w-]){re.escape(label.value)}(?![\w-])", re.IGNORECASE)
        assert len(whole_word.findall(text)) == 1, label


def test_prompt_carries_tweet_verbatim_and_decoding() -> None:
    tweet = 'Line one,\n"quoted" line two'
    bundle = build_prompt(tweet, load_label_metadata())
    assert tweet in bundle.user_text
    assert tweet not in bundle.system_text
    assert bundle.params == DecodingParams(temperature=0.7, max_tokens=50, stop=None)
    assert bundle.model_name == "gpt-3.5-turbo"


def test_prompt_matches_golden_file() -> None:
    bundle = build_prompt(GOLDEN_TWEET, load_label_metadata())
    rendered = f"[system]\n{bundle.system_text}\n[user]\n{bundle.user_text}\n"
    assert rendered == GOLDEN.read_text(encoding="utf-8")


def test_prompt_rejects_empty_tweet() -> None:
    with pytest.raises(ValueError):
        build_prompt("  ", load_label_metadata())


def test_cache_key_tracks_params_and_model() -> None:
    metas = load_label_metadata()
    base = build_prompt("x", metas)
    cooler = build_prompt("x", metas, DecodingParams(temperature=0.0))
    other_model = build_prompt("x", metas, model_name="local-model")
    assert base.prompt_hash == cooler.prompt_hash == other_model.prompt_hash
    assert len({base.cache_key, cooler.cache_key, other_model.cache_key}) == 3


def test_decoding_params_bounds() -> None:
    with pytest.raises(ValidationError):
        DecodingParams(temperature=-0.1)
    with pytest.raises(ValidationError):
        DecodingParams(max_tokens=0)


# --- parsing ------------------------------------------------------------------

L = LabelId

HAND_LABELLED: list[tuple[str, set[LabelId]]] = [
    ("pharma, political", {L.PHARMA, L.POLITICAL}),
    ("Labels: Pharma, Political.", {L.PHARMA, L.POLITICAL}),
    ("side-effect", {L.SIDE_EFFECT}),
    ("side effects, rushed", {L.SIDE_EFFECT, L.RUSHED}),
    ("SIDE-EFFECT, INEFFECTIVE", {L.SIDE_EFFECT, L.INEFFECTIVE}),
    ("none", {L.NONE}),
    ("None.", {L.NONE}),
    ("", {L.NONE}),
    ("conspiracy", {L.CONSPIRACY}),
    ("Conspiracies; political", {L.CONSPIRACY, L.POLITICAL}),
    ("Big Pharma", {L.PHARMA}),
    ("mandatory, unnecessary", {L.MANDATORY, L.UNNECESSARY}),
    ("ingredient", {L.INGREDIENTS}),
    (
        "The tweet expresses concern about side effects and that the vaccine is ineffective",
        {L.SIDE_EFFECT, L.INEFFECTIVE},
    ),
    ("religious", {L.RELIGIOUS}),
    ("country, pharma", {L.COUNTRY, L.PHARMA}),
    ("- rushed\n- ingredients", {L.RUSHED, L.INGREDIENTS}),
    ('["pharma", "conspiracy"]', {L.PHARMA, L.CONSPIRACY}),
    ("pharma, none", {L.PHARMA}),
    ("I cannot determine any label.", {L.NONE}),
    ("rushed,side-effect,ineffective", {L.RUSHED, L.SIDE_EFFECT, L.INEFFECTIVE}),
    ("Labels: side_effect", {L.SIDE_EFFECT}),
    ("political.", {L.POLITICAL}),
    ("Mandatory vaccination, Big-Pharma", {L.MANDATORY, L.PHARMA}),
    ("ineffective and unnecessary", {L.INEFFECTIVE, L.UNNECESSARY}),
    ("COUNTRY", {L.COUNTRY}),
    ("religious, political, pharma, conspiracy", {L.RELIGIOUS, L.POLITICAL, L.PHARMA, L.CONSPIRACY}),
    ("sideeffects", {L.SIDE_EFFECT}),
    ("Answer: unnecessary", {L.UNNECESSARY}),
    ("**pharma**, **rushed**", {L.PHARMA, L.RUSHED}),
]


def test_hand_labelled_replies() -> None:
    assert len(HAND_LABELLED) == 30
    exact = sum(parse_response(raw) == expected for raw, expected in HAND_LABELLED)
    assert exact >= 29


def _fuzz_corpus(count: int = 200) -> list[str]:
    rng = random.Random(42)
    names = [label.value for label in CANONICAL_LABELS] + ["side effects", "Big Pharma", "conspiracies", "ingredient"]
    prose = ["the", "tweet", "is", "about", "vaccines", "and", "maybe", "I think", "unclear", "labels:"]
    junk = ["", " ", "\n", "{", "}", "[", "]", '"', ":", ",", "null", "😷", "\x00", "—", "\\", "NaN"]
    corpus = ["", "   ", "\n\n", "{}", "[]", "null", "N/A", "PHARMA!!!", '{"labels": ["rushed", "pharma"]}']
    while len(corpus) < count:
        kind = rng.randrange(4)
        if kind == 0:
            parts = rng.sample(names, rng.randint(1, 4))
            text = rng.choice([", ", "; ", "\n", " and "]).join(parts)
        elif kind == 1:
            text = " ".join(rng.choice(prose + names) for _ in range(rng.randint(1, 12)))
        elif kind == 2:
            text = json.dumps({"labels": rng.sample(names, rng.randint(0, 3))})
        else:
            text = "".join(rng.choice(junk + names) for _ in range(rng.randint(1, 8)))
        corpus.append(text.upper() if rng.random() < 0.2 else text)
    return corpus


@pytest.mark.parametrize("strict", [False, True])
def test_parser_is_total_on_fuzz_corpus(strict: bool) -> None:
    for raw in _fuzz_corpus():
        labels = parse_response(raw, strict=strict)
        assert labels
        assert labels <= set(CANONICAL_LABELS)
        assert not (LabelId.NONE in labels and len(labels) > 1)
        assert parse_response(raw, strict=strict) == labels


def test_empty_reply_warns() -> None:
    with patch.object(parser_module.logger, "warning") as warning:
        assert parse_response("") == {LabelId.NONE}
    warning.assert_called_once()


def test_strict_parsing_rejects_prose() -> None:
    prose = "The tweet expresses concern about side effects"
    assert parse_response(prose, strict=True) == {LabelId.NONE}
    assert parse_response("side effects, Rushed", strict=True) == {LabelId.SIDE_EFFECT, LabelId.RUSHED}
    assert parse_response("Labels: pharma; political", strict=True) == {LabelId.PHARMA, LabelId.POLITICAL}


def test_match_labels_keeps_raw_matches() -> None:
    assert match_labels("I think pharma, and none") == {LabelId.PHARMA, LabelId.NONE}
    assert match_labels("Labels: Big Pharma; side effects", strict=True) == {LabelId.PHARMA, LabelId.SIDE_EFFECT}
    assert match_labels("pharma, and also politics", strict=True) == set()
    assert match_labels("   ") == set()


# --- classify -----------------------------------------------------------------


@pytest.mark.anyio
async def test_classify_round_trip() -> None:
    client = ScriptedChatClient(["side-effect, rushed"])
    exchange = await classify("It was rushed and people are dying", client, policy=FAST)
    assert exchange.parsed == {LabelId.SIDE_EFFECT, LabelId.RUSHED}
    assert exchange.attempt_count == 1
    assert exchange.cache_hit is False
    assert exchange.raw_response == "side-effect, rushed"

    request = client.requests[0]
    assert request["model"] == "gpt-3.5-turbo"
    assert request["temperature"] == 0.7
    assert request["max_tokens"] == 50
    assert "stop" not in request
    assert [message["role"] for message in request["messages"]] == ["system", "user"]
    assert tweet_of(request) == "It was rushed and people are dying"


@pytest.mark.anyio
async def test_classify_retries_rate_limits() -> None:
    client = ScriptedChatClient([rate_limit_error(), rate_limit_error(), "pharma"])
    metrics = MetricsReporter()
    exchange = await classify("profits over people", client, policy=FAST, metrics=metrics)
    assert exchange.attempt_count == 3
    assert exchange.parsed == {LabelId.PHARMA}
    assert client.calls == 3
    snapshot = metrics.snapshot()
    assert snapshot["endpoint.retries"] == 2
    assert snapshot["endpoint.status.RateLimited"] == 2
    assert snapshot["endpoint.status.success"] == 1


@pytest.mark.anyio
async def test_classify_retries_timeouts_and_server_errors() -> None:
    client = ScriptedChatClient([timeout_error(), server_error(), "religious"])
    exchange = await classify("god decides", client, policy=FAST)
    assert exchange.attempt_count == 3
    assert exchange.parsed == {LabelId.RELIGIOUS}


@pytest.mark.anyio
async def test_auth_failure_is_not_retried() -> None:
    client = ScriptedChatClient([auth_error(), "pharma"])
    with pytest.raises(AuthFailure):
        await classify("anything", client, policy=FAST)
    assert client.calls == 1


@pytest.mark.anyio
async def test_retries_exhausted_carries_last_cause() -> None:
    client = ScriptedChatClient([server_error()] * 5)
    policy = FAST.model_copy(update={"max_attempts": 3})
    with pytest.raises(RetriesExhausted) as excinfo:
        await classify("anything", client, policy=policy, tweet_id="t-9")
    assert excinfo.value.attempts == 3
    assert excinfo.value.tweet_id == "t-9"
    assert isinstance(excinfo.value.last_cause, EndpointUnavailable)
    assert client.calls == 3


@pytest.mark.anyio
async def test_cache_hit_skips_endpoint(tmp_path: Path) -> None:
    client = ScriptedChatClient(responder=lambda request: "ingredients")
    cache = ResponseCache(tmp_path / "cache")
    first = await classify("fetal cells in it", client, policy=FAST, cache=cache)
    second = await classify("fetal cells in it", client, policy=FAST, cache=cache)
    assert first.cache_hit is False and second.cache_hit is True
    assert second.source == "cache"
    assert second.attempt_count == 0
    assert second.parsed == first.parsed == {LabelId.INGREDIENTS}
    assert client.calls == 1


@pytest.mark.anyio
async def test_cache_dir_from_policy(tmp_path: Path) -> None:
    client = ScriptedChatClient(responder=lambda request: "country")
    policy = FAST.model_copy(update={"cache_dir": str(tmp_path / "cache")})
    classifier = ZeroShotClassifier(client, policy=policy)
    await classifier.classify("made in china")
    again = ZeroShotClassifier(client, policy=policy)
    exchange = await again.classify("made in china")
    assert exchange.cache_hit is True
    assert client.calls == 1


def test_exchange_requires_attempt_unless_cached() -> None:
    bundle = build_prompt("x", load_label_metadata())
    with pytest.raises(ValidationError):
        LlmExchange(
            bundle=bundle,
            raw_response="none",
            parsed=frozenset({LabelId.NONE}),
            latency=0,
            attempt_count=0,
            cache_hit=False,
            started_at="2024-01-01T00:00:00Z",
            finished_at="2024-01-01T00:00:00Z",
        )


def test_openai_errors_are_translated() -> None:
    assert isinstance(translate_openai_error(rate_limit_error()), RateLimited)
    assert isinstance(translate_openai_error(timeout_error()), EndpointTimeout)
    assert isinstance(translate_openai_error(server_error()), EndpointUnavailable)
    assert isinstance(translate_openai_error(auth_error()), AuthFailure)
    assert translate_openai_error(rate_limit_error()).transient
    assert not translate_openai_error(auth_error()).transient
    assert isinstance(translate_openai_error(auth_error()), EndpointError)


def test_client_factory_resolves_policy(monkeypatch) -> None:
    monkeypatch.setenv("CUSTOM_KEY", "secret")
    policy = EndpointPolicy(base_url="https://example.ai/v1", api_key_env="CUSTOM_KEY", timeout=12)

    with patch("vaxkit.zeroshot.client.AsyncOpenAI") as client_cls:
        factory = LLMClientFactory()
        client = factory.for_policy(policy)
        assert factory.for_policy(policy) is client

    assert client is client_cls.return_value
    client_cls.assert_called_once_with(api_key="secret", timeout=httpx.Timeout(12.0, connect=10.0), max_retries=0, base_url="https://example.ai/v1")


def test_client_factory_requires_key() -> None:
    with pytest.raises(AuthFailure):
        LLMClientFactory().for_policy(EndpointPolicy())


# --- transcripts, replay and batches -------------------------------------------------

TWEETS = [
    (f"tw{index:02d}", text)
    for index, text in enumerate(
        [
            "pharma profits again",
            "rushed and untested",
            "side-effect reports everywhere",
            "political games",
            "nothing to add",
        ]
        * 10
    )
]


def _distinct(items: list[tuple[str, str]]) -> list[tuple[str, str]]:
    return [(tweet_id, f"{text} #{tweet_id}") for tweet_id, text in items]


@pytest.mark.anyio
async def test_classify_many_keeps_input_order_and_bounds_concurrency() -> None:
    in_flight = 0
    peak = 0

    class SlowClient(ScriptedChatClient):
        async def _create(self, **kwargs):
            nonlocal in_flight, peak
            in_flight += 1
            peak = max(peak, in_flight)
            await asyncio.sleep(0.001)
            in_flight -= 1
            return await super()._create(**kwargs)

    client = SlowClient(responder=keyword_responder)
    policy = FAST.model_copy(update={"concurrency": 3})
    items = _distinct(TWEETS[:20])
    exchanges = await classify_many(items, ZeroShotClassifier(client, policy=policy))
    assert [exchange.tweet_id for exchange in exchanges] == [tweet_id for tweet_id, _ in items]
    assert 1 <= peak <= 3
    assert exchanges[0].parsed == {LabelId.PHARMA}
    assert exchanges[4].parsed == {LabelId.NONE}


@pytest.mark.anyio
async def test_replayed_transcript_reproduces_labels_offline(tmp_path: Path) -> None:
    items = _distinct(TWEETS)
    client = ScriptedChatClient(responder=keyword_responder)
    transcript = tmp_path / "run.transcript.jsonl"
    recorded = await classify_many(
        items, ZeroShotClassifier(client, policy=FAST, transcript=TranscriptWriter(transcript))
    )
    assert client.calls == 50
    assert len(load_transcript(transcript)) == 50

    metrics = MetricsReporter()
    replayer = ZeroShotClassifier(None, policy=FAST, replay=TranscriptReplay.from_file(transcript), metrics=metrics)
    replayed = await classify_many(items, replayer)
    assert [ex.parsed for ex in replayed] == [ex.parsed for ex in recorded]
    assert [ex.raw_response for ex in replayed] == [ex.raw_response for ex in recorded]
    assert all(ex.source == "replay" for ex in replayed)
    assert metrics.snapshot()["replay.hits"] == 50
    assert client.calls == 50


@pytest.mark.anyio
async def test_replay_miss_raises() -> None:
    classifier = ZeroShotClassifier(None, policy=FAST, replay=TranscriptReplay([]))
    with pytest.raises(ReplayMiss):
        await classifier.classify("never recorded", tweet_id="x")


@pytest.mark.anyio
async def test_resume_skips_transcribed_tweets(tmp_path: Path) -> None:
    items = _distinct(TWEETS[:5])
    transcript = tmp_path / "t.jsonl"
    crashing = ScriptedChatClient(["pharma", "rushed", "side-effect", auth_error(), auth_error()])
    policy = FAST.model_copy(update={"concurrency": 1})
    with pytest.raises(AuthFailure):
        await classify_many(items, ZeroShotClassifier(crashing, policy=policy, transcript=TranscriptWriter(transcript)))
    assert [record.tweet_id for record in load_transcript(transcript)] == ["tw00", "tw01", "tw02"]

    fresh = ScriptedChatClient(responder=keyword_responder)
    exchanges = await classify_many(
        items,
        ZeroShotClassifier(fresh, policy=policy, transcript=TranscriptWriter(transcript)),
        resume=TranscriptReplay.from_file(transcript),
    )
    assert fresh.calls == 2
    assert [ex.source for ex in exchanges] == ["transcript"] * 3 + ["endpoint"] * 2
    assert exchanges[2].parsed == {LabelId.SIDE_EFFECT}
    assert len(load_transcript(transcript)) == 5


def test_transcript_tolerates_torn_last_line(tmp_path: Path) -> None:
    path = tmp_path / "t.jsonl"
    record = {
        "tweet_id": "1",
        "prompt_hash": "abc",
        "model": "m",
        "raw_response": "pharma",
        "labels": ["pharma"],
        "started_at": "2024-01-01T00:00:00Z",
        "finished_at": "2024-01-01T00:00:01Z",
        "attempt_count": 1,
        "cache_hit": False,
        "source": "endpoint",
    }
    path.write_text(json.dumps(record) + "\n" + '{"tweet_id": "2", "prompt_h', encoding="utf-8")
    records = load_transcript(path)
    assert len(records) == 1
    assert TranscriptReplay(records).lookup("abc").raw_response == "pharma"


@pytest.mark.anyio
async def test_factory_override_is_used_by_callers() -> None:
    client = ScriptedChatClient(["none"])
    factory = RecordingFactory(client)
    policy = FAST.model_copy(update={"model": "local-model"})
    classifier = ZeroShotClassifier(factory.for_policy(policy), policy=policy)
    exchange = await classifier.classify("meh")
    assert factory.policies == [policy]
    assert client.requests[0]["model"] == "local-model"
    assert exchange.parsed == {LabelId.NONE}
