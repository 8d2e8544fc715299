from __future__ import annotations

import random
from pathlib import Path
from types import SimpleNamespace
from typing import Any, Callable, Iterable, Sequence

import httpx
import openai

from vaxkit.corpus import TweetRecord, write_csv
from vaxkit.finetune import HashingEncoder, resolve_backend_spec
from vaxkit.taxonomy import CANONICAL_LABELS, LabelId, LabelSet
from vaxkit.zeroshot import EndpointPolicy, LLMClientFactory

STUB_URL = "https://stub.test/v1/chat/completions"


def completion(text: str | None) -> SimpleNamespace:
    return SimpleNamespace(choices=[SimpleNamespace(message=SimpleNamespace(content=text), finish_reason="stop")])


def _response(status: int) -> httpx.Response:
    return httpx.Response(status, request=httpx.Request("POST", STUB_URL))


def rate_limit_error() -> openai.RateLimitError:
    return openai.RateLimitError("rate limited", response=_response(429), body=None)


def auth_error() -> openai.AuthenticationError:
    return openai.AuthenticationError("bad key", response=_response(401), body=None)


def server_error() -> openai.InternalServerError:
    return openai.InternalServerError("upstream down", response=_response(503), body=None)


def timeout_error() -> openai.APITimeoutError:
    return openai.APITimeoutError(request=httpx.Request("POST", STUB_URL))


class ScriptedChatClient:
    """Stands in for ``AsyncOpenAI``: replays a script, then a default responder.

    Script items are reply strings or exceptions to raise. ``calls`` counts
    every ``chat.completions.create`` invocation.
    """

    def __init__(
        self,
        script: Iterable[str | BaseException] = (),
        *,
        responder: Callable[[dict[str, Any]], str] | None = None,
    ) -> None:
        self.script = list(script)
        self.responder = responder or (lambda request: "none")
        self.requests: list[dict[str, Any]] = []
        self.chat = SimpleNamespace(completions=SimpleNamespace(create=self._create))

    @property
    def calls(self) -> int:
        return len(self.requests)

    async def _create(self, **kwargs: Any) -> SimpleNamespace:
        self.requests.append(kwargs)
        if self.script:
            item = self.script.pop(0)
            if isinstance(item, BaseException):
                raise item
            return completion(item)
        return completion(self.responder(kwargs))


class RecordingFactory(LLMClientFactory):
    def __init__(self, client: Any) -> None:
        super().__init__()
        self.client = client
        self.policies: list[EndpointPolicy] = []

    def for_policy(self, policy: EndpointPolicy) -> Any:
        self.policies.append(policy)
        return self.client


def tweet_of(request: dict[str, Any]) -> str:
    """Pull the tweet text back out of a rendered user message."""

    user = request["messages"][-1]["content"]
    return user.split('"""\n', 1)[1].rsplit('\n"""', 1)[0]


def keyword_responder(request: dict[str, Any]) -> str:
    """Deterministic stub: names every label whose id occurs in the tweet."""

    tweet = tweet_of(request).lower()
    found = [label.value for label in CANONICAL_LABELS if label.value in tweet and label is not LabelId.NONE]
    return ", ".join(found) if found else "none"


def hashing_encoder() -> HashingEncoder:
    return HashingEncoder(resolve_backend_spec("hashing"))


def distinct_bucket_tokens(encoder: HashingEncoder, count: int = len(CANONICAL_LABELS)) -> list[str]:
    tokens: list[str] = []
    used: set[int] = set()
    candidate = 0
    while len(tokens) < count:
        token = f"w{candidate}"
        index, _ = encoder.bucket(token)
        if index not in used:
            used.add(index)
            tokens.append(token)
        candidate += 1
    return tokens


def separable_records(count: int = 20) -> list[TweetRecord]:
    """Single-token tweets, one token per label, each token in its own hash bucket."""

    tokens = distinct_bucket_tokens(hashing_encoder())
    return [
        TweetRecord(
            id=f"t{index:02d}",
            text=tokens[index % len(tokens)],
            gold=frozenset({CANONICAL_LABELS[index % len(CANONICAL_LABELS)]}),
        )
        for index in range(count)
    ]


def random_label_set(rng: random.Random, *, allow_none: bool = True) -> LabelSet:
    pool = list(CANONICAL_LABELS) if allow_none else [label for label in CANONICAL_LABELS if label is not LabelId.NONE]
    return frozenset(rng.sample(pool, rng.randint(1, 3)))


_WORDS = ["vaccine", "jab", "pfizer", "mandate", "trial", "god", "dna", "profit", "hoax", "side", "effects", "rushed"]
_NASTY = [",", '"', "'", "\n", ";", "  ", "é", "#", "\t"]


def random_tweet(rng: random.Random) -> str:
    parts = [rng.choice(_WORDS) for _ in range(rng.randint(1, 8))]
    for _ in range(rng.randint(0, 3)):
        parts.insert(rng.randint(0, len(parts)), rng.choice(_NASTY))
    text = " ".join(parts).strip()
    return text or "vaccine"


def random_records(count: int, seed: int = 0, *, gold: bool = True) -> list[TweetRecord]:
    rng = random.Random(seed)
    return [
        TweetRecord(
            id=f"{rng.randint(10**17, 10**18)}-{index}",
            text=random_tweet(rng),
            gold=random_label_set(rng) if gold else None,
        )
        for index in range(count)
    ]


def write_corpus(path: Path, rows: Sequence[tuple[str, str, str]], *, header: str = "id,tweet,labels") -> Path:
    """Write raw CSV lines (no escaping) for malformed-input tests."""

    lines = [header, *(",".join(row) for row in rows)]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def save_corpus(path: Path, records: Sequence[TweetRecord]) -> Path:
    return write_csv(records, path)
