"""Chat-completion client for zero-shot labelling.

``LLMClientFactory`` turns an ``EndpointPolicy`` into an ``AsyncOpenAI``
client. ``ZeroShotClassifier`` renders the prompt, consults the replay
transcript and response cache, calls the endpoint with exponential backoff on
transient failures and parses the reply.
"""

from __future__ import annotations

import logging
import os
from datetime import datetime, timedelta, timezone
from typing import Any, Literal, Sequence

import httpx
import openai
from openai import AsyncOpenAI
from pydantic import BaseModel, ConfigDict, Field, model_validator
from tenacity import AsyncRetrying, RetryCallState, RetryError, retry_if_exception, stop_after_attempt, wait_exponential

from vaxkit.errors import (
    AuthFailure,
    EndpointError,
    EndpointTimeout,
    EndpointUnavailable,
    RateLimited,
    ReplayMiss,
    RetriesExhausted,
)
from vaxkit.observability import MetricsReporter, log_with_correlation
from vaxkit.taxonomy import LabelId, LabelMeta, load_label_metadata, sort_labels
from vaxkit.zeroshot.cache import ResponseCache, TranscriptRecord, TranscriptReplay, TranscriptWriter
from vaxkit.zeroshot.parser import match_labels, parse_response
from vaxkit.zeroshot.prompts import (
    DEFAULT_MODEL,
    DEFAULT_TEMPLATE,
    DecodingParams,
    PromptBundle,
    PromptTemplate,
    build_prompt,
    load_template,
)

logger = logging.getLogger(__name__)

Source = Literal["endpoint", "cache", "replay", "transcript"]


class EndpointPolicy(BaseModel):
    """Where and how to reach the chat endpoint."""

    base_url: str | None = None
    model: str = DEFAULT_MODEL
    api_key_env: str = "VAXKIT_LLM_API_KEY"
    timeout: float = Field(default=30.0, gt=0)
    max_attempts: int = Field(default=5, ge=1)
    backoff_initial: float = Field(default=1.0, ge=0)
    backoff_max: float = Field(default=30.0, ge=0)
    concurrency: int = Field(default=4, ge=1)
    requests_per_second: float | None = Field(default=None, gt=0)
    cache_dir: str | None = None
    strict_parsing: bool = False
    template: str = DEFAULT_TEMPLATE
    decoding: DecodingParams = Field(default_factory=DecodingParams)


def content_to_text(content: Any) -> str:
    """Normalize OpenAI content blocks (dicts, models, or strings) into plain text."""

    if content is None:
        return ""
    if isinstance(content, str):
        return content
    if isinstance(content, list):
        parts: list[str] = []
        for item in content:
            text_value = item.get("text") if isinstance(item, dict) else getattr(item, "text", None)
            parts.append(str(text_value) if text_value is not None else str(item))
        return "".join(parts)
    if isinstance(content, dict) and "text" in content:
        return str(content["text"])
    text_attr = getattr(content, "text", None)
    return str(text_attr) if text_attr is not None else str(content)


def request_timeout(policy: EndpointPolicy) -> httpx.Timeout:
    """Whole-request timeout; connecting gets at most ten seconds of it."""

    return httpx.Timeout(policy.timeout, connect=min(policy.timeout, 10.0))


class LLMClientFactory:
    """Builds and caches ``AsyncOpenAI`` clients per (base_url, key, timeout)."""

    def __init__(self) -> None:
        self._cache: dict[tuple[str | None, str, float], AsyncOpenAI] = {}

    def for_policy(self, policy: EndpointPolicy) -> AsyncOpenAI:
        api_key = os.getenv(policy.api_key_env)
        if not api_key:
            raise AuthFailure(f"environment variable {policy.api_key_env} holds no API key")
        cache_key = (policy.base_url, api_key, policy.timeout)
        if cache_key not in self._cache:
            kwargs: dict[str, Any] = {"api_key": api_key, "timeout": request_timeout(policy), "max_retries": 0}
            if policy.base_url:
                kwargs["base_url"] = policy.base_url
            self._cache[cache_key] = AsyncOpenAI(**kwargs)
        return self._cache[cache_key]


def translate_openai_error(exc: Exception) -> EndpointError:
    """Map an openai SDK exception onto the endpoint error family."""

    message = str(exc)
    if isinstance(exc, (openai.AuthenticationError, openai.PermissionDeniedError)):
        return AuthFailure(message)
    if isinstance(exc, openai.RateLimitError):
        return RateLimited(message)
    # APITimeoutError subclasses APIConnectionError
    if isinstance(exc, openai.APITimeoutError):
        return EndpointTimeout(message)
    if isinstance(exc, (openai.APIConnectionError, openai.InternalServerError)):
        return EndpointUnavailable(message)
    if isinstance(exc, openai.APIStatusError) and exc.status_code >= 500:
        return EndpointUnavailable(message)
    return EndpointError(message)


def _is_transient(exc: BaseException) -> bool:
    return isinstance(exc, EndpointError) and exc.transient


class LlmExchange(BaseModel):
    """One classified tweet: prompt, raw reply, parsed labels and bookkeeping."""

    model_config = ConfigDict(frozen=True)

    bundle: PromptBundle
    raw_response: str
    parsed: frozenset[LabelId]
    latency: timedelta
    attempt_count: int = Field(ge=0)
    cache_hit: bool
    source: Source = "endpoint"
    tweet_id: str | None = None
    started_at: datetime
    finished_at: datetime

    @model_validator(mode="after")
    def _attempts_unless_cached(self) -> "LlmExchange":
        if self.attempt_count < 1 and not self.cache_hit:
            raise ValueError("attempt_count must be at least 1 for a live exchange")
        return self

    def to_record(self) -> TranscriptRecord:
        return TranscriptRecord(
            tweet_id=self.tweet_id,
            prompt_hash=self.bundle.prompt_hash,
            model=self.bundle.model_name,
            raw_response=self.raw_response,
            labels=sort_labels(self.parsed),
            started_at=self.started_at,
            finished_at=self.finished_at,
            attempt_count=self.attempt_count,
            cache_hit=self.cache_hit,
            source=self.source,
        )


def _now() -> datetime:
    return datetime.now(timezone.utc)


class ZeroShotClassifier:
    """Classifies tweets through a chat endpoint, a cache or a recorded transcript.

    ``client`` is anything exposing ``chat.completions.create`` the way
    ``AsyncOpenAI`` does; it may be ``None`` when every answer comes from
    ``replay``.
    """

    def __init__(
        self,
        client: Any | None,
        *,
        policy: EndpointPolicy | None = None,
        metas: Sequence[LabelMeta] | None = None,
        template: PromptTemplate | None = None,
        cache: ResponseCache | None = None,
        replay: TranscriptReplay | None = None,
        transcript: TranscriptWriter | None = None,
        metrics: MetricsReporter | None = None,
        run_id: str | None = None,
    ) -> None:
        self.policy = policy or EndpointPolicy()
        self.client = client
        self.metas = list(metas) if metas is not None else load_label_metadata()
        self.template = template or load_template(self.policy.template)
        if cache is None and self.policy.cache_dir:
            cache = ResponseCache(self.policy.cache_dir)
        self.cache = cache
        self.replay = replay
        self.transcript = transcript
        self.metrics = metrics or MetricsReporter()
        self.run_id = run_id

    def bundle_for(self, tweet: str) -> PromptBundle:
        return build_prompt(
            tweet,
            self.metas,
            self.policy.decoding,
            model_name=self.policy.model,
            template=self.template,
        )

    def _parse(self, raw: str) -> frozenset[LabelId]:
        if not match_labels(raw, strict=self.policy.strict_parsing):
            self.metrics.record_parse_fallback()
        return parse_response(raw, strict=self.policy.strict_parsing)

    def from_record(self, bundle: PromptBundle, record: TranscriptRecord, *, source: Source, tweet_id: str | None) -> LlmExchange:
        return LlmExchange(
            bundle=bundle,
            raw_response=record.raw_response,
            parsed=self._parse(record.raw_response),
            latency=timedelta(0),
            attempt_count=0,
            cache_hit=True,
            source=source,
            tweet_id=tweet_id,
            started_at=record.started_at,
            finished_at=record.finished_at,
        )

    async def classify(self, tweet: str, *, tweet_id: str | None = None) -> LlmExchange:
        bundle = self.bundle_for(tweet)
        exchange = await self._exchange(bundle, tweet_id)
        if self.transcript is not None:
            self.transcript.append(exchange.to_record())
        return exchange

    async def _exchange(self, bundle: PromptBundle, tweet_id: str | None) -> LlmExchange:
        if self.replay is not None:
            record = self.replay.lookup(bundle.prompt_hash)
            if record is None:
                raise ReplayMiss(bundle.prompt_hash, tweet_id)
            self.metrics.record_replay_hit()
            return self.from_record(bundle, record, source="replay", tweet_id=tweet_id)

        started = _now()
        if self.cache is not None:
            cached = self.cache.get(bundle.cache_key)
            if cached is not None:
                self.metrics.record_cache_hit()
                logger.debug("Cache hit for prompt %s", bundle.prompt_hash[:12])
                finished = _now()
                return LlmExchange(
                    bundle=bundle,
                    raw_response=cached,
                    parsed=self._parse(cached),
                    latency=finished - started,
                    attempt_count=0,
                    cache_hit=True,
                    source="cache",
                    tweet_id=tweet_id,
                    started_at=started,
                    finished_at=finished,
                )

        raw, attempts = await self._call_with_retry(bundle, tweet_id)
        finished = _now()
        if self.cache is not None:
            self.cache.put(bundle.cache_key, raw, model=bundle.model_name, prompt_hash=bundle.prompt_hash)
        return LlmExchange(
            bundle=bundle,
            raw_response=raw,
            parsed=self._parse(raw),
            latency=finished - started,
            attempt_count=attempts,
            cache_hit=False,
            source="endpoint",
            tweet_id=tweet_id,
            started_at=started,
            finished_at=finished,
        )

    def _log_retry(self, state: RetryCallState) -> None:
        exc = state.outcome.exception() if state.outcome else None
        reason = type(exc).__name__ if exc else "unknown"
        self.metrics.record_retry(reason=reason)
        log_with_correlation(
            logger,
            logging.WARNING,
            f"Endpoint attempt {state.attempt_number} failed ({reason}); retrying",
            run_id=self.run_id,
        )

    async def _call_with_retry(self, bundle: PromptBundle, tweet_id: str | None) -> tuple[str, int]:
        if self.client is None:
            raise EndpointUnavailable("no chat endpoint configured")
        retrying = AsyncRetrying(
            stop=stop_after_attempt(self.policy.max_attempts),
            wait=wait_exponential(multiplier=self.policy.backoff_initial, max=self.policy.backoff_max),
            retry=retry_if_exception(_is_transient),
            before_sleep=self._log_retry,
        )
        attempts = 0
        raw = ""
        try:
            async for attempt in retrying:
                with attempt:
                    attempts = attempt.retry_state.attempt_number
                    raw = await self._request(bundle)
        except RetryError as exc:
            last = exc.last_attempt.exception()
            raise RetriesExhausted(attempts, last, tweet_id=tweet_id) from last
        return raw, attempts

    async def _request(self, bundle: PromptBundle) -> str:
        kwargs: dict[str, Any] = {
            "model": bundle.model_name,
            "messages": bundle.messages(),
            "temperature": bundle.params.temperature,
            "max_tokens": bundle.params.max_tokens,
        }
        if bundle.params.stop:
            kwargs["stop"] = list(bundle.params.stop)
        try:
            response = await self.client.chat.completions.create(**kwargs)
        except openai.APIError as exc:
            error = translate_openai_error(exc)
            self.metrics.record_call(model=bundle.model_name, status=type(error).__name__)
            raise error from exc
        self.metrics.record_call(model=bundle.model_name, status="success")
        choices = getattr(response, "choices", None) or []
        if not choices:
            return ""
        return content_to_text(choices[0].message.content)


async def classify(
    tweet: str,
    client: Any,
    metas: Sequence[LabelMeta] | None = None,
    params: DecodingParams | None = None,
    *,
    policy: EndpointPolicy | None = None,
    cache: ResponseCache | None = None,
    metrics: MetricsReporter | None = None,
    tweet_id: str | None = None,
) -> LlmExchange:
    """Classify one tweet; see ``ZeroShotClassifier`` for the full machinery."""

    policy = policy or EndpointPolicy()
    if params is not None:
        policy = policy.model_copy(update={"decoding": params})
    classifier = ZeroShotClassifier(client, policy=policy, metas=metas, cache=cache, metrics=metrics)
    return await classifier.classify(tweet, tweet_id=tweet_id)


__all__ = [
    "EndpointPolicy",
    "LLMClientFactory",
    "LlmExchange",
    "ZeroShotClassifier",
    "classify",
    "content_to_text",
    "translate_openai_error",
]
