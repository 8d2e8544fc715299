from __future__ import annotations

import asyncio
import logging
from typing import Sequence

from vaxkit.observability import log_with_correlation
from vaxkit.zeroshot.cache import TranscriptReplay
from vaxkit.zeroshot.client import LlmExchange, ZeroShotClassifier

logger = logging.getLogger(__name__)


class RateLimiter:
    """Spaces request starts at least ``1 / rate`` seconds apart across tasks."""

    def __init__(self, requests_per_second: float | None) -> None:
        self.interval = 1.0 / requests_per_second if requests_per_second else 0.0
        self._lock = asyncio.Lock()
        self._next_slot = 0.0

    async def acquire(self) -> None:
        if not self.interval:
            return
        async with self._lock:
            loop = asyncio.get_running_loop()
            now = loop.time()
            wait = self._next_slot - now
            self._next_slot = max(now, self._next_slot) + self.interval
        if wait > 0:
            await asyncio.sleep(wait)


async def classify_many(
    items: Sequence[tuple[str, str]],
    classifier: ZeroShotClassifier,
    *,
    resume: TranscriptReplay | None = None,
) -> list[LlmExchange]:
    """Classify ``(tweet_id, text)`` pairs, returning exchanges in input order.

    At most ``policy.concurrency`` requests are in flight. Tweets already in
    ``resume`` under the same prompt hash are not sent again. The first
    failure cancels the outstanding work and propagates.
    """

    policy = classifier.policy
    semaphore = asyncio.Semaphore(policy.concurrency)
    limiter = RateLimiter(policy.requests_per_second)
    resumed = 0

    async def _one(tweet_id: str, text: str) -> LlmExchange:
        nonlocal resumed
        if resume is not None:
            bundle = classifier.bundle_for(text)
            record = resume.completed(tweet_id, bundle.prompt_hash)
            if record is not None:
                resumed += 1
                return classifier.from_record(bundle, record, source="transcript", tweet_id=tweet_id)
        async with semaphore:
            await limiter.acquire()
            return await classifier.classify(text, tweet_id=tweet_id)

    tasks = [asyncio.create_task(_one(tweet_id, text)) for tweet_id, text in items]
    try:
        results = await asyncio.gather(*tasks)
    except BaseException:
        for task in tasks:
            task.cancel()
        await asyncio.gather(*tasks, return_exceptions=True)
        raise

    log_with_correlation(
        logger,
        logging.INFO,
        f"Classified {len(results)} tweets ({resumed} resumed from transcript)",
        run_id=classifier.run_id,
    )
    return list(results)


__all__ = ["RateLimiter", "classify_many"]
