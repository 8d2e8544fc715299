"""Exception hierarchy shared by every vaxkit module.

Each family carries the process exit code the CLI returns when an error of
that family aborts a run.
"""

from __future__ import annotations

from typing import Iterable


class VaxkitError(Exception):
    """Base class for all toolkit errors."""

    exit_code: int = 1
    family: str = "internal"


class ConfigurationError(VaxkitError):
    exit_code = 3
    family = "configuration"


# --- labels -----------------------------------------------------------------


class LabelError(VaxkitError):
    exit_code = 10
    family = "label"


class UnknownLabel(LabelError):
    def __init__(self, token: str, *, line: int | None = None) -> None:
        self.token = token
        self.line = line
        where = f" (line {line})" if line is not None else ""
        super().__init__(f"Unknown label {token!r}{where}")

    def at_line(self, line: int) -> "UnknownLabel":
        return UnknownLabel(self.token, line=line)


class EmptyLabelString(LabelError):
    def __init__(self, *, line: int | None = None) -> None:
        self.line = line
        where = f" (line {line})" if line is not None else ""
        super().__init__(f"Empty label string{where}")

    def at_line(self, line: int) -> "EmptyLabelString":
        return EmptyLabelString(line=line)


# --- data files ---------------------------------------------------------------


class DataError(VaxkitError):
    exit_code = 11
    family = "data"


class FileUnreadable(DataError):
    def __init__(self, path: object, reason: str = "") -> None:
        self.path = str(path)
        suffix = f": {reason}" if reason else ""
        super().__init__(f"Cannot read {self.path}{suffix}")


class MalformedRow(DataError):
    def __init__(self, line: int | None, reason: str) -> None:
        self.line = line
        where = f"line {line}: " if line is not None else ""
        super().__init__(f"Malformed row, {where}{reason}")


class DuplicateId(DataError):
    def __init__(self, record_id: str) -> None:
        self.record_id = record_id
        super().__init__(f"Duplicate id {record_id!r}")


class MissingGold(DataError):
    def __init__(self, record_id: str) -> None:
        self.record_id = record_id
        super().__init__(f"Record {record_id!r} has no gold labels")


class InvariantViolation(DataError):
    def __init__(self, ids: Iterable[str], reason: str) -> None:
        self.ids = list(ids)
        super().__init__(f"{reason}: {', '.join(self.ids)}")


class IdMismatch(DataError):
    def __init__(self, missing: Iterable[str], extra: Iterable[str]) -> None:
        self.missing = sorted(missing)
        self.extra = sorted(extra)
        parts = []
        if self.missing:
            parts.append(f"missing ids: {', '.join(self.missing)}")
        if self.extra:
            parts.append(f"extra ids: {', '.join(self.extra)}")
        super().__init__("Run file ids do not match gold ids; " + "; ".join(parts))


# --- models -------------------------------------------------------------------


class ModelError(VaxkitError):
    exit_code = 12
    family = "model"


class BackendUnavailable(ModelError):
    def __init__(self, model_name: str, reason: str = "") -> None:
        self.model_name = model_name
        suffix = f": {reason}" if reason else ""
        super().__init__(f"Encoder backend {model_name!r} unavailable{suffix}")


class TokenizationFailure(ModelError):
    pass


class DimensionMismatch(ModelError):
    def __init__(self, expected: int, actual: int, what: str = "embedding") -> None:
        self.expected = expected
        self.actual = actual
        super().__init__(f"{what} dimension mismatch: expected {expected}, got {actual}")


class NonFiniteLoss(ModelError):
    def __init__(self, epoch: int, step: int, value: float) -> None:
        self.epoch = epoch
        self.step = step
        self.value = value
        super().__init__(f"Non-finite loss {value} at epoch {epoch}, step {step}")


# --- checkpoints ----------------------------------------------------------------


class CheckpointError(VaxkitError):
    exit_code = 13
    family = "checkpoint"


class IoFailure(CheckpointError):
    pass


class ChecksumMismatch(CheckpointError):
    pass


class VersionMismatch(CheckpointError):
    def __init__(self, expected: int, actual: int) -> None:
        self.expected = expected
        self.actual = actual
        super().__init__(f"Checkpoint format version {actual} is not supported (expected {expected})")


# --- chat endpoint ----------------------------------------------------------------


class EndpointError(VaxkitError):
    exit_code = 14
    family = "endpoint"
    transient: bool = False


class AuthFailure(EndpointError):
    pass


class RateLimited(EndpointError):
    transient = True


class EndpointTimeout(EndpointError):
    transient = True


class EndpointUnavailable(EndpointError):
    transient = True


class RetriesExhausted(EndpointError):
    def __init__(self, attempts: int, last_cause: BaseException | None, *, tweet_id: str | None = None) -> None:
        self.attempts = attempts
        self.last_cause = last_cause
        self.tweet_id = tweet_id
        subject = f" for tweet {tweet_id!r}" if tweet_id else ""
        super().__init__(f"Gave up{subject} after {attempts} attempts: {last_cause!r}")


class ReplayMiss(EndpointError):
    def __init__(self, prompt_hash: str, tweet_id: str | None = None) -> None:
        self.prompt_hash = prompt_hash
        self.tweet_id = tweet_id
        super().__init__(f"No recorded response for prompt {prompt_hash[:12]} (tweet {tweet_id!r})")


# --- evaluation ----------------------------------------------------------------


class EvaluationError(VaxkitError):
    exit_code = 15
    family = "evaluation"


class EmptyEvaluation(EvaluationError):
    def __init__(self) -> None:
        super().__init__("Cannot evaluate an empty list of prediction pairs")


__all__ = [
    "AuthFailure",
    "BackendUnavailable",
    "CheckpointError",
    "ChecksumMismatch",
    "ConfigurationError",
    "DataError",
    "DimensionMismatch",
    "DuplicateId",
    "EmptyEvaluation",
    "EmptyLabelString",
    "EndpointError",
    "EndpointTimeout",
    "EndpointUnavailable",
    "EvaluationError",
    "FileUnreadable",
    "IdMismatch",
    "InvariantViolation",
    "IoFailure",
    "LabelError",
    "MalformedRow",
    "MissingGold",
    "ModelError",
    "NonFiniteLoss",
    "RateLimited",
    "ReplayMiss",
    "RetriesExhausted",
    "TokenizationFailure",
    "UnknownLabel",
    "VaxkitError",
    "VersionMismatch",
]
