"""Versioned binary checkpoint container.

Layout (little-endian)::

    magic   4 bytes  b"VXKT"
    version uint16
    hlen    uint32   length of the JSON header
    header  hlen bytes, UTF-8 JSON (backend spec, pooling, log, tensor table)
    tensors concatenated raw arrays, offsets given in the header
    sha256  32 bytes over everything above
"""

from __future__ import annotations

import hashlib
import json
import os
import struct
import tempfile
from pathlib import Path
from typing import Any

import numpy as np

from vaxkit.errors import ChecksumMismatch, IoFailure, VersionMismatch
from vaxkit.finetune.backends import EncoderBackendSpec
from vaxkit.finetune.state import ClassifierState

MAGIC = b"VXKT"
FORMAT_VERSION = 1
_PREFIX = struct.Struct("<4sHI")
_DIGEST_SIZE = 32


def _tensors(state: ClassifierState) -> dict[str, np.ndarray]:
    tensors = {"head.weight": state.head_weights, "head.bias": state.head_bias}
    for name, value in (state.encoder_state or {}).items():
        tensors[f"encoder.{name}"] = value
    return tensors


def encode_state(state: ClassifierState) -> bytes:
    table: list[dict[str, Any]] = []
    blobs: list[bytes] = []
    offset = 0
    for name, value in _tensors(state).items():
        array = np.ascontiguousarray(value)
        data = array.tobytes()
        table.append({"name": name, "dtype": array.dtype.str, "shape": list(array.shape), "offset": offset, "nbytes": len(data)})
        blobs.append(data)
        offset += len(data)

    header = {
        "backend": state.backend.model_dump(),
        "pooling": state.pooling,
        "freeze_encoder": state.freeze_encoder,
        "threshold": state.threshold,
        "training_log": [[epoch, loss] for epoch, loss in state.training_log],
        "training_config": state.training_config,
        "has_encoder_state": state.encoder_state is not None,
        "tensors": table,
    }
    header_bytes = json.dumps(header, sort_keys=True).encode("utf-8")
    body = _PREFIX.pack(MAGIC, FORMAT_VERSION, len(header_bytes)) + header_bytes + b"".join(blobs)
    return body + hashlib.sha256(body).digest()


def decode_state(payload: bytes) -> ClassifierState:
    if len(payload) < _PREFIX.size + _DIGEST_SIZE:
        raise ChecksumMismatch("checkpoint is truncated")
    # checksum first: it also covers the magic and version bytes
    body, digest = payload[:-_DIGEST_SIZE], payload[-_DIGEST_SIZE:]
    if hashlib.sha256(body).digest() != digest:
        raise ChecksumMismatch("checkpoint checksum does not match its contents (corrupted, or not a vaxkit checkpoint)")
    magic, version, header_len = _PREFIX.unpack_from(payload)
    if magic != MAGIC:
        raise IoFailure("not a vaxkit checkpoint (bad magic bytes)")
    if version != FORMAT_VERSION:
        raise VersionMismatch(FORMAT_VERSION, version)

    header_end = _PREFIX.size + header_len
    header = json.loads(body[_PREFIX.size : header_end].decode("utf-8"))
    data = body[header_end:]
    tensors: dict[str, np.ndarray] = {}
    for entry in header["tensors"]:
        start = entry["offset"]
        chunk = data[start : start + entry["nbytes"]]
        tensors[entry["name"]] = np.frombuffer(chunk, dtype=np.dtype(entry["dtype"])).reshape(entry["shape"]).copy()

    encoder_state = None
    if header["has_encoder_state"]:
        encoder_state = {name.removeprefix("encoder."): value for name, value in tensors.items() if name.startswith("encoder.")}
    return ClassifierState(
        backend=EncoderBackendSpec.model_validate(header["backend"]),
        head_weights=tensors["head.weight"],
        head_bias=tensors["head.bias"],
        pooling=header["pooling"],
        training_log=[(int(epoch), float(loss)) for epoch, loss in header["training_log"]],
        freeze_encoder=bool(header["freeze_encoder"]),
        threshold=float(header["threshold"]),
        encoder_state=encoder_state,
        training_config=dict(header.get("training_config") or {}),
    )


def save_state(state: ClassifierState, path: str | Path) -> Path:
    """Write ``state`` atomically (temp file in the target directory, then rename)."""

    path = Path(path)
    payload = encode_state(state)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp_name = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
        try:
            with os.fdopen(fd, "wb") as handle:
                handle.write(payload)
                handle.flush()
                os.fsync(handle.fileno())
            os.replace(tmp_name, path)
        except BaseException:
            Path(tmp_name).unlink(missing_ok=True)
            raise
    except OSError as exc:
        raise IoFailure(f"cannot write checkpoint {path}: {exc}") from exc
    return path


def load_state(path: str | Path) -> ClassifierState:
    try:
        payload = Path(path).read_bytes()
    except OSError as exc:
        raise IoFailure(f"cannot read checkpoint {path}: {exc}") from exc
    return decode_state(payload)


__all__ = ["FORMAT_VERSION", "MAGIC", "decode_state", "encode_state", "load_state", "save_state"]
