"""Model checkpoints: config echo, vocab hashes, and name-sorted parameters.

Binary layout (little-endian, magic CMK1, version 1):
  magic, u32 version,
  u32 len + config JSON (sorted keys, UTF-8),
  u32 len + code vocab sha256 (hex), u32 len + text vocab sha256 (hex),
  u32 param count, then per parameter in sorted name order:
    u32 len + name, u32 ndim, u32 per dim, float32 values (C order).

Parameters train in 64-bit but persist in 32-bit; loading upcasts, so every
consumer of one checkpoint file sees identical parameter values.
"""

from __future__ import annotations

import hashlib
import json
import struct
from dataclasses import dataclass

import numpy as np

from .nn.optim import ParamStore
from .subword import SubwordVocab

CKPT_MAGIC = b"CMK1"
CKPT_VERSION = 1


class CheckpointError(ValueError):
    pass


@dataclass
class Checkpoint:
    config: dict
    params: ParamStore
    code_vocab_hash: str
    text_vocab_hash: str
    file_hash: str  # sha256 of the serialized bytes


def _pack_str(s: str) -> bytes:
    raw = s.encode("utf-8")
    return struct.pack("<I", len(raw)) + raw


def checkpoint_bytes(config: dict, store: ParamStore,
                     code_vocab_hash: str, text_vocab_hash: str) -> bytes:
    parts = [CKPT_MAGIC, struct.pack("<I", CKPT_VERSION)]
    parts.append(_pack_str(json.dumps(config, sort_keys=True)))
    parts.append(_pack_str(code_vocab_hash))
    parts.append(_pack_str(text_vocab_hash))
    names = store.names()
    parts.append(struct.pack("<I", len(names)))
    for name in names:
        data = store[name].data
        parts.append(_pack_str(name))
        parts.append(struct.pack("<I", data.ndim))
        parts.append(struct.pack(f"<{data.ndim}I", *data.shape))
        parts.append(np.ascontiguousarray(data, dtype="<f4").tobytes())
    return b"".join(parts)


def save_checkpoint(path, config: dict, store: ParamStore,
                    code_vocab_hash: str, text_vocab_hash: str) -> None:
    with open(path, "wb") as fh:
        fh.write(checkpoint_bytes(config, store, code_vocab_hash, text_vocab_hash))


class _Reader:
    def __init__(self, blob: bytes, source: str):
        self.blob = blob
        self.off = 0
        self.source = source

    def take(self, n: int) -> bytes:
        if self.off + n > len(self.blob):
            raise CheckpointError(f"truncated checkpoint data in {self.source}")
        out = self.blob[self.off:self.off + n]
        self.off += n
        return out

    def u32(self) -> int:
        return struct.unpack("<I", self.take(4))[0]

    def string(self) -> str:
        return self.take(self.u32()).decode("utf-8")


def checkpoint_from_bytes(blob: bytes, source: str = "<bytes>") -> Checkpoint:
    if blob[:4] != CKPT_MAGIC:
        raise CheckpointError(f"bad checkpoint magic in {source}: {blob[:4]!r}")
    r = _Reader(blob, source)
    r.take(4)
    version = r.u32()
    if version != CKPT_VERSION:
        raise CheckpointError(f"unsupported checkpoint version {version} in {source}")
    config = json.loads(r.string())
    code_hash = r.string()
    text_hash = r.string()
    store = ParamStore()
    for _ in range(r.u32()):
        name = r.string()
        ndim = r.u32()
        shape = tuple(r.u32() for _ in range(ndim))
        count = int(np.prod(shape)) if shape else 1
        values = np.frombuffer(r.take(4 * count), dtype="<f4").reshape(shape)
        store.add(name, values.astype(np.float64))
    if r.off != len(blob):
        raise CheckpointError(f"trailing bytes in checkpoint {source}")
    return Checkpoint(config=config, params=store,
                      code_vocab_hash=code_hash, text_vocab_hash=text_hash,
                      file_hash=hashlib.sha256(blob).hexdigest())


def load_checkpoint(path) -> Checkpoint:
    with open(path, "rb") as fh:
        blob = fh.read()
    return checkpoint_from_bytes(blob, source=str(path))


def verify_vocabs(ckpt: Checkpoint, code_vocab: SubwordVocab,
                  text_vocab: SubwordVocab) -> None:
    if code_vocab.content_hash() != ckpt.code_vocab_hash:
        raise CheckpointError("code vocab hash does not match the checkpoint")
    if text_vocab.content_hash() != ckpt.text_vocab_hash:
        raise CheckpointError("text vocab hash does not match the checkpoint")
