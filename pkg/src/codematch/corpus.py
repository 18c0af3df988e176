"""Corpus ingestion: JSON pair records → normalized samples → training triplets.

Input records carry a code snippet plus a raw intent and an optional cleaner
rewritten intent; the rewritten form wins when present. Samples get stable
contiguous ids in file order. A versioned little-endian binary format (magic
CMC1) persists each split.
"""

from __future__ import annotations

import json
import random
import struct
from dataclasses import dataclass

CORPUS_MAGIC = b"CMC1"
CORPUS_VERSION = 1
SPLITS = ("train", "test")


class CorpusError(ValueError):
    pass


@dataclass(frozen=True)
class Sample:
    id: int
    code: str
    description: str


@dataclass(frozen=True)
class Triplet:
    """Anchor code, its own (positive) description, another sample's (negative).

    pos_id always equals code_id; the ids index one sample list.
    """

    code_id: int
    pos_id: int
    neg_id: int


def _normalize_description(text: str) -> str:
    return " ".join(text.split())


def _record_description(record: dict) -> str:
    rewritten = record.get("rewritten_intent")
    if isinstance(rewritten, str) and rewritten.strip():
        return _normalize_description(rewritten)
    intent = record.get("intent")
    if not isinstance(intent, str):
        raise CorpusError("record has neither usable rewritten_intent nor intent")
    return _normalize_description(intent)


def load_corpus(path, split: str) -> list[Sample]:
    """Load one split's JSON array into validated samples with ids 0..n-1."""
    if split not in SPLITS:
        raise CorpusError(f"unknown split {split!r}, expected one of {SPLITS}")
    with open(path, encoding="utf-8") as fh:
        try:
            records = json.load(fh)
        except json.JSONDecodeError as exc:
            raise CorpusError(f"malformed JSON in {split} file {path}: {exc}") from exc
    if not isinstance(records, list):
        raise CorpusError(f"{split} file {path} must be a JSON array of records")
    samples = []
    for i, record in enumerate(records):
        if not isinstance(record, dict):
            raise CorpusError(f"record {i} in {split} file is not an object")
        snippet = record.get("snippet")
        if not isinstance(snippet, str):
            raise CorpusError(f"record {i} in {split} file has no string 'snippet'")
        code = snippet.strip()
        if not code:
            raise CorpusError(f"record {i} in {split} file has an empty snippet")
        try:
            description = _record_description(record)
        except CorpusError as exc:
            raise CorpusError(f"record {i} in {split} file: {exc}") from exc
        if not description:
            raise CorpusError(f"record {i} in {split} file has an empty description")
        samples.append(Sample(id=i, code=code, description=description))
    return samples


def make_triplets(samples: list[Sample], negatives_per_pair: int, seed: int) -> list[Triplet]:
    """Per anchor, draw negatives uniformly without replacement from all other
    samples. Pure function of (samples, negatives_per_pair, seed)."""
    n = len(samples)
    if n < 2:
        raise CorpusError("cannot sample negatives from fewer than 2 samples")
    if negatives_per_pair < 1:
        raise CorpusError("negatives_per_pair must be ≥ 1")
    if negatives_per_pair > n - 1:
        raise CorpusError(
            f"negatives_per_pair {negatives_per_pair} exceeds available negatives ({n - 1})")
    rng = random.Random(seed)
    triplets = []
    for sample in samples:
        pool = [s.id for s in samples if s.id != sample.id]
        for neg_id in rng.sample(pool, negatives_per_pair):
            triplets.append(Triplet(code_id=sample.id, pos_id=sample.id, neg_id=neg_id))
    return triplets


# ---------------------------------------------------------------------------
# Binary persistence (one file per split)
# ---------------------------------------------------------------------------

def write_corpus(samples: list[Sample], path) -> None:
    parts = [CORPUS_MAGIC, struct.pack("<II", CORPUS_VERSION, len(samples))]
    for s in samples:
        code = s.code.encode("utf-8")
        desc = s.description.encode("utf-8")
        parts.append(struct.pack("<II", s.id, len(code)))
        parts.append(code)
        parts.append(struct.pack("<I", len(desc)))
        parts.append(desc)
    with open(path, "wb") as fh:
        fh.write(b"".join(parts))


def read_corpus(path) -> list[Sample]:
    with open(path, "rb") as fh:
        blob = fh.read()
    if blob[:4] != CORPUS_MAGIC:
        raise CorpusError(f"bad corpus magic in {path}: {blob[:4]!r}")
    try:
        version, n = struct.unpack_from("<II", blob, 4)
        if version != CORPUS_VERSION:
            raise CorpusError(f"unsupported corpus version {version} in {path}")
        off = 12
        samples = []
        for _ in range(n):
            sid, code_len = struct.unpack_from("<II", blob, off)
            off += 8
            code = blob[off:off + code_len].decode("utf-8")
            off += code_len
            (desc_len,) = struct.unpack_from("<I", blob, off)
            off += 4
            desc = blob[off:off + desc_len].decode("utf-8")
            off += desc_len
            samples.append(Sample(id=sid, code=code, description=desc))
    except struct.error as exc:
        raise CorpusError(f"truncated corpus file {path}") from exc
    if off != len(blob):
        raise CorpusError(f"trailing bytes in corpus file {path}")
    return samples
