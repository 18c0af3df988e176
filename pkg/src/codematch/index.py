"""Self-contained snippet index: one file answers queries with no other inputs.

Layout (little-endian, magic CMI1, version 1): the full checkpoint bytes, the
two vocab files' text, then per snippet its id, raw code, and encoded code/AST
channels; for the vector models (ct, cat) a float64 block of precomputed code
vectors. The matching models (mp, mp-cat) are query-dependent, so their
scoring re-runs the matcher per (query, snippet) pair at search time.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .checkpoint import Checkpoint, CheckpointError, checkpoint_from_bytes, verify_vocabs
from .corpus import Sample
from .models import EncodedSample, ModelConfig, encode_channels, frozen_params
from .ranking import code_vectors, l2sim_matrix, score_matrix
from .subword import PAD_ID, SubwordVocab, TokenSeq, encode_best
from .training import TrainConfig

INDEX_MAGIC = b"CMI1"
INDEX_VERSION = 1
VECTOR_KINDS = ("ct", "cat")


class IndexError_(ValueError):
    pass


class EmptyQueryError(ValueError):
    pass


@dataclass(frozen=True)
class RankedResult:
    snippet_id: int
    code: str
    score: float
    rank: int


@dataclass
class IndexEntry:
    id: int
    code: str
    code_ids: list[int]
    ast_ids: list[int]


class SnippetIndex:
    """Immutable search index over one corpus with one trained model."""

    def __init__(self, ckpt_blob: bytes, code_vocab: SubwordVocab,
                 text_vocab: SubwordVocab, entries: list[IndexEntry],
                 vectors: np.ndarray | None):
        self.ckpt_blob = ckpt_blob
        self.checkpoint: Checkpoint = checkpoint_from_bytes(ckpt_blob)
        verify_vocabs(self.checkpoint, code_vocab, text_vocab)
        self.code_vocab = code_vocab
        self.text_vocab = text_vocab
        self.entries = entries
        self.vectors = vectors
        self.kind: str = self.checkpoint.config["model"]
        self.model_cfg: ModelConfig = TrainConfig.from_dict(self.checkpoint.config).model
        self.params = frozen_params(self.checkpoint.params)
        if self.kind in VECTOR_KINDS and vectors is None:
            raise IndexError_(f"index for model {self.kind} is missing code vectors")

    @property
    def ckpt_hash(self) -> str:
        return self.checkpoint.file_hash

    def entry_encoding(self, entry: IndexEntry) -> EncodedSample:
        return EncodedSample(
            code_tokens=TokenSeq(ids=list(entry.code_ids), source_len=len(entry.code)),
            ast_tokens=TokenSeq(ids=list(entry.ast_ids), source_len=0),
            text_tokens=TokenSeq(ids=[PAD_ID], source_len=0),
        )


def build_index(ckpt_blob: bytes, samples: list[Sample],
                code_vocab: SubwordVocab, text_vocab: SubwordVocab) -> SnippetIndex:
    ckpt = checkpoint_from_bytes(ckpt_blob)
    verify_vocabs(ckpt, code_vocab, text_vocab)
    kind = ckpt.config["model"]
    cfg = TrainConfig.from_dict(ckpt.config).model
    entries = []
    encs = []
    for s in samples:
        enc = encode_channels(code_vocab, text_vocab, s.code, "", cfg, alpha=None)
        entries.append(IndexEntry(id=s.id, code=s.code,
                                  code_ids=list(enc.code_tokens.ids),
                                  ast_ids=list(enc.ast_tokens.ids)))
        encs.append(enc)
    vectors = None
    if kind in VECTOR_KINDS:
        vectors = code_vectors(kind, frozen_params(ckpt.params), encs)
    return SnippetIndex(ckpt_blob, code_vocab, text_vocab, entries, vectors)


def search(index: SnippetIndex, query: str, k: int) -> list[RankedResult]:
    """Top-k snippets for a natural-language query, best first.

    Ordering: descending score, ties broken by ascending snippet id; ranks
    are contiguous from 1.
    """
    if k < 1:
        raise ValueError("k must be ≥ 1")
    query_seq = encode_best(index.text_vocab, query)
    if not query_seq.ids:
        raise EmptyQueryError("empty query")
    text_cap = index.model_cfg.text_cap
    query_enc = EncodedSample(
        code_tokens=TokenSeq(ids=[PAD_ID], source_len=0),
        ast_tokens=TokenSeq(ids=[PAD_ID], source_len=0),
        text_tokens=TokenSeq(ids=query_seq.ids[:text_cap], source_len=query_seq.source_len),
    )
    if index.kind in VECTOR_KINDS:
        from .ranking import text_vectors

        qv = text_vectors(index.kind, index.params, [query_enc])
        scores = l2sim_matrix(qv, index.vectors)[0]
    else:
        cand_encs = [index.entry_encoding(e) for e in index.entries]
        scores = score_matrix(index.kind, index.params, index.model_cfg,
                              cand_encs, [query_enc])[0]
    ids = np.asarray([e.id for e in index.entries])
    order = np.lexsort((ids, -scores))
    results = []
    for rank, pos in enumerate(order[:k], start=1):
        entry = index.entries[pos]
        results.append(RankedResult(snippet_id=entry.id, code=entry.code,
                                    score=float(scores[pos]), rank=rank))
    return results


# ---------------------------------------------------------------------------
# Persistence
# ---------------------------------------------------------------------------

def _pack_bytes(raw: bytes) -> bytes:
    return struct.pack("<I", len(raw)) + raw


def _pack_ids(ids: list[int]) -> bytes:
    return struct.pack(f"<I{len(ids)}I", len(ids), *ids)


def index_bytes(index: SnippetIndex) -> bytes:
    parts = [INDEX_MAGIC, struct.pack("<I", INDEX_VERSION)]
    parts.append(_pack_bytes(index.ckpt_blob))
    parts.append(_pack_bytes(index.code_vocab.to_text().encode("utf-8")))
    parts.append(_pack_bytes(index.text_vocab.to_text().encode("utf-8")))
    parts.append(struct.pack("<I", len(index.entries)))
    for e in index.entries:
        parts.append(struct.pack("<I", e.id))
        parts.append(_pack_bytes(e.code.encode("utf-8")))
        parts.append(_pack_ids(e.code_ids))
        parts.append(_pack_ids(e.ast_ids))
    if index.vectors is None:
        parts.append(struct.pack("<B", 0))
    else:
        parts.append(struct.pack("<BI", 1, index.vectors.shape[1]))
        parts.append(np.ascontiguousarray(index.vectors, dtype="<f8").tobytes())
    return b"".join(parts)


def save_index(index: SnippetIndex, path) -> None:
    with open(path, "wb") as fh:
        fh.write(index_bytes(index))


def load_index(path) -> SnippetIndex:
    with open(path, "rb") as fh:
        blob = fh.read()
    if blob[:4] != INDEX_MAGIC:
        raise IndexError_(f"bad index magic in {path}: {blob[:4]!r}")
    off = 4

    def take(n: int) -> bytes:
        nonlocal off
        if off + n > len(blob):
            raise IndexError_(f"truncated index file {path}")
        out = blob[off:off + n]
        off += n
        return out

    def u32() -> int:
        return struct.unpack("<I", take(4))[0]

    version = u32()
    if version != INDEX_VERSION:
        raise IndexError_(f"unsupported index version {version} in {path}")
    ckpt_blob = take(u32())
    try:
        code_vocab = SubwordVocab.from_text(take(u32()).decode("utf-8"))
        text_vocab = SubwordVocab.from_text(take(u32()).decode("utf-8"))
    except ValueError as exc:
        raise IndexError_(f"bad embedded vocab in {path}: {exc}") from exc
    entries = []
    for _ in range(u32()):
        sid = u32()
        code = take(u32()).decode("utf-8")
        n_code = u32()
        code_ids = list(struct.unpack(f"<{n_code}I", take(4 * n_code)))
        n_ast = u32()
        ast_ids = list(struct.unpack(f"<{n_ast}I", take(4 * n_ast)))
        entries.append(IndexEntry(id=sid, code=code, code_ids=code_ids, ast_ids=ast_ids))
    (has_vectors,) = struct.unpack("<B", take(1))
    vectors = None
    if has_vectors:
        dim = u32()
        vectors = np.frombuffer(take(8 * dim * len(entries)), dtype="<f8")
        vectors = vectors.reshape(len(entries), dim)
    if off != len(blob):
        raise IndexError_(f"trailing bytes in index file {path}")
    try:
        return SnippetIndex(ckpt_blob, code_vocab, text_vocab, entries, vectors)
    except CheckpointError as exc:
        raise IndexError_(f"bad embedded checkpoint in {path}: {exc}") from exc
