"""The four code–text matching models.

- ct: embed → BiLSTM → maxpool on both sides, similarity of the two vectors.
- cat: adds an AST channel; code vector = [maxpool(code); maxpool(ast)], and
  the text encoder is double-width so both sides are 4H.
- mp: multi-perspective matching between the (code ++ ast) contextual
  sequence and the text sequence, aggregated by two further BiLSTMs.
- mp-cat: independent cat and mp branches, vectors concatenated.

All scoring is pure: (encoded sample, parameters) → vectors and a similarity.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .nn.autodiff import Tensor, concat, div, matmul, mul, reshape, sqrt, take_rows, transpose, tsum
from .nn.layers import NORM_GUARD, embed_lookup, l2sim, maxpool_seq
from .nn.optim import ParamStore
from .nn.rnn import bilstm, bilstm_param_shapes
from .sbt import sbt_string
from .subword import PAD_ID, SubwordVocab, TokenSeq, encode_best, encode_sample

MODEL_KINDS = ("ct", "cat", "mp", "mp-cat")
STRATEGIES = ("full", "maxpool", "attentive", "maxatt")


@dataclass
class ModelConfig:
    kind: str = "ct"
    code_vocab_size: int = 4000
    text_vocab_size: int = 4000
    embed_dim: int = 128    # E
    hidden_dim: int = 128   # H per direction (code/AST everywhere; text in mp)
    agg_hidden: int = 128   # G, aggregation BiLSTM hidden size
    perspectives: int = 10  # l
    code_cap: int = 200
    ast_cap: int = 400
    text_cap: int = 60

    def __post_init__(self):
        if self.kind not in MODEL_KINDS:
            raise ValueError(f"unknown model kind {self.kind!r}, expected one of {MODEL_KINDS}")


@dataclass
class EncodedSample:
    """Subword-id views of one sample's three channels, capped and padded."""

    code_tokens: TokenSeq
    ast_tokens: TokenSeq
    text_tokens: TokenSeq


@dataclass
class ModelOutput:
    code_vec: Tensor
    text_vec: Tensor
    score: Tensor  # scalar; always l2sim(code_vec, text_vec)


def _capped(seq: TokenSeq, cap: int) -> TokenSeq:
    ids = seq.ids[:cap]
    if not ids:
        ids = [PAD_ID]  # encoders reject empty sequences; pad instead
    return TokenSeq(ids=ids, source_len=seq.source_len)


def encode_channels(code_vocab: SubwordVocab, text_vocab: SubwordVocab,
                    code: str, text: str, cfg: ModelConfig,
                    alpha: float | None = None, seed: int = 0) -> EncodedSample:
    """Encode one (code, description) pair into the three model channels.

    ``alpha=None`` uses Viterbi encoding (evaluation); a positive alpha uses
    sampled encoding with per-channel seeds (training regularization).
    """
    ast_text = sbt_string(code)
    if alpha is None:
        code_seq = encode_best(code_vocab, code)
        ast_seq = encode_best(code_vocab, ast_text)
        text_seq = encode_best(text_vocab, text)
    else:
        code_seq = encode_sample(code_vocab, code, alpha, 3 * seed)
        ast_seq = encode_sample(code_vocab, ast_text, alpha, 3 * seed + 1)
        text_seq = encode_sample(text_vocab, text, alpha, 3 * seed + 2)
    return EncodedSample(
        code_tokens=_capped(code_seq, cfg.code_cap),
        ast_tokens=_capped(ast_seq, cfg.ast_cap),
        text_tokens=_capped(text_seq, cfg.text_cap),
    )


# ---------------------------------------------------------------------------
# Parameter tables
# ---------------------------------------------------------------------------

def _channel_shapes(base: str, vocab_size: int, embed_dim: int,
                    hidden_dim: int) -> dict[str, tuple[int, ...]]:
    shapes = {f"{base}.embed": (vocab_size, embed_dim)}
    for suffix, shape in bilstm_param_shapes(embed_dim, hidden_dim).items():
        shapes[f"{base}.lstm.{suffix}"] = shape
    return shapes


def _cat_shapes(prefix: str, cfg: ModelConfig) -> dict[str, tuple[int, ...]]:
    shapes = {}
    shapes.update(_channel_shapes(f"{prefix}.code", cfg.code_vocab_size, cfg.embed_dim, cfg.hidden_dim))
    shapes.update(_channel_shapes(f"{prefix}.ast", cfg.code_vocab_size, cfg.embed_dim, cfg.hidden_dim))
    # Text hidden width is double the code/AST width so both sides end at 4H.
    shapes.update(_channel_shapes(f"{prefix}.text", cfg.text_vocab_size, cfg.embed_dim, 2 * cfg.hidden_dim))
    return shapes


def _mp_shapes(prefix: str, cfg: ModelConfig) -> dict[str, tuple[int, ...]]:
    shapes = {}
    # Equal widths on all channels: cosine matching needs equal D = 2H.
    for channel, vocab in (("code", cfg.code_vocab_size), ("ast", cfg.code_vocab_size),
                           ("text", cfg.text_vocab_size)):
        shapes.update(_channel_shapes(f"{prefix}.{channel}", vocab, cfg.embed_dim, cfg.hidden_dim))
    d = 2 * cfg.hidden_dim
    for direction in ("pq", "qp"):
        for strategy in STRATEGIES:
            shapes[f"{prefix}.match.{direction}.{strategy}"] = (cfg.perspectives, d)
    for side in ("p", "q"):
        for suffix, shape in bilstm_param_shapes(4 * cfg.perspectives, cfg.agg_hidden).items():
            shapes[f"{prefix}.agg.{side}.lstm.{suffix}"] = shape
    return shapes


def param_shapes(cfg: ModelConfig) -> dict[str, tuple[int, ...]]:
    if cfg.kind == "ct":
        shapes = {}
        shapes.update(_channel_shapes("ct.code", cfg.code_vocab_size, cfg.embed_dim, cfg.hidden_dim))
        shapes.update(_channel_shapes("ct.text", cfg.text_vocab_size, cfg.embed_dim, cfg.hidden_dim))
        return shapes
    if cfg.kind == "cat":
        return _cat_shapes("cat", cfg)
    if cfg.kind == "mp":
        return _mp_shapes("mp", cfg)
    shapes = _cat_shapes("mpcat.cat", cfg)
    shapes.update(_mp_shapes("mpcat.mp", cfg))
    return shapes


def init_params(cfg: ModelConfig, seed: int,
                code_table: np.ndarray | None = None,
                text_table: np.ndarray | None = None) -> ParamStore:
    """Initialize all parameters; embedding tables may come from pretraining.

    Deterministic: one rng stream consumed in sorted-name order. The AST
    channel shares the code vocabulary, so it is initialized from the code
    table (as an independent copy).
    """
    shapes = param_shapes(cfg)
    rng = np.random.default_rng(seed)
    store = ParamStore()
    for name in sorted(shapes):
        shape = shapes[name]
        if name.endswith(".embed"):
            table = text_table if ".text." in name else code_table
            if table is not None:
                if table.shape != shape:
                    raise ValueError(f"pretrained table shape {table.shape} != {shape} for {name}")
                store.add(name, table.copy())
            else:
                store.add(name, rng.uniform(-0.5, 0.5, shape) / cfg.embed_dim)
        elif name.endswith(".b"):
            store.add(name, np.zeros(shape))
        else:
            bound = 1.0 / np.sqrt(shape[-1] if len(shape) == 1 else shape[0])
            store.add(name, rng.uniform(-bound, bound, shape))
    return store


def frozen_params(store: ParamStore) -> dict[str, Tensor]:
    """Gradient-free view of the parameters; forward passes build no tape."""
    return {name: Tensor(p.data) for name, p in store.items()}


# ---------------------------------------------------------------------------
# Forward passes
# ---------------------------------------------------------------------------

def _encode_seq(store, base: str, tokens: TokenSeq):
    emb = embed_lookup(store[f"{base}.embed"], tokens.ids)
    return bilstm(emb, store, f"{base}.lstm")


def _output(code_vec: Tensor, text_vec: Tensor, strict: bool) -> ModelOutput:
    return ModelOutput(code_vec=code_vec, text_vec=text_vec,
                       score=l2sim(code_vec, text_vec, strict=strict))


def ct_code_vec(enc: EncodedSample, store, prefix: str = "ct") -> Tensor:
    seq, _, _ = _encode_seq(store, f"{prefix}.code", enc.code_tokens)
    return maxpool_seq(seq)


def ct_text_vec(enc: EncodedSample, store, prefix: str = "ct") -> Tensor:
    seq, _, _ = _encode_seq(store, f"{prefix}.text", enc.text_tokens)
    return maxpool_seq(seq)


def score_ct(enc: EncodedSample, store, cfg: ModelConfig,
             prefix: str = "ct", strict: bool = False) -> ModelOutput:
    del cfg
    return _output(ct_code_vec(enc, store, prefix), ct_text_vec(enc, store, prefix), strict)


def cat_code_vec(enc: EncodedSample, store, prefix: str = "cat") -> Tensor:
    code_seq, _, _ = _encode_seq(store, f"{prefix}.code", enc.code_tokens)
    ast_seq, _, _ = _encode_seq(store, f"{prefix}.ast", enc.ast_tokens)
    return concat([maxpool_seq(code_seq), maxpool_seq(ast_seq)], axis=0)


def cat_text_vec(enc: EncodedSample, store, prefix: str = "cat") -> Tensor:
    seq, _, _ = _encode_seq(store, f"{prefix}.text", enc.text_tokens)
    return maxpool_seq(seq)


def score_cat(enc: EncodedSample, store, cfg: ModelConfig,
              prefix: str = "cat", strict: bool = False) -> ModelOutput:
    del cfg
    return _output(cat_code_vec(enc, store, prefix), cat_text_vec(enc, store, prefix), strict)


def _row_normalize(x: Tensor) -> Tensor:
    norms = sqrt(tsum(mul(x, x), axis=1, keepdims=True)) + NORM_GUARD
    return div(x, norms)


def _mp_cosine(a: Tensor, b: Tensor) -> Tensor:
    """Cosine along the last axis of two [.. x l x D] tensors (broadcasting)."""
    num = tsum(mul(a, b), axis=2)
    na = sqrt(tsum(mul(a, a), axis=2))
    nb = sqrt(tsum(mul(b, b), axis=2))
    return div(num, mul(na, nb) + NORM_GUARD)


def _match_direction(p: Tensor, q: Tensor, weights: dict[str, Tensor]) -> Tensor:
    """Match every position of p against four single-vector summaries of q
    under l perspectives each; returns [Lp x 4l]."""
    lp, d = p.data.shape
    lq = q.data.shape[0]
    cos_matrix = matmul(_row_normalize(p), transpose(_row_normalize(q)))  # [Lp x Lq]

    # full: the final hidden state, i.e. q's last row.
    full = reshape(take_rows(q, [lq - 1]), (1, 1, d))
    # maxpool: per-dimension max over q.
    pooled = reshape(maxpool_seq(q), (1, 1, d))
    # attentive: cosine-weighted average, normalized by the weight sum
    # (raw cosines, possibly negative; guarded denominator, no clamping).
    weight_sums = tsum(cos_matrix, axis=1, keepdims=True) + NORM_GUARD
    attentive = reshape(div(matmul(cos_matrix, q), weight_sums), (lp, 1, d))
    # max-attentive: the q row with the highest cosine; first index on ties.
    # The row choice itself is a non-differentiable selection.
    argmax_rows = np.argmax(cos_matrix.data, axis=1)
    max_attentive = reshape(take_rows(q, argmax_rows), (lp, 1, d))

    p3 = reshape(p, (lp, 1, d))
    blocks = []
    for strategy, summary in (("full", full), ("maxpool", pooled),
                              ("attentive", attentive), ("maxatt", max_attentive)):
        w3 = reshape(weights[strategy], (1, weights[strategy].data.shape[0], d))
        blocks.append(_mp_cosine(mul(p3, w3), mul(summary, w3)))
    return concat(blocks, axis=1)


def bimpm_match(p: Tensor, q: Tensor,
                params: dict[str, dict[str, Tensor]]) -> tuple[Tensor, Tensor]:
    """Bilateral multi-perspective matching; each direction has its own
    (unshared) perspective weights under keys "pq" and "qp"."""
    if p.data.shape[1] != q.data.shape[1]:
        raise ValueError(f"matching needs equal widths, got {p.data.shape} and {q.data.shape}")
    return _match_direction(p, q, params["pq"]), _match_direction(q, p, params["qp"])


def _match_params(store, prefix: str) -> dict[str, dict[str, Tensor]]:
    return {direction: {s: store[f"{prefix}.match.{direction}.{s}"] for s in STRATEGIES}
            for direction in ("pq", "qp")}


def _aggregate(seq: Tensor, store, base: str) -> Tensor:
    _, final_fwd, final_bwd = bilstm(seq, store, f"{base}.lstm")
    combined = concat([final_fwd, final_bwd], axis=1)  # [1 x 2G]
    return reshape(combined, (combined.data.shape[1],))


def mp_vectors(enc: EncodedSample, store, prefix: str = "mp") -> tuple[Tensor, Tensor]:
    code_seq, _, _ = _encode_seq(store, f"{prefix}.code", enc.code_tokens)
    ast_seq, _, _ = _encode_seq(store, f"{prefix}.ast", enc.ast_tokens)
    text_seq, _, _ = _encode_seq(store, f"{prefix}.text", enc.text_tokens)
    # Temporal concatenation: the source side is the code rows then AST rows.
    p = concat([code_seq, ast_seq], axis=0)
    p_matched, q_matched = bimpm_match(p, text_seq, _match_params(store, prefix))
    return (_aggregate(p_matched, store, f"{prefix}.agg.p"),
            _aggregate(q_matched, store, f"{prefix}.agg.q"))


def score_mp(enc: EncodedSample, store, cfg: ModelConfig,
             prefix: str = "mp", strict: bool = False) -> ModelOutput:
    del cfg
    code_vec, text_vec = mp_vectors(enc, store, prefix)
    return _output(code_vec, text_vec, strict)


def score_mpcat(enc: EncodedSample, store, cfg: ModelConfig,
                prefix: str = "mpcat", strict: bool = False) -> ModelOutput:
    cat_out = score_cat(enc, store, cfg, prefix=f"{prefix}.cat", strict=strict)
    mp_code, mp_text = mp_vectors(enc, store, prefix=f"{prefix}.mp")
    code_vec = concat([cat_out.code_vec, mp_code], axis=0)
    text_vec = concat([cat_out.text_vec, mp_text], axis=0)
    return _output(code_vec, text_vec, strict)


_SCORERS = {"ct": score_ct, "cat": score_cat, "mp": score_mp, "mp-cat": score_mpcat}


def score(kind: str, enc: EncodedSample, store, cfg: ModelConfig,
          strict: bool = False) -> ModelOutput:
    if kind not in _SCORERS:
        raise ValueError(f"unknown model kind {kind!r}")
    return _SCORERS[kind](enc, store, cfg, strict=strict)
