"""Triplet training loop: margin ranking loss over (code, D+, D-) triples.

Determinism contract: every random choice (negatives, init, embedding
pretraining, per-epoch shuffles, per-epoch subword sampling) draws from its
own seed stream derived by hashing (master seed, purpose), so runs with the
same config and seed are bit-identical regardless of call order.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field

import numpy as np

from .corpus import Sample, make_triplets
from .models import (
    EncodedSample,
    ModelConfig,
    encode_channels,
    init_params,
    score,
)
from .nn.autodiff import Tensor, relu
from .nn.layers import cosine
from .nn.optim import AdamState, ParamStore, adam_step
from .nn.pretrain import skipgram_pretrain
from .subword import SubwordVocab, encode_best


class TrainingDiverged(RuntimeError):
    def __init__(self, epoch: int, batch: int):
        super().__init__(f"non-finite loss at epoch {epoch}, batch {batch}; aborting")
        self.epoch = epoch
        self.batch = batch


def derive_seed(master: int, purpose: str) -> int:
    """Independent 64-bit seed stream for one named purpose."""
    digest = hashlib.sha256(f"{master}:{purpose}".encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "little")


@dataclass
class TrainConfig:
    model: ModelConfig = field(default_factory=ModelConfig)
    epochs: int = 100
    batch_size: int = 32
    margin: float = 0.05
    lr: float = 1e-3
    seed: int = 0
    negatives: int = 5
    alpha: float | None = 0.2  # None = deterministic Viterbi encoding
    resample_negatives: bool = False
    pretrain_embeddings: bool = True

    def __post_init__(self):
        if self.margin <= 0:
            raise ValueError("margin must be positive")
        if self.epochs < 1:
            raise ValueError("epochs must be ≥ 1")

    def to_dict(self) -> dict:
        m = self.model
        return {
            "model": m.kind,
            "epochs": self.epochs,
            "batch_size": self.batch_size,
            "margin": self.margin,
            "lr": self.lr,
            "seed": self.seed,
            "negatives": self.negatives,
            "alpha": self.alpha,
            "resample_negatives": self.resample_negatives,
            "pretrain_embeddings": self.pretrain_embeddings,
            "dims": {"embed": m.embed_dim, "hidden": m.hidden_dim,
                     "agg": m.agg_hidden, "perspectives": m.perspectives},
            "caps": {"code": m.code_cap, "ast": m.ast_cap, "text": m.text_cap},
            "vocab": {"code": m.code_vocab_size, "text": m.text_vocab_size},
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TrainConfig":
        dims = d.get("dims", {})
        caps = d.get("caps", {})
        vocab = d.get("vocab", {})
        model = ModelConfig(
            kind=d["model"],
            code_vocab_size=vocab.get("code", 4000),
            text_vocab_size=vocab.get("text", 4000),
            embed_dim=dims.get("embed", 128),
            hidden_dim=dims.get("hidden", 128),
            agg_hidden=dims.get("agg", 128),
            perspectives=dims.get("perspectives", 10),
            code_cap=caps.get("code", 200),
            ast_cap=caps.get("ast", 400),
            text_cap=caps.get("text", 60),
        )
        cfg = cls(model=model)
        for key in ("epochs", "batch_size", "margin", "lr", "seed", "negatives",
                    "alpha", "resample_negatives", "pretrain_embeddings"):
            if key in d:
                setattr(cfg, key, d[key])
        return cfg


def triplet_loss(s_pos, s_neg, margin: float) -> Tensor:
    """Hinge max(0, margin - s_pos + s_neg); zero iff the margin is satisfied."""
    diff = margin - s_pos + s_neg
    if not isinstance(diff, Tensor):
        diff = Tensor(np.asarray(diff, dtype=np.float64))
    return relu(diff)


def pretrain_tables(cfg: TrainConfig, samples: list[Sample],
                    code_vocab: SubwordVocab, text_vocab: SubwordVocab):
    """Skip-gram initialization of the code and text embedding tables."""
    from .sbt import sbt_string

    m = cfg.model
    code_sequences = []
    text_sequences = []
    for s in samples:
        code_sequences.append(encode_best(code_vocab, s.code).ids)
        code_sequences.append(encode_best(code_vocab, sbt_string(s.code)).ids)
        text_sequences.append(encode_best(text_vocab, s.description).ids)
    code_table = skipgram_pretrain(code_sequences, m.code_vocab_size, m.embed_dim,
                                   derive_seed(cfg.seed, "pretrain:code"))
    text_table = skipgram_pretrain(text_sequences, m.text_vocab_size, m.embed_dim,
                                   derive_seed(cfg.seed, "pretrain:text"))
    return code_table, text_table


def _pair(code_side: EncodedSample, text_side: EncodedSample) -> EncodedSample:
    return EncodedSample(code_tokens=code_side.code_tokens,
                         ast_tokens=code_side.ast_tokens,
                         text_tokens=text_side.text_tokens)


def _encode_all(cfg: TrainConfig, samples: list[Sample],
                code_vocab: SubwordVocab, text_vocab: SubwordVocab,
                epoch: int) -> list[EncodedSample]:
    encs = []
    for s in samples:
        if cfg.alpha is None:
            encs.append(encode_channels(code_vocab, text_vocab, s.code, s.description,
                                        cfg.model, alpha=None))
        else:
            seed = derive_seed(cfg.seed, f"encode:{epoch}:{s.id}")
            encs.append(encode_channels(code_vocab, text_vocab, s.code, s.description,
                                        cfg.model, alpha=cfg.alpha, seed=seed))
    return encs


def train(cfg: TrainConfig, samples: list[Sample], code_vocab: SubwordVocab,
          text_vocab: SubwordVocab, log=None) -> tuple[ParamStore, list[float]]:
    """Full training run; returns the parameters and per-epoch total losses."""
    def say(msg):
        if log is not None:
            log(msg)

    kind = cfg.model.kind
    if len(samples) != len({s.id for s in samples}):
        raise ValueError("duplicate sample ids")

    code_table = text_table = None
    if cfg.pretrain_embeddings:
        say("pretraining embedding tables")
        code_table, text_table = pretrain_tables(cfg, samples, code_vocab, text_vocab)
    store = init_params(cfg.model, derive_seed(cfg.seed, "init"), code_table, text_table)
    adam = AdamState(store, lr=cfg.lr)

    triplets = make_triplets(samples, cfg.negatives, derive_seed(cfg.seed, "negatives"))
    by_id = {s.id: i for i, s in enumerate(samples)}
    static_encs = None
    if cfg.alpha is None:
        static_encs = _encode_all(cfg, samples, code_vocab, text_vocab, epoch=0)

    losses = []
    for epoch in range(cfg.epochs):
        if cfg.resample_negatives and epoch > 0:
            triplets = make_triplets(samples, cfg.negatives,
                                     derive_seed(cfg.seed, f"negatives:{epoch}"))
        encs = static_encs if static_encs is not None else _encode_all(
            cfg, samples, code_vocab, text_vocab, epoch)
        order = np.random.default_rng(
            derive_seed(cfg.seed, f"shuffle:{epoch}")).permutation(len(triplets))

        epoch_loss = 0.0
        for batch_start in range(0, len(order), cfg.batch_size):
            batch = order[batch_start:batch_start + cfg.batch_size]
            batch_loss = None
            for t_idx in batch:
                t = triplets[t_idx]
                anchor = encs[by_id[t.code_id]]
                pos = encs[by_id[t.pos_id]]
                neg = encs[by_id[t.neg_id]]
                out_pos = score(kind, _pair(anchor, pos), store, cfg.model)
                out_neg = score(kind, _pair(anchor, neg), store, cfg.model)
                s_pos = cosine(out_pos.code_vec, out_pos.text_vec, strict=False)
                s_neg = cosine(out_neg.code_vec, out_neg.text_vec, strict=False)
                loss = triplet_loss(s_pos, s_neg, cfg.margin)
                batch_loss = loss if batch_loss is None else batch_loss + loss
            if not math.isfinite(float(batch_loss.data)):
                raise TrainingDiverged(epoch, batch_start // cfg.batch_size)
            epoch_loss += float(batch_loss.data)
            batch_loss.backward()
            adam_step(store, store.grads(), adam)
            store.zero_grad()
        losses.append(epoch_loss)
        say(f"epoch {epoch}: loss {epoch_loss:.6f}")
    return store, losses
