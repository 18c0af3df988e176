"""Estimator-style wrappers over the functional core.

SubwordTokenizer is a transformer (texts → id sequences); CodeTextMatcher is
an estimator that trains a matching model on (code, description) pairs and
scores new pairs. Both follow the fit/transform/predict and get_params
conventions so they compose with standard pipelines and clone().
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .models import ModelConfig, encode_channels
from .ranking import evaluate
from .subword import SubwordVocab, decode, encode_best, train_unigram
from .training import TrainConfig, train


def _as_text_list(X) -> list[str]:
    texts = list(X)
    if not all(isinstance(t, str) for t in texts):
        raise ValueError("expected an iterable of strings")
    return texts


def _as_pair_list(X) -> list[tuple[str, str]]:
    pairs = []
    for item in X:
        pair = tuple(item)
        if len(pair) != 2 or not all(isinstance(p, str) for p in pair):
            raise ValueError("expected an iterable of (code, description) string pairs")
        pairs.append(pair)
    return pairs


class SubwordTokenizer(BaseEstimator, TransformerMixin):
    """Unigram-LM subword tokenizer with a scikit-learn transformer surface."""

    def __init__(self, vocab_size: int = 200, seed: int = 0):
        self.vocab_size = vocab_size
        self.seed = seed

    def fit(self, X, y=None):
        del y
        self.vocab_ = train_unigram(_as_text_list(X), self.vocab_size, seed=self.seed)
        return self

    def transform(self, X) -> list[list[int]]:
        check_is_fitted(self, "vocab_")
        return [encode_best(self.vocab_, t).ids for t in _as_text_list(X)]

    def inverse_transform(self, X) -> list[str]:
        check_is_fitted(self, "vocab_")
        from .subword import TokenSeq

        return [decode(self.vocab_, TokenSeq(ids=list(ids), source_len=0)) for ids in X]


class CodeTextMatcher(BaseEstimator):
    """Trainable code–description matcher (kinds: ct, cat, mp, mp-cat)."""

    def __init__(self, kind: str = "ct", vocab_size: int = 200, embed_dim: int = 32,
                 hidden_dim: int = 32, agg_hidden: int = 32, perspectives: int = 4,
                 epochs: int = 20, batch_size: int = 32, lr: float = 1e-3,
                 margin: float = 0.05, negatives: int = 2, alpha: float | None = None,
                 pretrain_embeddings: bool = False, seed: int = 0):
        self.kind = kind
        self.vocab_size = vocab_size
        self.embed_dim = embed_dim
        self.hidden_dim = hidden_dim
        self.agg_hidden = agg_hidden
        self.perspectives = perspectives
        self.epochs = epochs
        self.batch_size = batch_size
        self.lr = lr
        self.margin = margin
        self.negatives = negatives
        self.alpha = alpha
        self.pretrain_embeddings = pretrain_embeddings
        self.seed = seed

    def _configs(self, code_vocab: SubwordVocab, text_vocab: SubwordVocab) -> TrainConfig:
        model = ModelConfig(
            kind=self.kind,
            code_vocab_size=code_vocab.size,
            text_vocab_size=text_vocab.size,
            embed_dim=self.embed_dim,
            hidden_dim=self.hidden_dim,
            agg_hidden=self.agg_hidden,
            perspectives=self.perspectives,
        )
        return TrainConfig(model=model, epochs=self.epochs, batch_size=self.batch_size,
                           margin=self.margin, lr=self.lr, seed=self.seed,
                           negatives=self.negatives, alpha=self.alpha,
                           pretrain_embeddings=self.pretrain_embeddings)

    def fit(self, X, y=None):
        del y
        from .corpus import Sample
        from .sbt import sbt_string

        pairs = _as_pair_list(X)
        if len(pairs) < 2:
            raise ValueError("need at least 2 pairs to sample negatives")
        code_texts = []
        for code, _ in pairs:
            code_texts.append(code)
            code_texts.append(sbt_string(code))
        self.code_vocab_ = train_unigram(code_texts, self.vocab_size, seed=self.seed)
        self.text_vocab_ = train_unigram([d for _, d in pairs], self.vocab_size,
                                         seed=self.seed)
        samples = [Sample(id=i, code=c, description=d) for i, (c, d) in enumerate(pairs)]
        cfg = self._configs(self.code_vocab_, self.text_vocab_)
        self.config_ = cfg
        self.params_, self.losses_ = train(cfg, samples, self.code_vocab_, self.text_vocab_)
        return self

    def predict(self, X) -> np.ndarray:
        """Similarity score in [-3, 1] for each (code, description) pair."""
        check_is_fitted(self, "params_")
        from .models import frozen_params, score

        params = frozen_params(self.params_)
        cfg = self.config_.model
        scores = []
        for code, desc in _as_pair_list(X):
            enc = encode_channels(self.code_vocab_, self.text_vocab_, code, desc,
                                  cfg, alpha=None)
            scores.append(float(score(self.kind, enc, params, cfg).score.data))
        return np.asarray(scores)

    def score(self, X, y=None) -> float:
        """MRR of each description against all codes in X (higher is better)."""
        del y
        check_is_fitted(self, "params_")
        from .corpus import Sample

        pairs = _as_pair_list(X)
        samples = [Sample(id=i, code=c, description=d) for i, (c, d) in enumerate(pairs)]
        metrics = evaluate(self.kind, self.params_, self.config_.model, samples,
                           self.code_vocab_, self.text_vocab_)
        return metrics.mrr
