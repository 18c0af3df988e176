"""Ranking evaluation: per-query rank of the gold snippet, MRR, Recall@K.

The vector models (ct, cat) score a query against all candidates with one
normalized-L2 matrix product; the matching models (mp, mp-cat) are
query-dependent and score every (query, candidate) pair with a full forward
pass. Tie handling is pessimistic and deterministic: equal scores break by
ascending id, so an all-tied pool puts the largest id last.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .models import (
    EncodedSample,
    ModelConfig,
    cat_code_vec,
    cat_text_vec,
    ct_code_vec,
    ct_text_vec,
    frozen_params,
)
from .models import score as model_score
from .subword import SubwordVocab

RECALL_KS = (1, 5, 10)


class EvalError(ValueError):
    pass


@dataclass
class RankingMetrics:
    mrr: float
    recall_at: dict[int, float]
    ranks: list[int]


def rank_from_scores(candidate_ids, scores, gold_id: int) -> int:
    """1 + #{score > gold's} + #{tied candidates with smaller id}."""
    ids = np.asarray(candidate_ids)
    scores = np.asarray(scores, dtype=np.float64)
    where = np.nonzero(ids == gold_id)[0]
    if where.size != 1:
        raise EvalError(f"gold id {gold_id} not among candidates exactly once")
    gold_score = scores[where[0]]
    higher = int(np.sum(scores > gold_score))
    tied_before = int(np.sum((scores == gold_score) & (ids < gold_id)))
    return 1 + higher + tied_before


def metrics_from_ranks(ranks: list[int]) -> RankingMetrics:
    if not ranks:
        raise EvalError("cannot aggregate an empty rank list")
    arr = np.asarray(ranks, dtype=np.float64)
    mrr = float(np.mean(1.0 / arr))
    recall = {k: float(np.mean(arr <= k)) for k in RECALL_KS}
    return RankingMetrics(mrr=mrr, recall_at=recall, ranks=list(ranks))


def l2sim_matrix(a: np.ndarray, b: np.ndarray, guard: float = 1e-12) -> np.ndarray:
    """Pairwise 1 - ||â_i - b̂_j||²  for row sets a (n x D) and b (m x D).

    Mirrors the scalar similarity op (same norm guard) so matrix scoring and
    per-pair scoring induce the same ranking; the agreement is tested.
    """
    an = a / (np.linalg.norm(a, axis=1, keepdims=True) + guard)
    bn = b / (np.linalg.norm(b, axis=1, keepdims=True) + guard)
    sq_a = np.sum(an * an, axis=1)
    sq_b = np.sum(bn * bn, axis=1)
    return 1.0 - (sq_a[:, None] + sq_b[None, :] - 2.0 * (an @ bn.T))


def _pair(code_side: EncodedSample, text_side: EncodedSample) -> EncodedSample:
    return EncodedSample(code_tokens=code_side.code_tokens,
                         ast_tokens=code_side.ast_tokens,
                         text_tokens=text_side.text_tokens)


def code_vectors(kind: str, params, encs: list[EncodedSample]) -> np.ndarray:
    fn = {"ct": ct_code_vec, "cat": cat_code_vec}[kind]
    return np.stack([fn(e, params).data for e in encs])


def text_vectors(kind: str, params, encs: list[EncodedSample]) -> np.ndarray:
    fn = {"ct": ct_text_vec, "cat": cat_text_vec}[kind]
    return np.stack([fn(e, params).data for e in encs])


def score_matrix(kind: str, store, cfg: ModelConfig,
                 code_encs: list[EncodedSample],
                 text_encs: list[EncodedSample],
                 log=None) -> np.ndarray:
    """Scores[i, j] = model similarity of (code j, description i)."""
    params = frozen_params(store) if not isinstance(store, dict) else store
    if kind in ("ct", "cat"):
        cv = code_vectors(kind, params, code_encs)
        tv = text_vectors(kind, params, text_encs)
        return l2sim_matrix(tv, cv)
    rows = []
    for i, query in enumerate(text_encs):
        row = [float(model_score(kind, _pair(cand, query), params, cfg).score.data)
               for cand in code_encs]
        rows.append(row)
        if log is not None and (i + 1) % 50 == 0:
            log(f"scored {i + 1}/{len(text_encs)} queries")
    return np.asarray(rows, dtype=np.float64)


def evaluate_encoded(kind: str, store, cfg: ModelConfig,
                     encs: list[EncodedSample], ids: list[int],
                     log=None) -> RankingMetrics:
    if not encs:
        raise EvalError("empty test set")
    matrix = score_matrix(kind, store, cfg, encs, encs, log=log)
    ranks = [rank_from_scores(ids, matrix[i], gold_id) for i, gold_id in enumerate(ids)]
    return metrics_from_ranks(ranks)


def evaluate(kind: str, store, cfg: ModelConfig, samples,
             code_vocab: SubwordVocab, text_vocab: SubwordVocab,
             log=None) -> RankingMetrics:
    """Rank every sample's own snippet among all snippets (Viterbi encoding)."""
    from .models import encode_channels

    encs = [encode_channels(code_vocab, text_vocab, s.code, s.description, cfg, alpha=None)
            for s in samples]
    return evaluate_encoded(kind, store, cfg, encs, [s.id for s in samples], log=log)


def make_report(kind: str, metrics: RankingMetrics, config_echo: dict,
                runtime_seconds: float) -> dict:
    return {
        "model": kind,
        "mrr": metrics.mrr,
        "recall": {str(k): v for k, v in metrics.recall_at.items()},
        "ranks": metrics.ranks,
        "config_echo": config_echo,
        "runtime_seconds": runtime_seconds,
    }
