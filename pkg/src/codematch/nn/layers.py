"""The small operator vocabulary shared by all four matching models."""

from __future__ import annotations

import numpy as np

from .autodiff import GraphError, Tensor, matmul, sqrt, tmax, tsum

NORM_GUARD = 1e-12


def embed_lookup(table: Tensor, ids) -> Tensor:
    """Gather embedding rows; gradients scatter back into the table."""
    from .autodiff import take_rows

    idx = np.asarray(ids, dtype=np.int64)
    if idx.size == 0:
        raise GraphError("embed_lookup on an empty id sequence; callers must pad")
    if idx.min() < 0 or idx.max() >= table.data.shape[0]:
        raise GraphError(
            f"token id out of range: max id {int(idx.max())} for table of {table.data.shape[0]} rows")
    return take_rows(table, idx)


def maxpool_seq(x: Tensor) -> Tensor:
    """Per-dimension max over sequence positions (L x D -> D).

    On ties the gradient goes to the first maximal position.
    """
    if x.ndim != 2:
        raise GraphError("maxpool_seq expects an L x D tensor")
    if x.data.shape[0] == 0:
        raise GraphError("maxpool_seq over an empty sequence")
    return tmax(x, axis=0)


def linear(x: Tensor, w: Tensor, b: Tensor | None = None) -> Tensor:
    out = matmul(x, w)
    if b is not None:
        out = out + b
    return out


def _norm(v: Tensor, strict: bool) -> Tensor:
    sq = tsum(v * v)
    if strict and sq.data <= 0.0:
        raise GraphError("zero vector passed to a similarity op")
    return sqrt(sq) if strict else sqrt(sq) + NORM_GUARD


def cosine(a: Tensor, b: Tensor, strict: bool = True) -> Tensor:
    """Cosine similarity of two 1-D vectors.

    ``strict=True`` raises on zero vectors (test mode); otherwise norms are
    guarded with a small epsilon (training mode).
    """
    if a.ndim != 1 or b.ndim != 1 or a.shape != b.shape:
        raise GraphError(f"cosine expects two equal-length vectors, got {a.shape} and {b.shape}")
    return tsum(a * b) / (_norm(a, strict) * _norm(b, strict))


def l2sim(a: Tensor, b: Tensor, strict: bool = True) -> Tensor:
    """Similarity 1 - ||a/|a| - b/|b|||^2 (squared L2 between unit vectors).

    Range [-3, 1]; analytically equal to 2*cosine - 1, which the tests check
    against this independent formulation.
    """
    if a.ndim != 1 or b.ndim != 1 or a.shape != b.shape:
        raise GraphError(f"l2sim expects two equal-length vectors, got {a.shape} and {b.shape}")
    ah = a / _norm(a, strict)
    bh = b / _norm(b, strict)
    d = ah - bh
    return 1.0 - tsum(d * d)
