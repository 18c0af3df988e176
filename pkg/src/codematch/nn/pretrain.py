"""Skip-gram-with-negative-sampling pretraining for embedding tables.

Replaces externally trained lookup tables: trained in-repo over the subword
token streams, seeded and reproducible. Returns the input-vector matrix used
to initialize a model's embedding table.
"""

from __future__ import annotations

import numpy as np

from ..subword import PAD_ID


def skipgram_pretrain(sequences: list[list[int]], vocab_size: int, dim: int, seed: int,
                      window: int = 5, negatives: int = 5, epochs: int = 5,
                      lr: float = 0.025) -> np.ndarray:
    """Train SGNS embeddings over integer token sequences.

    Pad tokens are skipped. Negatives are drawn from the unigram distribution
    raised to 3/4. Deterministic for a given (sequences, seed).
    """
    rng = np.random.default_rng(seed)
    in_vecs = (rng.random((vocab_size, dim)) - 0.5) / dim
    out_vecs = np.zeros((vocab_size, dim))

    counts = np.zeros(vocab_size)
    streams = []
    for seq in sequences:
        ids = np.asarray([i for i in seq if i != PAD_ID], dtype=np.int64)
        if ids.size:
            streams.append(ids)
            np.add.at(counts, ids, 1.0)
    if not streams:
        return in_vecs

    noise = counts ** 0.75
    noise_cdf = np.cumsum(noise / noise.sum())

    for _ in range(epochs):
        for ids in streams:
            n = ids.size
            for pos in range(n):
                center = ids[pos]
                lo = max(0, pos - window)
                hi = min(n, pos + window + 1)
                ctx = np.concatenate([ids[lo:pos], ids[pos + 1:hi]])
                if ctx.size == 0:
                    continue
                negs = np.searchsorted(noise_cdf, rng.random(ctx.size * negatives))
                targets = np.concatenate([ctx, negs])
                labels = np.zeros(targets.size)
                labels[:ctx.size] = 1.0

                v = in_vecs[center]
                outs = out_vecs[targets]
                z = 1.0 / (1.0 + np.exp(-(outs @ v)))
                coef = lr * (labels - z)
                dv = coef @ outs
                np.add.at(out_vecs, targets, coef[:, None] * v[None, :])
                in_vecs[center] = v + dv
    return in_vecs
