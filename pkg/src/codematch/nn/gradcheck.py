"""Finite-difference gradient checking.

Central differences with step 1e-5 in 64-bit, per-element. Known subgradient
points (maxpool ties, relu at 0, max-attentive selection boundaries) are not
handled and must be avoided by the caller; tests document those exclusions.
"""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

from .autodiff import Tensor

FD_STEP = 1e-5


def grad_check(f: Callable[..., Tensor], inputs: Sequence[Tensor],
               step: float = FD_STEP) -> float:
    """Max relative error between reverse-mode and central-difference grads.

    ``f(*inputs)`` must return a scalar Tensor; every input must have
    ``requires_grad=True`` and float64 data.
    """
    for t in inputs:
        if not t.requires_grad:
            raise ValueError("grad_check inputs must require gradients")
        t.grad = None
    out = f(*inputs)
    out.backward()
    analytic = [t.grad if t.grad is not None else np.zeros_like(t.data) for t in inputs]

    worst = 0.0
    for t, a in zip(inputs, analytic):
        flat = t.data.reshape(-1)
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + step
            plus = float(f(*inputs).data)
            flat[i] = orig - step
            minus = float(f(*inputs).data)
            flat[i] = orig
            numeric = (plus - minus) / (2.0 * step)
            a_i = float(a.reshape(-1)[i])
            denom = max(abs(a_i), abs(numeric), 1e-6)
            worst = max(worst, abs(a_i - numeric) / denom)
    return worst
