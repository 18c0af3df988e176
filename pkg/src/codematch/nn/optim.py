"""Trainable parameter registry and the Adam optimizer."""

from __future__ import annotations

import numpy as np

from .autodiff import Tensor


class ParamStore:
    """Name -> Tensor map for all trainable parameters of one model."""

    def __init__(self):
        self._params: dict[str, Tensor] = {}

    def add(self, name: str, value: np.ndarray) -> Tensor:
        if name in self._params:
            raise ValueError(f"duplicate parameter name: {name}")
        t = Tensor(np.asarray(value, dtype=np.float64), requires_grad=True)
        self._params[name] = t
        return t

    def __getitem__(self, name: str) -> Tensor:
        return self._params[name]

    def __contains__(self, name: str) -> bool:
        return name in self._params

    def __len__(self) -> int:
        return len(self._params)

    def names(self) -> list[str]:
        return sorted(self._params)

    def items(self):
        for name in self.names():
            yield name, self._params[name]

    def zero_grad(self) -> None:
        for p in self._params.values():
            p.grad = None

    def grads(self) -> dict[str, np.ndarray]:
        """Collected gradients; parameters with no gradient yet map to zeros."""
        out = {}
        for name, p in self._params.items():
            out[name] = p.grad if p.grad is not None else np.zeros_like(p.data)
        return out


class AdamState:
    """First/second moment estimates plus the step counter."""

    def __init__(self, store: ParamStore, lr: float = 1e-3,
                 beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.step = 0
        self.m = {name: np.zeros_like(p.data) for name, p in store.items()}
        self.v = {name: np.zeros_like(p.data) for name, p in store.items()}


def adam_step(store: ParamStore, grads: dict[str, np.ndarray], state: AdamState) -> None:
    """One bias-corrected Adam update, in place."""
    missing = [n for n in store.names() if n not in grads]
    if missing:
        raise ValueError(f"missing gradients for parameters: {missing}")
    state.step += 1
    t = state.step
    bc1 = 1.0 - state.beta1 ** t
    bc2 = 1.0 - state.beta2 ** t
    for name, p in store.items():
        g = grads[name]
        if g.shape != p.data.shape:
            raise ValueError(f"gradient shape mismatch for {name}: {g.shape} vs {p.data.shape}")
        m = state.m[name]
        v = state.v[name]
        m *= state.beta1
        m += (1.0 - state.beta1) * g
        v *= state.beta2
        v += (1.0 - state.beta2) * g * g
        p.data = p.data - state.lr * (m / bc1) / (np.sqrt(v / bc2) + state.eps)
