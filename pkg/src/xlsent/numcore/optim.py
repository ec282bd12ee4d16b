"""Adam with bias correction."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .autodiff import ShapeError, Tensor


@dataclass
class AdamState:
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    step: int = 0
    m: list = field(default_factory=list)
    v: list = field(default_factory=list)


def adam_step(params: Sequence[np.ndarray], grads: Sequence[np.ndarray], state: AdamState):
    """Return ``(new_params, new_state)``; inputs are left untouched."""
    if len(params) != len(grads):
        raise ShapeError(f"adam_step: {len(params)} parameters but {len(grads)} gradients")
    for p, g in zip(params, grads):
        if p.shape != g.shape:
            raise ShapeError(f"adam_step: parameter shape {p.shape} vs gradient shape {g.shape}")
    m = state.m or [np.zeros_like(p) for p in params]
    v = state.v or [np.zeros_like(p) for p in params]
    for p, mi in zip(params, m):
        if mi.shape != p.shape:
            raise ShapeError(f"adam_step: moment shape {mi.shape} vs parameter shape {p.shape}")
    t = state.step + 1
    b1, b2 = state.beta1, state.beta2
    c1, c2 = 1.0 - b1 ** t, 1.0 - b2 ** t
    new_params, new_m, new_v = [], [], []
    for p, g, mi, vi in zip(params, grads, m, v):
        g = np.asarray(g, dtype=p.dtype)
        mi = b1 * mi + (1.0 - b1) * g
        vi = b2 * vi + (1.0 - b2) * (g * g)
        update = state.lr * (mi / c1) / (np.sqrt(vi / c2) + state.epsilon)
        new_params.append((p - update).astype(p.dtype, copy=False))
        new_m.append(mi.astype(p.dtype, copy=False))
        new_v.append(vi.astype(p.dtype, copy=False))
    return new_params, AdamState(state.lr, b1, b2, state.epsilon, t, new_m, new_v)


class Adam:
    """Stateful wrapper that updates ``Tensor.data`` from ``Tensor.grad``."""

    def __init__(self, params: Sequence[Tensor], lr: float = 1e-3, beta1: float = 0.9,
                 beta2: float = 0.999, epsilon: float = 1e-8):
        self.params = list(params)
        self.state = AdamState(lr, beta1, beta2, epsilon)

    def zero_grad(self) -> None:
        for p in self.params:
            p.grad = None

    def step(self) -> None:
        grads = [p.grad if p.grad is not None else np.zeros_like(p.data) for p in self.params]
        new, self.state = adam_step([p.data for p in self.params], grads, self.state)
        for p, data in zip(self.params, new):
            p.data = data
