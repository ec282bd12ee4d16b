"""Central finite-difference gradient checks."""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

from .autodiff import Tensor, backward


def relative_errors(loss_fn: Callable[[], Tensor], params: Sequence[Tensor], h: float = 1e-5,
                    n_coords: int = 200, seed: int = 0) -> list[float]:
    """Per-tensor maximum relative error between autodiff and central differences.

    ``loss_fn`` must recompute the forward pass from the current parameter
    values and be deterministic (hold dropout masks fixed by reseeding inside
    it). Up to ``n_coords`` coordinates per tensor are sampled without
    replacement; smaller tensors are checked exhaustively.
    """
    for p in params:
        p.grad = None
    grads = backward(loss_fn(), params)
    rng = np.random.default_rng(seed)
    errors = []
    for p, g_ad in zip(params, grads):
        flat = p.data.reshape(-1)
        n = flat.size
        coords = np.arange(n) if n <= n_coords else rng.choice(n, size=n_coords, replace=False)
        worst = 0.0
        for c in coords:
            orig = flat[c]
            flat[c] = orig + h
            f_plus = float(loss_fn().data)
            flat[c] = orig - h
            f_minus = float(loss_fn().data)
            flat[c] = orig
            g_fd = (f_plus - f_minus) / (2.0 * h)
            a = float(g_ad.reshape(-1)[c])
            err = abs(a - g_fd) / max(abs(a) + abs(g_fd), 1e-8)
            worst = max(worst, err)
        errors.append(worst)
    return errors


def grad_check(loss_fn: Callable[[], Tensor], params: Sequence[Tensor], h: float = 1e-5,
               n_coords: int = 200, seed: int = 0) -> float:
    """Maximum relative error over all sampled coordinates of all ``params``."""
    return max(relative_errors(loss_fn, params, h=h, n_coords=n_coords, seed=seed))
