"""Finite-difference verification of the full classifier's gradients.

The numerical side uses :func:`reference_loss`, a plain-numpy restatement
of the forward pass that accepts a leading "parameter copy" axis. All the
``+h``/``-h`` perturbations of one tensor are evaluated in a single
vectorized call instead of thousands of graph-building forward passes.
With h = 1e-5, float64 roundoff alone puts about 1e-11 of noise on each
difference quotient, the same order as the smallest true gradient entries
of a 40-unit LSTM. Coordinates whose float64 quotient disagrees with
autodiff beyond 1e-6 are therefore re-evaluated in extended precision.
Before any comparison, the reference loss must agree with the autodiff
loss at the unperturbed point, so a drift between the two forward
implementations cannot go unnoticed.
"""

from __future__ import annotations

from dataclasses import replace

import numpy as np

from . import numcore as nc
from .embeddings import EmbeddingMatrix
from .model import GATES, CellType, Hyperparams, ModelWeights, forward, init_model


class GradcheckError(RuntimeError):
    pass


_REFINE_ABOVE = 1e-6


def _relative_error(a, b):
    return np.abs(a - b) / np.maximum(np.abs(a) + np.abs(b), 1e-8)


def _sigmoid(x):
    return 0.5 * (1.0 + np.tanh(0.5 * x))


def _t(a):
    return np.swapaxes(a, -1, -2)


def _direction(p, prefix, gates, x, mask, cell, reverse):
    # x: (M, T, B, d); parameters carry a leading axis of size 1 or M
    T = x.shape[1]
    proj = {g: np.matmul(x, _t(p[f"{prefix}.W_{g}"])[:, None]) + p[f"{prefix}.b_{g}"][:, None, None, :]
            for g in gates}
    U = {g: _t(p[f"{prefix}.U_{g}"]) for g in gates}
    M = max(proj[gates[0]].shape[0], max(u.shape[0] for u in U.values()))
    shape = (M,) + proj[gates[0]].shape[2:]
    h = np.zeros(shape, dtype=x.dtype)
    c = np.zeros(shape, dtype=x.dtype)
    outs = [None] * T
    for t in (range(T - 1, -1, -1) if reverse else range(T)):
        m = mask[t]
        xt = {g: proj[g][:, t] for g in gates}
        if cell is CellType.GRU:
            z = _sigmoid(xt["z"] + h @ U["z"])
            r = _sigmoid(xt["r"] + h @ U["r"])
            cand = np.tanh(xt["h"] + (r * h) @ U["h"])
            h = np.where(m, (1.0 - z) * h + z * cand, h)
        else:
            i = _sigmoid(xt["i"] + h @ U["i"])
            f = _sigmoid(xt["f"] + h @ U["f"])
            o = _sigmoid(xt["o"] + h @ U["o"])
            g = np.tanh(xt["g"] + h @ U["g"])
            c_new = f * c + i * g
            h = np.where(m, o * np.tanh(c_new), h)
            c = np.where(m, c_new, c)
        outs[t] = h
    return np.stack(outs, axis=1), h


def reference_loss(params: dict[str, np.ndarray], hp: Hyperparams, emb: np.ndarray, indices: np.ndarray,
                   mask: np.ndarray, labels: np.ndarray, dropout_rng=None, dtype=np.float64) -> np.ndarray:
    """Mean cross-entropy for each parameter copy; returns shape ``(M,)``.

    Each entry of ``params`` has shape ``(M, *shape)`` or ``(1, *shape)``.
    ``dropout_rng`` must be seeded exactly like the generator handed to
    the autodiff forward pass so both draw identical keep-masks.
    A wider ``dtype`` such as ``np.longdouble`` lowers the roundoff floor
    of finite differences taken on the result.
    """
    gates = GATES[hp.cell_type]
    B, T = indices.shape
    x = np.asarray(emb, dtype=dtype)[indices.T][None]  # (1, T, B, D)
    params = {k: np.asarray(v, dtype=dtype) for k, v in params.items()}
    step_mask = np.asarray(mask, dtype=bool).T[:, :, None]
    p_drop = hp.dropout_p if dropout_rng is not None else 0.0

    def drop(a, shape):
        if p_drop == 0.0:
            return a
        keep = dropout_rng.random(shape) >= p_drop
        return a * (keep / (1.0 - p_drop)).astype(np.float64).astype(a.dtype)

    pooled = None
    for layer in range(hp.layers):
        f_seq, f_last = _direction(params, f"l{layer}.fwd", gates, x, step_mask, hp.cell_type, False)
        b_seq, b_first = _direction(params, f"l{layer}.bwd", gates, x, step_mask, hp.cell_type, True)
        pooled = np.concatenate(np.broadcast_arrays(f_last, b_first), axis=-1)
        if layer + 1 < hp.layers:
            seq = np.concatenate(np.broadcast_arrays(f_seq, b_seq), axis=-1)
            x = drop(seq, seq.shape[1:])
    pooled = drop(pooled, pooled.shape[1:])
    logits = np.matmul(pooled, _t(params["out.W"])) + params["out.b"][:, None, :]
    shifted = logits - logits.max(axis=-1, keepdims=True)
    logp = shifted - np.log(np.exp(shifted).sum(axis=-1, keepdims=True))
    return -logp[:, np.arange(B), labels].mean(axis=-1)


def _fixture(hp: Hyperparams, batch: int, seq_len: int, vocab_size: int, seed: int):
    rng = np.random.default_rng(seed)
    matrix = rng.normal(0.0, 0.5, size=(vocab_size, hp.emb_dim))
    matrix[0] = 0.0
    emb = EmbeddingMatrix(matrix, 1.0)
    w = init_model(hp, emb, seed=seed, dtype=np.float64)
    for t in w.tensors():
        # nonzero biases so every bias gradient is exercised
        if t.data.ndim == 1:
            t.data = rng.normal(0.0, 0.1, size=t.shape)
    indices = rng.integers(2, vocab_size, size=(batch, seq_len))
    mask = np.ones((batch, seq_len), dtype=bool)
    if batch > 1 and seq_len > 2:
        # one padded sequence so the masking path is covered
        mask[-1, seq_len - 2:] = False
        indices[-1, seq_len - 2:] = 0
    labels = np.arange(batch) % 2
    return w, emb, indices, mask, labels


def model_gradcheck(cell_type="gru", batch: int = 3, seq_len: int = 5, vocab_size: int = 12,
                    hp: Hyperparams | None = None, seed: int = 0, h: float = 1e-5,
                    n_coords: int = 200) -> dict[str, float]:
    """Per-tensor max relative error for a float64 model with dropout active.

    Parameters
    ----------
    cell_type : {"gru", "lstm"}
    hp : Hyperparams, optional
        Architecture; defaults to the production configuration.
    n_coords : int
        Coordinates sampled per tensor (tensors with fewer elements are
        checked exhaustively).

    Returns
    -------
    dict
        Parameter name to max of ``|a - n| / max(|a| + |n|, 1e-8)``.
    """
    hp = replace(hp or Hyperparams(), cell_type=CellType(cell_type))
    w, emb, indices, mask, labels = _fixture(hp, batch, seq_len, vocab_size, seed)
    drop_seed = [seed, 99]

    def autodiff_loss(weights: ModelWeights):
        logits = forward(weights, emb, indices, mask, train=True, rng=np.random.default_rng(drop_seed))
        return nc.softmax_cross_entropy(logits, labels)

    loss = autodiff_loss(w)
    names = list(w.params)
    grads = dict(zip(names, nc.backward(loss, [w.params[n] for n in names])))
    base = {n: w.params[n].data[None] for n in names}

    def ref(params, dtype=np.float64):
        return reference_loss(params, hp, emb.matrix, indices, mask, labels, np.random.default_rng(drop_seed),
                              dtype=dtype)

    def numeric_grad(name, coords, dtype):
        value = w.params[name].data
        k = len(coords)
        stacked = np.repeat(value.reshape(1, -1).astype(dtype), 2 * k, axis=0)
        stacked[np.arange(k), coords] += h
        stacked[k + np.arange(k), coords] -= h
        losses = ref({**base, name: stacked.reshape((2 * k,) + value.shape)}, dtype)
        return ((losses[:k] - losses[k:]) / (2.0 * h)).astype(np.float64)

    ref0 = float(ref(base)[0])
    if abs(ref0 - float(loss.data)) > 1e-10 * max(1.0, abs(ref0)):
        raise GradcheckError(f"reference forward disagrees with autodiff: {ref0!r} vs {float(loss.data)!r}")

    rng = np.random.default_rng(seed)
    errors = {}
    for name in names:
        n = w.params[name].data.size
        coords = np.arange(n) if n <= n_coords else rng.choice(n, size=n_coords, replace=False)
        analytic = grads[name].reshape(-1)[coords]
        numeric = numeric_grad(name, coords, np.float64)
        rel = _relative_error(analytic, numeric)
        # near-zero entries are limited by float64 roundoff; redo them wider
        noisy = rel > _REFINE_ABOVE
        if noisy.any():
            numeric[noisy] = numeric_grad(name, coords[noisy], np.longdouble)
            rel = _relative_error(analytic, numeric)
        errors[name] = float(rel.max())
    return errors
