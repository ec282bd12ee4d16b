"""Two-stage training: pretrain on a broad corpus, then fine-tune on a domain."""

from __future__ import annotations

import logging
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from . import numcore as nc
from .corpus import LabeledDataset, label_distribution, require_labeled
from .embeddings import EmbeddingMatrix
from .model import Hyperparams, ModelError, ModelWeights, Prediction, forward, init_model, parameter_shapes, predict
from .textproc import EncodedSequence, Vocabulary, encode_batch, encode_text

logger = logging.getLogger(__name__)

_SPLIT_STREAM = 1
_SHUFFLE_STREAM = 2
_DROPOUT_STREAM = 3
_STAGES = {"pretrain": 0, "finetune": 1}


class TrainingError(ValueError):
    pass


@dataclass(frozen=True)
class TrainConfig:
    batch_size: int = 32
    epochs_pretrain: int = 10
    epochs_finetune: int = 5
    lr: float = 1e-3
    seed: int = 0
    shuffle: bool = True
    patience: int = 3
    val_fraction: float = 0.1
    # reserved switches; both must stay off
    class_weighting: bool = False
    train_embeddings: bool = False

    def __post_init__(self):
        if self.batch_size < 1:
            raise TrainingError("batch_size must be >= 1")
        if self.epochs_pretrain < 1 or self.epochs_finetune < 1:
            raise TrainingError("epochs must be >= 1")
        if not 0.0 < self.val_fraction < 0.5:
            raise TrainingError("val_fraction must be in (0, 0.5)")
        if self.patience < 1:
            raise TrainingError("patience must be >= 1")
        if self.lr < 0:
            raise TrainingError("lr must be >= 0")
        if self.class_weighting:
            raise NotImplementedError("class weighting is not implemented")
        if self.train_embeddings:
            raise NotImplementedError("embeddings are frozen; trainable embeddings are not implemented")

    @classmethod
    def from_json(cls, d: dict) -> "TrainConfig":
        known = set(cls.__dataclass_fields__)
        unknown = set(d) - known
        if unknown:
            raise TrainingError(f"unknown train config keys: {sorted(unknown)}")
        return cls(**d)


@dataclass
class EpochRecord:
    epoch: int
    train_loss: float
    val_accuracy: float


@dataclass
class TrainLog:
    stage: str
    epochs: list[EpochRecord] = field(default_factory=list)
    chosen_epoch: int = 0
    steps: int = 0
    first_batch_loss: float | None = None
    start_val_accuracy: float | None = None

    @property
    def best_val_accuracy(self) -> float:
        if self.chosen_epoch == 0:
            return float(self.start_val_accuracy)
        return self.epochs[self.chosen_epoch - 1].val_accuracy

    def to_json(self) -> dict:
        d = asdict(self)
        d["schema"] = 1
        d["best_val_accuracy"] = self.best_val_accuracy if self.epochs or self.start_val_accuracy is not None else None
        return d


def split_validation(n: int, fraction: float, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Deterministic (train, validation) index split."""
    rng = np.random.default_rng([seed, _SPLIT_STREAM])
    perm = rng.permutation(n)
    n_val = min(max(1, int(round(fraction * n))), n - 1)
    return np.sort(perm[n_val:]), np.sort(perm[:n_val])


def encode_dataset(ds: LabeledDataset, vocab: Vocabulary, max_len: int) -> list[EncodedSequence]:
    return [encode_text(r.text, vocab, max_len) for r in ds]


def accuracy(weights: ModelWeights, emb: EmbeddingMatrix, seqs: Sequence[EncodedSequence],
             labels: np.ndarray) -> float:
    preds = predict(weights, emb, seqs)
    hits = sum(int(p.label.as_int() == y) for p, y in zip(preds, labels))
    return hits / len(labels)


def _check_two_classes(ds: LabeledDataset) -> None:
    require_labeled(ds)
    dist = label_distribution(ds)
    if dist.positives == 0 or dist.negatives == 0:
        raise TrainingError(f"dataset {ds.name!r} has a single class ({dist.positives} pos / {dist.negatives} neg)")


def _snapshot(w: ModelWeights) -> dict[str, np.ndarray]:
    return {k: t.data.copy() for k, t in w.params.items()}


def _restore(w: ModelWeights, snap: dict[str, np.ndarray]) -> None:
    for k, t in w.params.items():
        t.data = snap[k]


def _fit(w: ModelWeights, ds: LabeledDataset, vocab: Vocabulary, emb: EmbeddingMatrix,
         cfg: TrainConfig, epochs: int, stage: str, keep_start: bool, on_epoch=None) -> TrainLog:
    w.check_embedding(emb)
    seqs = encode_dataset(ds, vocab, w.hp.max_len)
    labels = np.asarray(ds.labels())
    tr_idx, val_idx = split_validation(len(ds), cfg.val_fraction, cfg.seed)
    tr_seqs = [seqs[i] for i in tr_idx]
    tr_y = labels[tr_idx]
    val_seqs = [seqs[i] for i in val_idx]
    val_y = labels[val_idx]

    log = TrainLog(stage=stage)
    best = _snapshot(w)
    best_acc = -1.0
    if keep_start:
        best_acc = accuracy(w, emb, val_seqs, val_y)
        log.start_val_accuracy = best_acc
    opt = nc.Adam(w.tensors(), lr=cfg.lr)
    stage_id = _STAGES[stage]
    stale = 0
    n = len(tr_seqs)
    for epoch in range(1, epochs + 1):
        if cfg.shuffle:
            order = np.random.default_rng([cfg.seed, _SHUFFLE_STREAM, stage_id, epoch]).permutation(n)
        else:
            order = np.arange(n)
        total = 0.0
        for b, start in enumerate(range(0, n, cfg.batch_size)):
            idx = order[start:start + cfg.batch_size]
            batch = [tr_seqs[i] for i in idx]
            indices, mask = encode_batch(batch)
            width = max(s.true_length for s in batch)
            rng = np.random.default_rng([cfg.seed, _DROPOUT_STREAM, stage_id, epoch, b])
            logits = forward(w, emb, indices[:, :width], mask[:, :width], train=True, rng=rng)
            loss = nc.softmax_cross_entropy(logits, tr_y[idx])
            if log.first_batch_loss is None:
                log.first_batch_loss = float(loss.data)
            opt.zero_grad()
            nc.backward(loss)
            opt.step()
            log.steps += 1
            total += float(loss.data) * len(idx)
        val_acc = accuracy(w, emb, val_seqs, val_y)
        log.epochs.append(EpochRecord(epoch, total / n, val_acc))
        logger.info("%s epoch %d: loss %.4f, val acc %.4f", stage, epoch, total / n, val_acc)
        if on_epoch is not None:
            on_epoch(epoch, w)
        if val_acc > best_acc:
            best_acc, best, log.chosen_epoch, stale = val_acc, _snapshot(w), epoch, 0
        else:
            stale += 1
            if stale >= cfg.patience:
                break
    _restore(w, best)
    return log


def pretrain(general: LabeledDataset, hp: Hyperparams, cfg: TrainConfig, emb: EmbeddingMatrix,
             vocab: Vocabulary, dtype=np.float32, on_epoch=None) -> tuple[ModelWeights, TrainLog]:
    """Train from a fresh initialization; returns the best-validation weights.

    ``on_epoch(epoch, weights)`` is called after every epoch (checkpointing).
    """
    _check_two_classes(general)
    w = init_model(hp, emb, seed=cfg.seed, dtype=dtype, vocab_hash=vocab.content_hash())
    log = _fit(w, general, vocab, emb, cfg, cfg.epochs_pretrain, "pretrain", keep_start=False,
                on_epoch=on_epoch)
    return w, log


def finetune(start: ModelWeights, domain: LabeledDataset, cfg: TrainConfig, emb: EmbeddingMatrix,
             vocab: Vocabulary, on_epoch=None) -> tuple[ModelWeights, TrainLog]:
    """Continue training every weight of ``start`` on ``domain`` with a fresh optimizer.

    The starting weights count as epoch 0, so the returned model never scores
    below ``start`` on the domain validation split.
    """
    _check_two_classes(domain)
    want = parameter_shapes(start.hp)
    for name, t in start.params.items():
        if want.get(name) != t.shape:
            raise ModelError(f"start weights: {name} has shape {t.shape}, expected {want.get(name)}")
    start.check_vocab(vocab)
    w = start.copy()
    log = _fit(w, domain, vocab, emb, cfg, cfg.epochs_finetune, "finetune", keep_start=True,
                on_epoch=on_epoch)
    return w, log


def score_dataset(weights: ModelWeights, ds: LabeledDataset, vocab: Vocabulary,
                  emb: EmbeddingMatrix) -> list[tuple[str, Prediction]]:
    if len(ds) == 0:
        raise TrainingError("dataset is empty")
    weights.check_embedding(emb)
    weights.check_vocab(vocab)
    preds = predict(weights, emb, encode_dataset(ds, vocab, weights.hp.max_len))
    return [(r.id, p) for r, p in zip(ds, preds)]
