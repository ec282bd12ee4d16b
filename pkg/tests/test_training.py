import math

import numpy as np
import pytest

from xlsent import synth
from xlsent.embeddings import project
from xlsent.model import Hyperparams
from xlsent.textproc import build_vocab
from xlsent.training import (
    TrainConfig, TrainingError, accuracy, encode_dataset, finetune, pretrain, score_dataset, split_validation,
)

from conftest import make_dataset


@pytest.fixture(scope="module")
def small_corpus():
    corpus = synth.generate(seed=3, n_general=200, n_domain=100, n_foreign=100, dim=16)
    vocab = build_vocab([corpus.general, corpus.domain])
    emb = project(vocab, corpus.embeddings, 16)
    hp = Hyperparams(emb_dim=16, hidden=8, max_len=40)
    return corpus, vocab, emb, hp


CFG = TrainConfig(batch_size=32, epochs_pretrain=3, epochs_finetune=3, seed=11)


def test_config_validation():
    with pytest.raises(TrainingError):
        TrainConfig(batch_size=0)
    with pytest.raises(TrainingError):
        TrainConfig(val_fraction=0.6)
    with pytest.raises(NotImplementedError):
        TrainConfig(class_weighting=True)
    with pytest.raises(NotImplementedError):
        TrainConfig(train_embeddings=True)
    with pytest.raises(TrainingError, match="unknown"):
        TrainConfig.from_json({"momentum": 0.9})


def test_split_is_deterministic_and_disjoint():
    tr, val = split_validation(50, 0.1, seed=4)
    assert len(val) == 5 and len(tr) == 45
    assert not set(tr) & set(val)
    tr2, val2 = split_validation(50, 0.1, seed=4)
    assert np.array_equal(val, val2)
    assert len(split_validation(3, 0.1, 0)[1]) == 1


def test_pretrain_is_reproducible(small_corpus):
    corpus, vocab, emb, hp = small_corpus
    w1, log1 = pretrain(corpus.general, hp, CFG, emb, vocab)
    w2, log2 = pretrain(corpus.general, hp, CFG, emb, vocab)
    assert log1.to_json() == log2.to_json()
    for k in w1.params:
        assert w1.params[k].data.tobytes() == w2.params[k].data.tobytes()
    # untrained binary classifier starts near chance
    assert abs(log1.first_batch_loss - math.log(2)) < 0.2
    assert log1.steps > 0 and 1 <= log1.chosen_epoch <= 3
    assert log1.best_val_accuracy == max(e.val_accuracy for e in log1.epochs)


def test_training_learns(small_corpus):
    corpus, vocab, emb, hp = small_corpus
    cfg = TrainConfig(epochs_pretrain=6, lr=1e-2, seed=2)
    w, log = pretrain(corpus.general, hp, cfg, emb, vocab)
    assert log.epochs[-1].train_loss < log.epochs[0].train_loss
    seqs = encode_dataset(corpus.domain, vocab, hp.max_len)
    assert accuracy(w, emb, seqs, np.asarray(corpus.domain.labels())) > 0.8


def test_finetune_never_worse_on_validation(small_corpus):
    corpus, vocab, emb, hp = small_corpus
    start, _ = pretrain(corpus.general, hp, CFG, emb, vocab)
    tuned, log = finetune(start, corpus.domain, CFG, emb, vocab)
    assert log.start_val_accuracy is not None
    assert log.best_val_accuracy >= log.start_val_accuracy
    # the start weights are untouched
    assert tuned.params["out.W"] is not start.params["out.W"]


def test_early_stopping_and_checkpoints(small_corpus):
    corpus, vocab, emb, hp = small_corpus
    seen = []
    cfg = TrainConfig(epochs_pretrain=30, patience=1, lr=0.0, seed=1)
    _, log = pretrain(corpus.general, hp, cfg, emb, vocab, on_epoch=lambda e, w: seen.append(e))
    # nothing changes with lr=0, so the second epoch cannot improve and training stops
    assert len(log.epochs) == 2 and log.chosen_epoch == 1
    assert seen == [1, 2]


def test_single_class_is_rejected(tiny_setup):
    vocab, emb, hp = tiny_setup
    ds = make_dataset([("great food", "pos"), ("lovely place", "pos"), ("great", "pos")])
    with pytest.raises(TrainingError, match="single class"):
        pretrain(ds, hp, CFG, emb, vocab)


def test_score_dataset(small_corpus):
    corpus, vocab, emb, hp = small_corpus
    w, _ = pretrain(corpus.general, hp, CFG, emb, vocab)
    out = score_dataset(w, corpus.domain, vocab, emb)
    assert [rid for rid, _ in out] == corpus.domain.ids
    assert all(0.0 <= p.p_pos <= 1.0 for _, p in out)
