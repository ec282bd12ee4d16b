"""scikit-learn style wrappers around the classifier and the baselines.

They take raw review texts as ``X`` so they drop into pipelines, grid
searches and ``cross_val_score`` like any other text classifier.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_is_fitted

from .baselines import Lexicon, lexicon_label, parse_sentiwordnet
from .corpus import Label
from .embeddings import EmbeddingTable, load_glove, project
from .model import Hyperparams, predict
from .textproc import build_vocab, encode_text, tokenize
from .training import TrainConfig, finetune, pretrain
from .validation import check_binary_target, check_texts, to_dataset


class BiRNNSentimentClassifier(ClassifierMixin, BaseEstimator):
    """Bidirectional GRU/LSTM polarity classifier over frozen word vectors.

    Parameters
    ----------
    embeddings : EmbeddingTable or str
        Pre-trained vectors, or a path to a GloVe text file.
    hidden : int
        Units per direction in each recurrent layer.
    epochs, finetune_epochs : int
        Upper bounds for :meth:`fit` and :meth:`finetune`; early stopping on
        a held-out split usually ends training sooner.

    ``fit`` pretrains from scratch; ``finetune`` continues from the fitted
    weights on a smaller, domain-specific sample.
    """

    def __init__(self, embeddings=None, emb_dim=100, hidden=40, layers=2, dropout_p=0.2, max_len=200,
                 cell_type="gru", min_count=1, batch_size=32, epochs=10, finetune_epochs=5, lr=1e-3,
                 patience=3, val_fraction=0.1, random_state=0):
        self.embeddings = embeddings
        self.emb_dim = emb_dim
        self.hidden = hidden
        self.layers = layers
        self.dropout_p = dropout_p
        self.max_len = max_len
        self.cell_type = cell_type
        self.min_count = min_count
        self.batch_size = batch_size
        self.epochs = epochs
        self.finetune_epochs = finetune_epochs
        self.lr = lr
        self.patience = patience
        self.val_fraction = val_fraction
        self.random_state = random_state

    def _hyperparams(self) -> Hyperparams:
        return Hyperparams(emb_dim=self.emb_dim, layers=self.layers, hidden=self.hidden,
                           dropout_p=self.dropout_p, max_len=self.max_len, cell_type=self.cell_type)

    def _train_config(self) -> TrainConfig:
        return TrainConfig(batch_size=self.batch_size, epochs_pretrain=self.epochs,
                           epochs_finetune=self.finetune_epochs, lr=self.lr, seed=self.random_state,
                           patience=self.patience, val_fraction=self.val_fraction)

    def _table(self) -> EmbeddingTable:
        if self.embeddings is None:
            raise ValueError("embeddings must be an EmbeddingTable or a GloVe file path")
        if isinstance(self.embeddings, EmbeddingTable):
            return self.embeddings
        return load_glove(self.embeddings, self.emb_dim)

    def fit(self, X, y, vocab_texts=None):
        """Pretrain on ``X``; ``vocab_texts`` adds tokens seen later (e.g. fine-tuning data)."""
        texts = check_texts(X)
        y_idx, classes = check_binary_target(y, len(texts))
        extra = check_texts(vocab_texts) if vocab_texts is not None else []
        self.vocab_ = build_vocab(texts + extra, self.min_count)
        self.embedding_ = project(self.vocab_, self._table(), self.emb_dim)
        self.weights_, self.train_log_ = pretrain(to_dataset(texts, y_idx), self._hyperparams(),
                                                  self._train_config(), self.embedding_, self.vocab_)
        self.classes_ = np.array(classes, dtype=object)
        return self

    def finetune(self, X, y):
        check_is_fitted(self, "weights_")
        texts = check_texts(X)
        y_idx, _ = check_binary_target(y, len(texts))
        self.weights_, self.finetune_log_ = finetune(self.weights_, to_dataset(texts, y_idx),
                                                     self._train_config(), self.embedding_, self.vocab_)
        return self

    def predict_proba(self, X) -> np.ndarray:
        check_is_fitted(self, "weights_")
        seqs = [encode_text(t, self.vocab_, self.max_len) for t in check_texts(X)]
        return np.array([p.probs for p in predict(self.weights_, self.embedding_, seqs)])

    def predict(self, X) -> np.ndarray:
        proba = self.predict_proba(X)
        # strict comparison sends exact ties to the negative class
        return self.classes_[(proba[:, 1] > proba[:, 0]).astype(int)]


class MajorityClassifier(ClassifierMixin, BaseEstimator):
    """Always predicts the most frequent training class (ties go negative)."""

    def fit(self, X, y):
        texts = check_texts(X)
        y_idx, classes = check_binary_target(y, len(texts), require_both=False)
        self.classes_ = np.array([c if c is not None else d for c, d in zip(classes, ("neg", "pos"))], dtype=object)
        self.majority_ = int(np.sum(y_idx == 1) > np.sum(y_idx == 0))
        return self

    def predict(self, X) -> np.ndarray:
        check_is_fitted(self, "majority_")
        return np.array([self.classes_[self.majority_]] * len(check_texts(X)), dtype=object)


class LexiconClassifier(ClassifierMixin, BaseEstimator):
    """Sum-rule lexicon baseline; ``fit`` only loads the lexicon and records label names."""

    def __init__(self, lexicon=None):
        self.lexicon = lexicon

    def fit(self, X=None, y=None):
        lex = self.lexicon if isinstance(self.lexicon, Lexicon) else parse_sentiwordnet(self.lexicon)
        self.lexicon_ = lex.require_nonempty()
        classes = ["neg", "pos"]
        if y is not None:
            _, seen = check_binary_target(y, require_both=False)
            classes = [c if c is not None else d for c, d in zip(seen, classes)]
        self.classes_ = np.array(classes, dtype=object)
        return self

    def predict(self, X) -> np.ndarray:
        check_is_fitted(self, "lexicon_")
        out = [lexicon_label(tokenize(t), self.lexicon_) is Label.POSITIVE for t in check_texts(X)]
        return self.classes_[np.array(out, dtype=int)]
