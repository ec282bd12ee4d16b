"""Input checks shared by the estimator wrappers."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .corpus import Label, LabeledDataset, Review

_NEGATIVE_NAMES = {"neg", "negative", "0", "false"}
_POSITIVE_NAMES = {"pos", "positive", "1", "true"}


def check_texts(X) -> list[str]:
    """Accept a sequence of strings, a 1-d array of strings, or a LabeledDataset."""
    if isinstance(X, LabeledDataset):
        return X.texts
    if isinstance(X, str):
        raise TypeError("expected a sequence of texts, got a single string")
    texts = list(np.asarray(X, dtype=object).reshape(-1)) if isinstance(X, np.ndarray) else list(X)
    for i, t in enumerate(texts):
        if not isinstance(t, str):
            raise TypeError(f"sample {i} is {type(t).__name__}, expected str")
    if not texts:
        raise ValueError("no samples")
    return texts


def _polarity(value) -> int:
    if isinstance(value, Label):
        return value.as_int()
    key = str(value).strip().lower()
    if key in _NEGATIVE_NAMES:
        return 0
    if key in _POSITIVE_NAMES:
        return 1
    raise ValueError(f"cannot interpret {value!r} as a polarity label")


def check_binary_target(y, n_samples: int | None = None, require_both: bool = True):
    """Return ``(indices, classes)`` with index 0 for the negative class.

    ``classes`` keeps the caller's label values so ``predict`` answers in kind.
    """
    values = list(y.labels()) if isinstance(y, LabeledDataset) else list(np.asarray(y, dtype=object).reshape(-1))
    if n_samples is not None and len(values) != n_samples:
        raise ValueError(f"X has {n_samples} samples but y has {len(values)}")
    idx = np.array([_polarity(v) for v in values], dtype=np.int64)
    classes: list = [None, None]
    for v, i in zip(values, idx):
        v = v.value if isinstance(v, Label) else v
        if classes[i] is None:
            classes[i] = v
        elif classes[i] != v:
            raise ValueError(f"mixed label spellings for one class: {classes[i]!r} and {v!r}")
    if require_both and None in classes:
        raise ValueError("y must contain both a positive and a negative class")
    return idx, classes


def to_dataset(texts: Sequence[str], y_idx: Sequence[int] | None = None, lang: str = "en",
               domain: str = "unknown", name: str = "estimator") -> LabeledDataset:
    reviews = []
    for i, t in enumerate(texts):
        label = Label.UNLABELED if y_idx is None else Label.from_int(y_idx[i])
        reviews.append(Review(f"s{i}", t, label, lang, domain))
    return LabeledDataset(tuple(reviews), name=name)
