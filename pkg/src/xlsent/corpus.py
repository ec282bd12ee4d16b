"""Labeled review datasets stored as JSON Lines.

Each line is one object::

    {"id": "...", "text": "...", "label": "pos" | "neg" | null,
     "lang": "es", "domain": "restaurant"}
"""

from __future__ import annotations

import enum
import json
import re
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Sequence


class CorpusError(ValueError):
    """Raised for malformed or inconsistent corpus input."""


class Label(enum.Enum):
    NEGATIVE = "neg"
    POSITIVE = "pos"
    UNLABELED = None

    @classmethod
    def parse(cls, value) -> "Label":
        if isinstance(value, Label):
            return value
        try:
            return cls(value)
        except ValueError:
            raise CorpusError(f"unknown label {value!r}; expected 'pos', 'neg' or null") from None

    @classmethod
    def from_int(cls, value: int) -> "Label":
        return cls.POSITIVE if int(value) == 1 else cls.NEGATIVE

    def as_int(self) -> int:
        if self is Label.UNLABELED:
            raise CorpusError("unlabeled review has no class index")
        return 1 if self is Label.POSITIVE else 0


_LANG_RE = re.compile(r"^[a-z]{2}$")


@dataclass(frozen=True)
class Review:
    id: str
    text: str
    label: Label
    lang: str
    domain: str

    def __post_init__(self):
        if not isinstance(self.text, str) or not self.text.strip():
            raise CorpusError(f"review {self.id!r}: empty text")
        if not isinstance(self.lang, str) or not _LANG_RE.match(self.lang):
            raise CorpusError(f"review {self.id!r}: lang must be two lowercase ASCII letters, got {self.lang!r}")
        if not isinstance(self.label, Label):
            raise CorpusError(f"review {self.id!r}: label must be a Label, got {self.label!r}")

    def to_json(self) -> dict:
        return {"id": self.id, "text": self.text, "label": self.label.value,
                "lang": self.lang, "domain": self.domain}

    @classmethod
    def from_json(cls, obj: dict) -> "Review":
        missing = [k for k in ("id", "text", "label", "lang", "domain") if k not in obj]
        if missing:
            raise CorpusError(f"missing keys: {', '.join(missing)}")
        return cls(id=str(obj["id"]), text=obj["text"], label=Label.parse(obj["label"]),
                   lang=obj["lang"], domain=str(obj["domain"]))


@dataclass(frozen=True)
class LabelDistribution:
    positives: int
    negatives: int
    unlabeled: int

    @property
    def total(self) -> int:
        return self.positives + self.negatives + self.unlabeled


@dataclass(frozen=True)
class LabeledDataset:
    reviews: tuple[Review, ...]
    name: str = "dataset"
    _ids: frozenset = field(default=frozenset(), init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "reviews", tuple(self.reviews))
        seen: set[str] = set()
        for r in self.reviews:
            if r.id in seen:
                raise CorpusError(f"dataset {self.name!r}: duplicate id {r.id!r}")
            seen.add(r.id)
        object.__setattr__(self, "_ids", frozenset(seen))

    def __len__(self) -> int:
        return len(self.reviews)

    def __iter__(self):
        return iter(self.reviews)

    def __getitem__(self, i):
        return self.reviews[i]

    @property
    def ids(self) -> list[str]:
        return [r.id for r in self.reviews]

    @property
    def texts(self) -> list[str]:
        return [r.text for r in self.reviews]

    def labels(self) -> list[int]:
        """Class indices (0 = negative, 1 = positive); fails on unlabeled reviews."""
        return [r.label.as_int() for r in self.reviews]

    def subset(self, indices: Iterable[int], name: str | None = None) -> "LabeledDataset":
        return LabeledDataset(tuple(self.reviews[i] for i in indices), name=name or self.name)

    def with_reviews(self, reviews: Sequence[Review]) -> "LabeledDataset":
        return LabeledDataset(tuple(reviews), name=self.name)


def require_nonempty(ds: LabeledDataset) -> LabeledDataset:
    if len(ds) == 0:
        raise CorpusError("dataset is empty")
    return ds


def require_labeled(ds: LabeledDataset) -> LabeledDataset:
    require_nonempty(ds)
    for r in ds:
        if r.label is Label.UNLABELED:
            raise CorpusError(f"dataset {ds.name!r}: review {r.id!r} is unlabeled")
    return ds


def load_jsonl(path, name: str | None = None) -> LabeledDataset:
    path = Path(path)
    reviews = []
    seen: dict[str, int] = {}
    with path.open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusError(f"{path}:{lineno}: malformed JSON ({exc.msg})") from None
            if not isinstance(obj, dict):
                raise CorpusError(f"{path}:{lineno}: expected a JSON object")
            try:
                review = Review.from_json(obj)
            except CorpusError as exc:
                raise CorpusError(f"{path}:{lineno}: {exc}") from None
            if review.id in seen:
                raise CorpusError(f"{path}:{lineno}: duplicate id {review.id!r} (first seen on line {seen[review.id]})")
            seen[review.id] = lineno
            reviews.append(review)
    if not reviews:
        raise CorpusError("dataset is empty")
    return LabeledDataset(tuple(reviews), name=name or path.stem)


def save_jsonl(ds: LabeledDataset, path) -> None:
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="\n") as fh:
        for r in ds:
            fh.write(json.dumps(r.to_json(), ensure_ascii=False) + "\n")


def label_distribution(ds: LabeledDataset) -> LabelDistribution:
    pos = neg = unl = 0
    for r in ds:
        if r.label is Label.POSITIVE:
            pos += 1
        elif r.label is Label.NEGATIVE:
            neg += 1
        else:
            unl += 1
    return LabelDistribution(pos, neg, unl)


def merge(datasets: Sequence[LabeledDataset], name: str | None = None) -> LabeledDataset:
    """Concatenate datasets in order.

    Ids that occur in more than one input are rewritten as ``"<dataset name>:<id>"``
    in every dataset that carries them; unique ids are kept verbatim.
    """
    if not datasets:
        raise CorpusError("merge needs at least one dataset")
    if len(datasets) == 1:
        return datasets[0]
    counts: dict[str, int] = {}
    for ds in datasets:
        for r in ds:
            counts[r.id] = counts.get(r.id, 0) + 1
    out = []
    for ds in datasets:
        for r in ds:
            out.append(replace(r, id=f"{ds.name}:{r.id}") if counts[r.id] > 1 else r)
    return LabeledDataset(tuple(out), name=name or "+".join(ds.name for ds in datasets))
