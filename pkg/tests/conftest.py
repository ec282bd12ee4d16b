import json

import numpy as np
import pytest

from xlsent.corpus import Label, LabeledDataset, Review
from xlsent.embeddings import EmbeddingTable, project
from xlsent.model import Hyperparams
from xlsent.textproc import build_vocab


def make_dataset(rows, name="fixture", lang="en", domain="test"):
    """``rows`` is a list of ``(text, label)`` with label in {"pos", "neg", None}."""
    reviews = [Review(f"r{i}", text, Label.parse(lab), lang, domain) for i, (text, lab) in enumerate(rows)]
    return LabeledDataset(tuple(reviews), name=name)


def write_jsonl(path, objs):
    path.write_text("".join(json.dumps(o) + "\n" for o in objs), encoding="utf-8")
    return path


@pytest.fixture
def toy_reviews():
    return make_dataset([
        ("great food and lovely staff", "pos"),
        ("awful service, cold food", "neg"),
        ("lovely place", "pos"),
        ("terrible and awful", "neg"),
        ("great great great", "pos"),
        ("cold soup, terrible wait", "neg"),
    ])


@pytest.fixture
def tiny_setup(toy_reviews):
    """Vocabulary, 8-dim embedding matrix and a small architecture."""
    vocab = build_vocab([toy_reviews])
    rng = np.random.default_rng(0)
    table = EmbeddingTable({w: rng.normal(size=8) for w in vocab.words}, 8)
    emb = project(vocab, table, 8)
    hp = Hyperparams(emb_dim=8, hidden=5, layers=2, max_len=12)
    return vocab, emb, hp
