import json

import pytest
from hypothesis import given
from hypothesis import strategies as st

from xlsent.corpus import (
    CorpusError, Label, LabeledDataset, Review, label_distribution, load_jsonl, merge, require_labeled,
    save_jsonl,
)

from conftest import make_dataset, write_jsonl


def _obj(i, label="pos", text="nice", lang="en"):
    return {"id": str(i), "text": text, "label": label, "lang": lang, "domain": "restaurant"}


def test_label_parse_and_indices():
    assert Label.parse("pos") is Label.POSITIVE
    assert Label.parse(None) is Label.UNLABELED
    assert Label.POSITIVE.as_int() == 1 and Label.NEGATIVE.as_int() == 0
    assert Label.from_int(0) is Label.NEGATIVE
    with pytest.raises(CorpusError, match="unknown label"):
        Label.parse("neutral")
    with pytest.raises(CorpusError):
        Label.UNLABELED.as_int()


def test_review_validation():
    with pytest.raises(CorpusError, match="empty text"):
        Review("a", "   ", Label.POSITIVE, "en", "x")
    with pytest.raises(CorpusError, match="lang"):
        Review("a", "ok", Label.POSITIVE, "ENG", "x")


def test_load_roundtrip(tmp_path):
    path = write_jsonl(tmp_path / "d.jsonl", [_obj(1), _obj(2, "neg", "bad", "es"), _obj(3, None)])
    ds = load_jsonl(path)
    assert ds.name == "d"
    assert ds.ids == ["1", "2", "3"]
    assert ds[1].lang == "es"
    save_jsonl(ds, tmp_path / "out.jsonl")
    assert load_jsonl(tmp_path / "out.jsonl").reviews == ds.reviews


def test_load_errors_carry_line_numbers(tmp_path):
    path = tmp_path / "bad.jsonl"
    path.write_text(json.dumps(_obj(1)) + "\n{not json\n")
    with pytest.raises(CorpusError, match=":2: malformed JSON"):
        load_jsonl(path)
    write_jsonl(path, [_obj(1), _obj(1)])
    with pytest.raises(CorpusError, match="duplicate id"):
        load_jsonl(path)
    write_jsonl(path, [{"id": "1", "text": "x"}])
    with pytest.raises(CorpusError, match="missing keys"):
        load_jsonl(path)
    path.write_text("\n\n")
    with pytest.raises(CorpusError, match="dataset is empty"):
        load_jsonl(path)


def test_require_labeled_rejects_unlabeled():
    ds = make_dataset([("fine", "pos"), ("meh", None)])
    with pytest.raises(CorpusError, match="unlabeled"):
        require_labeled(ds)
    with pytest.raises(CorpusError, match="empty"):
        require_labeled(LabeledDataset(()))


def test_distribution():
    ds = make_dataset([("a", "pos"), ("b", "pos"), ("c", "neg"), ("d", None)])
    dist = label_distribution(ds)
    assert (dist.positives, dist.negatives, dist.unlabeled, dist.total) == (2, 1, 1, 4)


def test_merge_prefixes_colliding_ids_only():
    a = LabeledDataset((Review("1", "x", Label.POSITIVE, "en", "d"), Review("2", "y", Label.NEGATIVE, "en", "d")), "a")
    b = LabeledDataset((Review("1", "z", Label.POSITIVE, "en", "d"),), "b")
    merged = merge([a, b])
    assert merged.ids == ["a:1", "2", "b:1"]
    with pytest.raises(CorpusError):
        merge([])


@given(st.lists(st.tuples(st.text(min_size=1).filter(str.strip), st.sampled_from(["pos", "neg", None])),
                min_size=1, max_size=20))
def test_jsonl_roundtrip_property(tmp_path_factory, rows):
    ds = make_dataset(rows)
    path = tmp_path_factory.mktemp("rt") / "x.jsonl"
    save_jsonl(ds, path)
    assert load_jsonl(path).reviews == ds.reviews
