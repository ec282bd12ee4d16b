import pytest

from xlsent.baselines import (
    Lexicon, LexiconError, lexicon_label, lexicon_sums, majority_accuracy, majority_label, parse_sentiwordnet,
)
from xlsent.corpus import Label
from xlsent.estimators import LexiconClassifier, MajorityClassifier

from conftest import make_dataset

SWN = """# POS\tID\tPosScore\tNegScore\tSynsetTerms\tGloss
a\t00001\t0.75\t0\tgood#1 fine#2\tof high quality
a\t00002\t0.25\t0.125\tgood#3\tmorally fine
n\t00003\t0\t0.5\tbad#1 good_for_nothing#1\tpoor
v\t00004\t0.5\t0.5\tfine#1\tto impose a penalty
"""


@pytest.fixture
def swn(tmp_path):
    p = tmp_path / "swn.txt"
    p.write_text(SWN)
    return parse_sentiwordnet(p)


def test_majority_on_60_40():
    ds = make_dataset([("x", "pos")] * 60 + [("y", "neg")] * 40)
    assert majority_accuracy(ds) == 60.00
    assert majority_label(ds) is Label.POSITIVE
    tied = make_dataset([("x", "pos"), ("y", "neg")])
    assert majority_label(tied) is Label.NEGATIVE


def test_sentiwordnet_means(swn):
    # good: senses (0.75, 0) and (0.25, 0.125); fine: (0.75, 0) and (0.5, 0.5)
    assert swn["good"] == pytest.approx((0.5, 0.0625))
    assert swn["fine"] == pytest.approx((0.625, 0.25))
    assert swn["bad"] == (0.0, 0.5)
    assert "good_for_nothing" not in swn and len(swn) == 3


@pytest.mark.parametrize("line, msg", [
    ("a\t1\t0.5\t0\tgood#1\n", "6 tab-separated"),
    ("a\t1\tx\t0\tgood#1\tg\n", "PosScore"),
    ("a\t1\t0.5\t1.5\tgood#1\tg\n", r"outside \[0, 1\]"),
    ("a\t1\t0.5\t0\tgood\tg\n", "#sense"),
])
def test_sentiwordnet_errors(tmp_path, line, msg):
    p = tmp_path / "bad.txt"
    p.write_text(line)
    with pytest.raises(LexiconError, match=msg):
        parse_sentiwordnet(p)


def test_lexicon_sum_rule(swn):
    assert lexicon_sums(["good", "bad", "unknown"], swn) == pytest.approx((0.5, 0.5625))
    assert lexicon_label(["good", "fine"], swn) is Label.POSITIVE
    assert lexicon_label(["bad"], swn) is Label.NEGATIVE
    assert lexicon_label(["nothing", "known"], swn) is Label.NEGATIVE


def test_lexicon_tie_is_negative():
    lex = Lexicon({"meh": (0.25, 0.25), "up": (0.5, 0.0), "down": (0.0, 0.5)})
    assert lexicon_label(["meh"], lex) is Label.NEGATIVE
    assert lexicon_label(["up", "down"], lex) is Label.NEGATIVE


def test_empty_lexicon():
    with pytest.raises(LexiconError, match="empty lexicon"):
        lexicon_sums(["a"], Lexicon({}))


def test_estimator_wrappers(swn):
    clf = MajorityClassifier().fit(["a", "b", "c"], ["positive", "positive", "negative"])
    assert list(clf.predict(["x", "y"])) == ["positive", "positive"]
    assert clf.score(["x", "y"], ["positive", "negative"]) == 0.5
    lex = LexiconClassifier(swn).fit(y=["neg", "pos"])
    assert list(lex.predict(["good fine", "bad"])) == ["pos", "neg"]
