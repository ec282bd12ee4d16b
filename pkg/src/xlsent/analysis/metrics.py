"""Accuracy, false-positive/false-negative decomposition and relative improvements."""

from __future__ import annotations

from dataclasses import asdict, dataclass
from decimal import Decimal
from typing import Iterable, Sequence

from ..corpus import Label, LabeledDataset, require_labeled
from ..reporting import format_table, round_half_up
from ..textproc import WordList, contains_non_english, tokenize


class EvaluationError(ValueError):
    pass


@dataclass(frozen=True)
class EvalReport:
    total: int
    correct: int
    accuracy_pct: float
    tp: int
    tn: int
    fp: int
    fn: int
    fp_share_pct: float
    fn_share_pct: float
    no_errors: bool
    non_english_miss_ratio_pct: float | None = None
    misclassified_with_non_english: int | None = None

    @property
    def errors(self) -> int:
        return self.fp + self.fn

    def to_json(self) -> dict:
        d = asdict(self)
        d["schema"] = 1
        return d


def _as_label(value) -> Label:
    if isinstance(value, Label):
        return value
    if hasattr(value, "label"):
        return value.label
    return Label.parse(value)


def evaluate(preds: Iterable[tuple[str, object]], gold: LabeledDataset,
             wordlist: WordList | None = None) -> EvalReport:
    """Score ``(id, label)`` pairs against ``gold``.

    Labels may be :class:`Label`, ``"pos"``/``"neg"`` or objects with a
    ``label`` attribute such as model predictions. When ``wordlist`` is given,
    the share of misclassified reviews whose (translated) gold text holds a
    word outside it is reported as ``non_english_miss_ratio_pct``.
    """
    require_labeled(gold)
    predicted: dict[str, Label] = {}
    for rid, lab in preds:
        if rid in predicted:
            raise EvaluationError(f"duplicate prediction for id {rid!r}")
        predicted[rid] = _as_label(lab)
    gold_ids = set(gold.ids)
    if set(predicted) != gold_ids:
        missing = sorted(gold_ids - set(predicted))[:5]
        extra = sorted(set(predicted) - gold_ids)[:5]
        raise EvaluationError(f"prediction ids do not match gold ids (missing {missing}, unexpected {extra})")
    tp = tn = fp = fn = 0
    misses = []
    for r in gold:
        p = predicted[r.id]
        if p is Label.UNLABELED:
            raise EvaluationError(f"prediction for {r.id!r} has no label")
        if p is Label.POSITIVE:
            if r.label is Label.POSITIVE:
                tp += 1
            else:
                fp += 1
                misses.append(r)
        else:
            if r.label is Label.NEGATIVE:
                tn += 1
            else:
                fn += 1
                misses.append(r)
    total = len(gold)
    errors = fp + fn
    if errors:
        fp_share = round_half_up(100.0 * fp / errors)
        # complement keeps the two shares summing to exactly 100.00
        fn_share = round_half_up(100.0 - fp_share)
    else:
        fp_share = fn_share = 0.0
    ratio = n_non_en = None
    if wordlist is not None:
        n_non_en = sum(contains_non_english(tokenize(r.text), wordlist) for r in misses)
        ratio = round_half_up(100.0 * n_non_en / errors) if errors else 0.0
    return EvalReport(total, tp + tn, round_half_up(100.0 * (tp + tn) / total), tp, tn, fp, fn,
                      fp_share, fn_share, errors == 0, ratio, n_non_en)


def accuracy_pct(preds: Iterable[tuple[str, object]], gold: LabeledDataset) -> float:
    return evaluate(preds, gold).accuracy_pct


def relative_improvement(new_pct: float, old_pct: float) -> float:
    """``100 * (new - old) / old`` rounded half-up to 2 decimals."""
    if old_pct <= 0:
        raise EvaluationError("relative improvement needs a positive reference accuracy")
    return round_half_up(100.0 * (new_pct - old_pct) / old_pct)


def mean_improvement(values: Sequence[float]) -> float:
    if not values:
        raise EvaluationError("mean of an empty list")
    # decimal arithmetic keeps already-rounded inputs exact
    total = sum(Decimal(repr(float(v))) for v in values)
    return round_half_up(float(total / len(values)))


def accuracy_table(rows: Sequence[tuple[str, float, float, float]]) -> str:
    """``(dataset, majority, lexicon, rnn)`` rows in the layout of an accuracy comparison."""
    return format_table(["Dataset", "Majority Baseline", "Lexicon-based Baseline", "RNN"], rows)


def error_table(reports: Sequence[tuple[str, EvalReport]]) -> str:
    rows = [(name, r.fp_share_pct, r.fn_share_pct) for name, r in reports]
    return format_table(["Dataset", "False positives", "False negatives"], rows)
