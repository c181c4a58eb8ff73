"""Segment-level classification metrics and threshold curves.

Ties in score are always processed as one block (a single threshold per
distinct score), so every result is independent of input order.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple

import numpy as np

METRIC_NAMES = ("accuracy", "sensitivity", "specificity", "ppv", "npv", "f1", "auroc", "auprc")


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int = 0
    fp: int = 0
    tn: int = 0
    fn: int = 0

    def __post_init__(self):
        if min(self.tp, self.fp, self.tn, self.fn) < 0:
            raise ValueError("confusion counts must be non-negative")

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn

    def __add__(self, other: ConfusionMatrix) -> ConfusionMatrix:
        return ConfusionMatrix(self.tp + other.tp, self.fp + other.fp,
                               self.tn + other.tn, self.fn + other.fn)

    def as_dict(self) -> dict[str, int]:
        return {"tp": self.tp, "fp": self.fp, "tn": self.tn, "fn": self.fn}


@dataclass(frozen=True)
class MetricSet:
    """Derived metrics; undefined ones are absent and listed in ``omitted``."""

    values: dict[str, float] = field(default_factory=dict)
    omitted: dict[str, str] = field(default_factory=dict)

    def __getattr__(self, name):
        if name in METRIC_NAMES:
            return self.values.get(name)
        raise AttributeError(name)

    def with_values(self, **extra) -> MetricSet:
        values = dict(self.values)
        omitted = dict(self.omitted)
        for k, v in extra.items():
            if isinstance(v, str):
                omitted[k] = v
                values.pop(k, None)
            else:
                values[k] = float(v)
                omitted.pop(k, None)
        return MetricSet(values, omitted)

    def as_dict(self) -> dict:
        return {"values": dict(sorted(self.values.items())), "omitted": dict(sorted(self.omitted.items()))}


class CurvePoint(NamedTuple):
    x: float
    y: float
    threshold: float


def confusion(pred, truth) -> ConfusionMatrix:
    pred = np.asarray(pred, dtype=bool)
    truth = np.asarray(truth, dtype=bool)
    if pred.shape != truth.shape:
        raise ValueError(f"length mismatch: {pred.size} predictions vs {truth.size} labels")
    if pred.size == 0:
        raise ValueError("empty input")
    tp = int(np.count_nonzero(pred & truth))
    fp = int(np.count_nonzero(pred & ~truth))
    fn = int(np.count_nonzero(~pred & truth))
    return ConfusionMatrix(tp, fp, pred.size - tp - fp - fn, fn)


def basic_metrics(cm: ConfusionMatrix) -> MetricSet:
    values, omitted = {}, {}

    def ratio(name, num, den, reason):
        if den > 0:
            values[name] = num / den
        else:
            omitted[name] = reason

    ratio("accuracy", cm.tp + cm.tn, cm.total, "no segments")
    ratio("sensitivity", cm.tp, cm.tp + cm.fn, "no positive truth")
    ratio("specificity", cm.tn, cm.tn + cm.fp, "no negative truth")
    ratio("ppv", cm.tp, cm.tp + cm.fp, "no positive predictions")
    ratio("npv", cm.tn, cm.tn + cm.fn, "no negative predictions")
    ratio("f1", 2 * cm.tp, 2 * cm.tp + cm.fp + cm.fn, "no positive truth or predictions")
    return MetricSet(values, omitted)


def _tie_blocks(scores, labels):
    """Cumulative (tp, fp) at each distinct threshold, highest score first."""
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels, dtype=bool)
    if scores.shape != labels.shape:
        raise ValueError("scores and labels differ in length")
    order = np.argsort(-scores, kind="stable")
    s = scores[order]
    y = labels[order]
    last = np.r_[np.flatnonzero(s[1:] != s[:-1]), s.size - 1]
    tp = np.cumsum(y)[last]
    fp = (last + 1) - tp
    return s[last], tp, fp


def auroc_from_counts(tp, fp) -> float:
    """Trapezoidal ROC area from cumulative tie-block counts, in exact integers."""
    tp0 = np.r_[0, np.asarray(tp, dtype=np.int64)]
    fp0 = np.r_[0, np.asarray(fp, dtype=np.int64)]
    area2 = int(np.sum(np.diff(fp0) * (tp0[1:] + tp0[:-1])))
    return area2 / (2.0 * int(tp0[-1]) * int(fp0[-1]))


def _roc_points(thr, tp, fp):
    tpr = np.r_[0.0, tp / tp[-1]]
    fpr = np.r_[0.0, fp / fp[-1]]
    return [CurvePoint(float(x), float(y), float(t)) for x, y, t in zip(fpr, tpr, np.r_[np.inf, thr])]


def _pr_points(thr, tp, fp):
    recall = tp / tp[-1]
    precision = tp / (tp + fp)
    return [CurvePoint(float(x), float(y), float(t)) for x, y, t in zip(recall, precision, thr)]


def roc_curve(scores, labels) -> tuple[list[CurvePoint], float]:
    """ROC points (fpr, tpr) from the strictest threshold down, and trapezoidal AUROC.

    The first point is ``(0, 0)`` at threshold ``+inf``.
    """
    thr, tp, fp = _tie_blocks(scores, labels)
    if tp.size == 0 or tp[-1] == 0 or fp[-1] == 0:
        raise ValueError("roc_curve needs at least one positive and one negative label")
    return _roc_points(thr, tp, fp), auroc_from_counts(tp, fp)


def average_precision_from_counts(tp, fp) -> float:
    """AP from cumulative tie-block counts: sum of precision times recall gained."""
    tp = np.asarray(tp)
    fp = np.asarray(fp)
    pos = tp[-1]
    gained = np.diff(np.r_[0, tp])
    return float(np.sum(gained * (tp / (tp + fp))) / pos)


def pr_curve(scores, labels) -> tuple[list[CurvePoint], float]:
    """Precision-recall points (recall, precision) in order of increasing recall.

    AUPRC is average precision: the mean, over positives, of the precision at
    the threshold equal to that positive's score.
    """
    thr, tp, fp = _tie_blocks(scores, labels)
    if tp.size == 0 or tp[-1] == 0:
        raise ValueError("pr_curve needs at least one positive label")
    return _pr_points(thr, tp, fp), average_precision_from_counts(tp, fp)


@dataclass(frozen=True)
class ScoredResult:
    confusion: ConfusionMatrix
    metrics: MetricSet
    roc: list[CurvePoint] | None
    pr: list[CurvePoint] | None


def scored_metrics(scores, labels, threshold: float = 0.5, curves: bool = False) -> ScoredResult:
    """Metric set at ``threshold`` plus AUROC/AUPRC where defined (one sort)."""
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels, dtype=bool)
    cm = confusion(scores >= threshold, labels)
    ms = basic_metrics(cm)
    thr, tp, fp = _tie_blocks(scores, labels)
    pos, neg = int(tp[-1]), int(fp[-1])
    roc = pr = None
    if pos and neg:
        ms = ms.with_values(auroc=auroc_from_counts(tp, fp))
        if curves:
            roc = _roc_points(thr, tp, fp)
    else:
        ms = ms.with_values(auroc="single-class truth")
    if pos:
        ms = ms.with_values(auprc=average_precision_from_counts(tp, fp))
        if curves:
            pr = _pr_points(thr, tp, fp)
    else:
        ms = ms.with_values(auprc="no positive truth")
    return ScoredResult(cm, ms, roc, pr)


def write_curve(path, points: Iterable[CurvePoint]):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("threshold", "x", "y"))
        for p in points:
            w.writerow((repr(float(p.threshold)), repr(float(p.x)), repr(float(p.y))))
