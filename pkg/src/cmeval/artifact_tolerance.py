"""Artifact tolerance curves and their summaries.

The curve plots a performance metric against signal quality, where quality
is the per-segment good-signal fraction (``sqi``, i.e. one minus artifact
coverage). It is summarised three ways: the magnitude of the degradation
slope, the largest artifact coverage at which a performance floor still
holds, and the range-normalised area under the curve.
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from . import segment_metrics
from .timeline import DEFAULT_THETA, Dataset, truth_labels

log = logging.getLogger(__name__)

DECILES = tuple(np.round(np.linspace(0.0, 1.0, 11), 10))
DEFAULT_MIN_BIN_COUNT = 50


class ATCPoint(NamedTuple):
    quality: float
    metric_value: float
    n: int


def _metric(name: str, scores, labels, threshold) -> float | str:
    """Metric value, or the reason it is undefined."""
    if name not in segment_metrics.METRIC_NAMES:
        raise ValueError(f"unknown metric {name!r}")
    if name in ("auroc", "auprc"):
        ms = segment_metrics.scored_metrics(scores, labels, threshold).metrics
    else:
        ms = segment_metrics.basic_metrics(segment_metrics.confusion(scores >= threshold, labels))
    if name in ms.values:
        return ms.values[name]
    return ms.omitted[name]


def _merge_bins(groups: list[list], min_bin_count: int) -> list[list]:
    """Fold under-populated bins into the neighbour nearest in mean quality.

    Each group is ``[n, sqi_sum, member_bins]``.
    """
    groups = [g for g in groups if g[0] > 0]
    while len(groups) > 1:
        small = [i for i, g in enumerate(groups) if g[0] < min_bin_count]
        if not small:
            break
        i = min(small, key=lambda i: (groups[i][0], i))
        q = groups[i][1] / groups[i][0]
        nbrs = [j for j in (i - 1, i + 1) if 0 <= j < len(groups)]
        j = min(nbrs, key=lambda j: (abs(groups[j][1] / groups[j][0] - q), groups[j][0], j))
        a, b = min(i, j), max(i, j)
        merged = [groups[a][0] + groups[b][0], groups[a][1] + groups[b][1], groups[a][2] + groups[b][2]]
        groups[a:b + 1] = [merged]
    if not groups or (len(groups) == 1 and groups[0][0] < min_bin_count):
        raise ValueError("all quality bins are under-populated")
    return groups


def atc_from_arrays(
    sqi,
    scores,
    labels,
    metric: str = "accuracy",
    bins: Sequence[float] = DECILES,
    min_bin_count: int = DEFAULT_MIN_BIN_COUNT,
    threshold: float = 0.5,
) -> list[ATCPoint]:
    """Artifact tolerance curve from pooled per-segment arrays."""
    edges = np.asarray(bins, dtype=np.float64)
    if edges.size < 2 or np.any(np.diff(edges) <= 0) or edges[0] < 0 or edges[-1] > 1:
        raise ValueError("bin edges must be strictly increasing within [0, 1]")
    if metric not in segment_metrics.METRIC_NAMES:
        raise ValueError(f"unknown metric {metric!r}")
    sqi = np.asarray(sqi, dtype=np.float64)
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels, dtype=bool)
    idx = np.searchsorted(edges, sqi, side="right") - 1
    idx[sqi == edges[-1]] = edges.size - 2
    inside = (idx >= 0) & (idx < edges.size - 1)
    nb = edges.size - 1
    counts = np.bincount(idx[inside], minlength=nb)
    sums = np.bincount(idx[inside], weights=sqi[inside], minlength=nb)
    groups = _merge_bins([[int(counts[b]), float(sums[b]), [b]] for b in range(nb)], min_bin_count)

    points = []
    for n, s, members in groups:
        sel = inside & np.isin(idx, members)
        value = _metric(metric, scores[sel], labels[sel], threshold)
        if isinstance(value, str):
            log.info("quality bin %s dropped: %s", members, value)
            continue
        points.append(ATCPoint(s / n, float(value), n))
    if not points:
        raise ValueError(f"metric {metric!r} is undefined in every quality bin")
    return points


def atc(
    dataset: Dataset,
    metric: str = "accuracy",
    bins: Sequence[float] = DECILES,
    min_bin_count: int = DEFAULT_MIN_BIN_COUNT,
    condition: str = "AF",
    theta: float = DEFAULT_THETA,
    threshold: float = 0.5,
) -> list[ATCPoint]:
    """Artifact tolerance curve pooled over every segment of ``dataset``."""
    episodes = dataset.episode_index(condition)
    sqi, scores, labels = [], [], []
    for sid in dataset.subjects:
        seg = dataset.segments_of(sid)
        onset, offset = episodes[sid]
        sqi.append(seg.sqi)
        scores.append(seg.score)
        labels.append(truth_labels(seg.start, seg.end, onset, offset, theta))
    return atc_from_arrays(np.concatenate(sqi), np.concatenate(scores), np.concatenate(labels),
                           metric, bins, min_bin_count, threshold)


class Slope(NamedTuple):
    magnitude: float
    sign: int
    value: float


def ati_slope(points: Sequence[ATCPoint]) -> Slope:
    """Count-weighted least-squares slope of the metric against artifact fraction.

    A negative signed value means performance degrades as artifacts grow.
    """
    if len(points) < 2:
        raise ValueError("slope needs at least 2 curve points")
    x = 1.0 - np.array([p.quality for p in points])
    y = np.array([p.metric_value for p in points])
    w = np.array([p.n for p in points], dtype=np.float64)
    xm = np.average(x, weights=w)
    ym = np.average(y, weights=w)
    sxx = np.sum(w * (x - xm) ** 2)
    if sxx <= 0:
        raise ValueError("curve points share a single quality value")
    b = float(np.sum(w * (x - xm) * (y - ym)) / sxx)
    if abs(b) < 1e-12:
        b = 0.0
    return Slope(abs(b), int(np.sign(b)), b)


def ati_max_coverage(points: Sequence[ATCPoint], perf_min: float) -> float | None:
    """Largest artifact coverage down to which every cleaner bin meets ``perf_min``.

    Walks from the cleanest bin towards dirtier ones and interpolates linearly
    where the curve first drops below the floor. ``None`` means even the
    cleanest bin fails.
    """
    pts = sorted(points, key=lambda p: p.quality)
    if not pts:
        raise ValueError("empty curve")
    if pts[-1].metric_value < perf_min:
        return None
    q = pts[0].quality
    for lo, hi in zip(reversed(pts[:-1]), reversed(pts[1:])):
        if lo.metric_value < perf_min:
            q = lo.quality + (perf_min - lo.metric_value) * (hi.quality - lo.quality) / (
                hi.metric_value - lo.metric_value)
            break
    return 1.0 - q


def auatc(points: Sequence[ATCPoint]) -> float:
    """Trapezoidal area under the curve divided by the covered quality range."""
    pts = sorted(points, key=lambda p: p.quality)
    if len(pts) < 2:
        raise ValueError("area needs at least 2 curve points")
    q = np.array([p.quality for p in pts])
    v = np.array([p.metric_value for p in pts])
    width = q[-1] - q[0]
    if width <= 0:
        raise ValueError("curve covers a zero quality range")
    return float(np.sum(np.diff(q) * (v[1:] + v[:-1]) / 2.0) / width)


@dataclass(frozen=True)
class ATISummary:
    slope_magnitude: float | None
    slope_sign: int | None
    max_coverage: float | None
    perf_min: float
    auatc: float | None
    omitted: dict

    def as_dict(self) -> dict:
        return {
            "slope_magnitude": self.slope_magnitude,
            "slope_sign": self.slope_sign,
            "max_coverage": self.max_coverage,
            "perf_min": self.perf_min,
            "auatc": self.auatc,
            "omitted": dict(sorted(self.omitted.items())),
        }


def summarize(points: Sequence[ATCPoint], perf_min: float) -> ATISummary:
    omitted = {}
    slope = area = None
    if len(points) >= 2:
        s = ati_slope(points)
        slope = s
        area = auatc(points)
    else:
        omitted["slope_magnitude"] = omitted["auatc"] = "fewer than 2 curve points"
    cov = ati_max_coverage(points, perf_min)
    if cov is None:
        omitted["max_coverage"] = "unattainable: cleanest bin below perf_min"
    return ATISummary(
        slope.magnitude if slope else None, slope.sign if slope else None, cov, perf_min, area, omitted)


def write_atc(path, points: Sequence[ATCPoint]):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("quality", "metric_value", "n"))
        for p in points:
            w.writerow((repr(float(p.quality)), repr(float(p.metric_value)), int(p.n)))
