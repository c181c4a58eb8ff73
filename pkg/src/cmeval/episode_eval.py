"""Episode-level scoring: onset/offset accuracy, detection latency and burden."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import _intervals
from .aggregation import DEFAULT_MATCH_TOLERANCE, Notification
from .timeline import DAY, SECOND, EpisodeAnnotation, Segments

DEFAULT_MIN_DURATION = 30 * SECOND


@dataclass(frozen=True)
class PredictedEpisode:
    subject_id: str
    onset: int
    offset: int
    support: int = 1

    @property
    def duration(self) -> int:
        return self.offset - self.onset


def default_merge_gap(segments: Segments) -> int:
    """Twice the median start-to-start stride of the segments (0 if undefined)."""
    if len(segments) < 2:
        return 0
    return int(2 * np.median(np.diff(segments.start)))


def extract_episodes(
    segments: Segments,
    positive_threshold: float = 0.5,
    merge_gap: int | None = None,
    min_duration: int = DEFAULT_MIN_DURATION,
    subject_id: str = "",
) -> list[PredictedEpisode]:
    """Union positive segments into episodes.

    Segments scoring at least ``positive_threshold`` are unioned, runs whose
    gap is at most ``merge_gap`` are joined, and episodes shorter than
    ``min_duration`` are dropped. ``merge_gap=None`` uses
    :func:`default_merge_gap`.
    """
    if merge_gap is None:
        merge_gap = default_merge_gap(segments)
    if merge_gap < 0 or min_duration < 0:
        raise ValueError("merge_gap and min_duration must be non-negative")
    pos = segments.score >= positive_threshold
    on, off, support = _intervals.merge(segments.start[pos], segments.end[pos], gap=merge_gap)
    keep = (off - on) >= min_duration
    return [PredictedEpisode(subject_id, int(a), int(b), int(n))
            for a, b, n in zip(on[keep], off[keep], support[keep])]


@dataclass(frozen=True)
class EpisodeMatch:
    pairs: list[tuple[EpisodeAnnotation, PredictedEpisode]]
    unmatched_truth: list[EpisodeAnnotation]
    unmatched_predicted: list[PredictedEpisode]

    @property
    def sensitivity(self) -> float | None:
        n = len(self.pairs) + len(self.unmatched_truth)
        return len(self.pairs) / n if n else None

    @property
    def precision(self) -> float | None:
        n = len(self.pairs) + len(self.unmatched_predicted)
        return len(self.pairs) / n if n else None


def _by_subject(items):
    out: dict[str, list] = {}
    for x in items:
        out.setdefault(x.subject_id, []).append(x)
    for v in out.values():
        v.sort(key=lambda e: (e.onset, e.offset))
    return out


def match_episodes(predicted: Iterable[PredictedEpisode], truth: Iterable[EpisodeAnnotation]) -> EpisodeMatch:
    """Greedy one-to-one matching by descending overlap, per subject.

    Any positive overlap makes a pair eligible. Ties in overlap are broken by
    earlier truth onset, then earlier predicted onset.
    """
    pred_by = _by_subject(predicted)
    truth_by = _by_subject(truth)
    pairs, lost_truth, lost_pred = [], [], []
    for sid in sorted(set(pred_by) | set(truth_by)):
        P = pred_by.get(sid, [])
        T = truth_by.get(sid, [])
        it, ip, ov = _intervals.overlap_pairs(
            [t.onset for t in T], [t.offset for t in T], [p.onset for p in P], [p.offset for p in P])
        order = np.lexsort((ip, it, -ov))
        used_t, used_p = set(), set()
        for k in order:
            a, b = int(it[k]), int(ip[k])
            if a in used_t or b in used_p:
                continue
            used_t.add(a)
            used_p.add(b)
            pairs.append((T[a], P[b]))
        lost_truth.extend(t for i, t in enumerate(T) if i not in used_t)
        lost_pred.extend(p for i, p in enumerate(P) if i not in used_p)
    pairs.sort(key=lambda tp: (tp[0].subject_id, tp[0].onset))
    return EpisodeMatch(pairs, lost_truth, lost_pred)


@dataclass(frozen=True)
class ErrorSummary:
    errors: np.ndarray
    mean: float
    median: float
    mean_abs: float

    @classmethod
    def of(cls, errors) -> ErrorSummary:
        e = np.asarray(errors, dtype=np.int64)
        return cls(e, float(e.mean()), float(np.median(e)), float(np.abs(e).mean()))

    def as_dict(self, scale: float = 1.0) -> dict:
        return {"n": int(self.errors.size), "mean": self.mean / scale,
                "median": self.median / scale, "mean_abs": self.mean_abs / scale}


@dataclass(frozen=True)
class OnsetOffsetErrors:
    onset: ErrorSummary
    offset: ErrorSummary


def onset_offset_errors(match: EpisodeMatch) -> OnsetOffsetErrors:
    """Signed errors in ms (predicted minus true; positive means late)."""
    if not match.pairs:
        raise ValueError("no matched episodes")
    return OnsetOffsetErrors(
        ErrorSummary.of([p.onset - t.onset for t, p in match.pairs]),
        ErrorSummary.of([p.offset - t.offset for t, p in match.pairs]),
    )


@dataclass(frozen=True)
class DetectionLatency:
    latencies: np.ndarray
    n_episodes: int
    n_undetected: int

    @property
    def fraction_undetected(self) -> float | None:
        return self.n_undetected / self.n_episodes if self.n_episodes else None

    @property
    def mean(self) -> float | None:
        return float(self.latencies.mean()) if self.latencies.size else None

    @property
    def median(self) -> float | None:
        return float(np.median(self.latencies)) if self.latencies.size else None


def time_to_detection(
    truth: Iterable[EpisodeAnnotation],
    notifications: Iterable[Notification] | Mapping[str, Sequence[Notification]],
    tolerance: int = DEFAULT_MATCH_TOLERANCE,
) -> DetectionLatency:
    """Latency from each true onset to the first notification at or after it.

    Only notifications no later than ``offset + tolerance`` count; an earlier
    notification never credits a later episode.
    """
    if isinstance(notifications, Mapping):
        notifications = [n for v in notifications.values() for n in v]
    times_by: dict[str, list[int]] = {}
    for n in notifications:
        times_by.setdefault(n.subject_id, []).append(n.time)
    latencies = []
    n_eps = undetected = 0
    for sid, eps in _by_subject(truth).items():
        times = np.asarray(times_by.get(sid, []), dtype=np.int64)
        if np.any(np.diff(times) < 0):
            raise ValueError("notifications must be sorted by time")
        onset = np.array([e.onset for e in eps], dtype=np.int64)
        offset = np.array([e.offset for e in eps], dtype=np.int64)
        j = np.searchsorted(times, onset, side="left")
        ok = j < times.size
        ok[ok] = times[j[ok]] <= offset[ok] + tolerance
        latencies.append(times[j[ok]] - onset[ok])
        n_eps += onset.size
        undetected += int((~ok).sum())
    lat = np.concatenate(latencies) if latencies else np.zeros(0, np.int64)
    return DetectionLatency(np.sort(lat), n_eps, undetected)


def _burden(intervals, window) -> float:
    lo, hi = int(window[0]), int(window[1])
    if hi <= lo:
        raise ValueError("burden window must be non-empty")
    rows = sorted((int(a), int(b)) for a, b in intervals)
    on = np.array([r[0] for r in rows], dtype=np.int64)
    off = np.array([r[1] for r in rows], dtype=np.int64)
    if on.size > 1 and np.any(on[1:] < off[:-1]):
        on, off, _ = _intervals.merge(on, off)
    return float(_intervals.overlap_with_union([lo], [hi], on, off)[0]) / (hi - lo)


@dataclass(frozen=True)
class BurdenError:
    predicted: float
    true: float

    @property
    def signed_error(self) -> float:
        return self.predicted - self.true

    @property
    def absolute_error(self) -> float:
        return abs(self.predicted - self.true)


def burden_error(
    predicted: Iterable[PredictedEpisode],
    truth: Iterable[EpisodeAnnotation],
    window: tuple[int, int],
) -> BurdenError:
    """Predicted and true burden over ``window`` for one subject's episodes."""
    return BurdenError(
        _burden(((p.onset, p.offset) for p in predicted), window),
        _burden(((t.onset, t.offset) for t in truth), window),
    )


@dataclass(frozen=True)
class EpisodeStats:
    count: int
    per_day: float
    duration_min: float | None
    duration_median: float | None
    duration_mean: float | None
    duration_max: float | None
    burden: float

    def as_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


def episode_stats(episodes: Iterable, monitored_windows: Sequence[tuple[int, int]]) -> EpisodeStats:
    """Frequency, duration summary (seconds) and burden inside the monitored windows."""
    w_on = np.array([w[0] for w in monitored_windows], dtype=np.int64)
    w_off = np.array([w[1] for w in monitored_windows], dtype=np.int64)
    monitored = int((w_off - w_on).sum())
    if monitored <= 0:
        raise ValueError("monitored time must be positive")
    eps = list(episodes)
    on = np.array([e.onset for e in eps], dtype=np.int64)
    off = np.array([e.offset for e in eps], dtype=np.int64)
    inside = _intervals.overlap_with_union(on, off, w_on, w_off)
    dur = inside[inside > 0] / SECOND
    summary = (float(dur.min()), float(np.median(dur)), float(dur.mean()), float(dur.max())) if dur.size else (None,) * 4
    return EpisodeStats(int(dur.size), dur.size / (monitored / DAY), *summary, float(inside.sum()) / monitored)


def write_episodes(path, match: EpisodeMatch):
    """Predicted episodes with their match status and signed errors."""
    rows = [(p.subject_id, p.onset, p.offset, True, p.onset - t.onset, p.offset - t.offset)
            for t, p in match.pairs]
    rows += [(p.subject_id, p.onset, p.offset, False, "", "") for p in match.unmatched_predicted]
    rows.sort(key=lambda r: (r[0], r[1]))
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("subject_id", "onset_ms", "offset_ms", "matched", "onset_err_ms", "offset_err_ms"))
        for r in rows:
            w.writerow((r[0], r[1], r[2], "true" if r[3] else "false", r[4], r[5]))
