"""Measurement schedules and notification rules over segment scores.

A :class:`Schedule` turns a subject's scored segments into periodic
measurements (one per slot with data); a :class:`NotificationRule` turns the
flag stream of those measurements into user notifications.  A notification is
stamped with the time of the measurement that completes the rule condition,
and a rule stays silent for ``cooldown`` after firing.
"""

from __future__ import annotations

import csv
import itertools
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator, Mapping, NamedTuple, Sequence, Union

import numpy as np

from . import _intervals
from .timeline import DAY, HOUR, MINUTE, Dataset, Segments

DEFAULT_MATCH_TOLERANCE = 48 * HOUR
NO_COOLDOWN = 1  # ms; distinct measurement times are never suppressed


# -- schedules and measurements -----------------------------------------------

@dataclass(frozen=True)
class Schedule:
    """Measurements of length ``span`` started every ``period`` (start to start).

    Slots are aligned to ``origin`` (the Unix epoch by default). ``gate``
    restricts which segments may contribute: a scenario tag, a collection of
    tags, or ``None`` for no gating.
    """

    span: int
    period: int
    gate: str | frozenset | None = None
    origin: int = 0

    def __post_init__(self):
        if self.span <= 0 or self.period <= 0:
            raise ValueError("schedule span and period must be positive")
        if self.gate is not None and not isinstance(self.gate, str):
            object.__setattr__(self, "gate", frozenset(self.gate))

    def gate_mask(self, scenario: np.ndarray) -> np.ndarray | None:
        if self.gate is None:
            return None
        if isinstance(self.gate, str):
            return scenario == self.gate
        return np.isin(scenario, list(self.gate))


class Measurement(NamedTuple):
    time: int
    flag: bool
    mean_score: float
    coverage: float


@dataclass(frozen=True, eq=False)
class Measurements:
    time: np.ndarray
    flag: np.ndarray
    mean_score: np.ndarray
    coverage: np.ndarray

    @classmethod
    def from_flags(cls, times, flags) -> Measurements:
        """Measurements with full coverage carrying only a flag (score 1 or 0)."""
        flags = np.asarray(flags, dtype=bool)
        return cls(np.asarray(times, dtype=np.int64), flags, flags.astype(float), np.ones(flags.size))

    def __len__(self) -> int:
        return self.time.size

    def __iter__(self) -> Iterator[Measurement]:
        for t, f, m, c in zip(self.time, self.flag, self.mean_score, self.coverage):
            yield Measurement(int(t), bool(f), float(m), float(c))


def apply_schedule(segments: Segments, schedule: Schedule, flag_threshold: float = 0.5) -> Measurements:
    """One measurement per schedule slot that has data after gating.

    ``mean_score`` is the overlap-duration-weighted mean of the segment scores
    inside the slot, ``coverage`` the fraction of the slot covered by the union
    of those segments, and ``flag`` is ``mean_score >= flag_threshold``.
    Measurements are stamped at the slot end.
    """
    if not 0 < flag_threshold < 1:
        raise ValueError("flag_threshold must lie in (0, 1)")
    mask = schedule.gate_mask(segments.scenario)
    if mask is not None:
        segments = segments[mask]
    if len(segments) == 0:
        z = np.zeros(0)
        return Measurements(np.zeros(0, np.int64), z.astype(bool), z, z.copy())
    start, end, score = segments.start, segments.end, segments.score
    if np.any(np.diff(start) < 0):
        order = np.argsort(start, kind="stable")
        start, end, score = start[order], end[order], score[order]

    span, period, origin = schedule.span, schedule.period, schedule.origin
    u_start, u_end, _ = _intervals.merge(start, end)
    # slots [a, a + span) with a = origin + j * period that touch the union
    j_lo = (u_start - origin - span) // period + 1
    j_hi = (u_end - 1 - origin) // period
    counts = np.maximum(j_hi - j_lo + 1, 0)
    j = np.repeat(j_lo, counts) + (np.arange(counts.sum()) - np.repeat(np.cumsum(counts) - counts, counts))
    j = np.unique(j)
    a = origin + j * period
    b = a + span

    ia, ib, ov = _intervals.overlap_pairs(a, b, u_start, u_end)
    covered = np.bincount(ia, weights=ov, minlength=a.size)
    ia2, ib2, ov2 = _intervals.overlap_pairs(a, b, start, end)
    weight = np.bincount(ia2, weights=ov2, minlength=a.size)
    weighted = np.bincount(ia2, weights=ov2 * score[ib2], minlength=a.size)
    keep = weight > 0
    mean = weighted[keep] / weight[keep]
    return Measurements(
        b[keep], mean >= flag_threshold, mean, np.minimum(covered[keep] / span, 1.0))


# -- rules ---------------------------------------------------------------------

@dataclass(frozen=True)
class Consecutive:
    """``k`` successive irregular measurements spanning at most ``max_span``."""

    k: int
    max_span: int | None = None

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.max_span is not None and self.max_span <= 0:
            raise ValueError("max_span must be positive")


@dataclass(frozen=True)
class MofN:
    """At least ``m`` irregular among the last ``n`` measurements."""

    m: int
    n: int

    def __post_init__(self):
        if not 1 <= self.m <= self.n:
            raise ValueError("MofN needs 1 <= m <= n")


@dataclass(frozen=True)
class CountInWindow:
    """At least ``m`` irregular measurements within a trailing ``window``."""

    m: int
    window: int

    def __post_init__(self):
        if self.m < 1:
            raise ValueError("m must be >= 1")
        if self.window <= 0:
            raise ValueError("window must be positive")


Variant = Union[Consecutive, MofN, CountInWindow]

VARIANT_NAMES = {"consecutive": Consecutive, "mofn": MofN, "count_in_window": CountInWindow}


@dataclass(frozen=True)
class NotificationRule:
    variant: Variant
    flag_threshold: float = 0.5
    cooldown: int | None = None
    name: str = ""

    def __post_init__(self):
        if not 0 < self.flag_threshold < 1:
            raise ValueError("flag_threshold must lie in (0, 1)")
        if self.cooldown is not None and self.cooldown <= 0:
            raise ValueError("cooldown must be positive")

    @property
    def effective_cooldown(self) -> int:
        if self.cooldown is not None:
            return self.cooldown
        v = self.variant
        if isinstance(v, CountInWindow):
            return v.window
        if isinstance(v, Consecutive) and v.max_span is not None:
            return v.max_span
        return NO_COOLDOWN

    @property
    def label(self) -> str:
        return self.name or describe_variant(self.variant)


def describe_variant(v: Variant) -> str:
    if isinstance(v, Consecutive):
        return f"consecutive(k={v.k}" + (f",max_span_ms={v.max_span})" if v.max_span else ")")
    if isinstance(v, MofN):
        return f"mofn(m={v.m},n={v.n})"
    return f"count_in_window(m={v.m},window_ms={v.window})"


class Notification(NamedTuple):
    subject_id: str
    time: int
    trigger_times: tuple[int, ...] = ()
    rule_name: str = ""


def _conditions(variant: Variant, flags: np.ndarray, times: np.ndarray) -> np.ndarray:
    """Boolean ``(rows, L)`` array: rule condition holds at each measurement."""
    rows, L = flags.shape
    pos = np.arange(L)
    if isinstance(variant, Consecutive):
        k = variant.k
        last_normal = np.maximum.accumulate(np.where(flags, -1, pos), axis=1)
        cond = (pos - last_normal) >= k
        if variant.max_span is not None:
            ok = np.zeros(L, dtype=bool)
            if L >= k:
                ok[k - 1:] = times[k - 1:] - times[: L - k + 1] <= variant.max_span
            cond &= ok
        return cond
    csum = np.zeros((rows, L + 1), dtype=np.int32)
    np.cumsum(flags, axis=1, out=csum[:, 1:])
    if isinstance(variant, MofN):
        n = variant.n
        cond = np.zeros((rows, L), dtype=bool)
        if L >= n:
            cond[:, n - 1:] = (csum[:, n:] - csum[:, : L - n + 1]) >= variant.m
        return cond
    lo = np.searchsorted(times, times - variant.window, side="right")
    return (csum[:, 1:] - csum[:, lo]) >= variant.m


def evaluate_flags(rule: NotificationRule, flags, times) -> np.ndarray:
    """Firing mask for one or many flag sequences sharing the time axis ``times``.

    ``flags`` is ``(L,)`` or ``(rows, L)``; the result has the same shape.
    """
    flags = np.asarray(flags, dtype=bool)
    times = np.asarray(times, dtype=np.int64)
    one = flags.ndim == 1
    f2 = flags[None, :] if one else flags
    if times.shape != (f2.shape[1],):
        raise ValueError("times must match the flag sequence length")
    if np.any(np.diff(times) <= 0):
        raise ValueError("measurements must be sorted by strictly increasing time")
    cond = _conditions(rule.variant, f2, times)
    cooldown = rule.effective_cooldown
    if times.size < 2 or cooldown <= int(np.min(np.diff(times))):
        return cond[0] if one else cond  # the cooldown can never suppress
    if one:
        fire = np.zeros_like(cond)
        cand = np.flatnonzero(cond[0])
        ct = times[cand]
        i = 0
        while i < cand.size:
            fire[0, cand[i]] = True
            i = int(np.searchsorted(ct, ct[i] + cooldown, side="left"))
        return fire[0]
    fire = np.zeros_like(cond)
    last = np.full(f2.shape[0], np.iinfo(np.int64).min // 2, dtype=np.int64)
    for j in range(f2.shape[1]):
        f = cond[:, j] & (times[j] - last >= cooldown)
        fire[:, j] = f
        last[f] = times[j]
    return fire


def _trigger_times(variant: Variant, flags, times, i) -> tuple[int, ...]:
    if isinstance(variant, Consecutive):
        return tuple(times[i - variant.k + 1:i + 1].tolist())
    if isinstance(variant, MofN):
        lo = i - variant.n + 1
    else:
        lo = int(np.searchsorted(times, times[i] - variant.window, side="right"))
    return tuple(times[lo:i + 1][flags[lo:i + 1]].tolist())


def evaluate_rule(rule: NotificationRule, measurements: Measurements, subject_id: str = "") -> list[Notification]:
    """Notifications produced by ``rule`` on one subject's sorted measurements."""
    times = measurements.time
    flags = measurements.flag
    if len(times) == 0:
        return []
    fire = evaluate_flags(rule, flags, times)
    label = rule.label
    return [Notification(subject_id, int(times[i]), _trigger_times(rule.variant, flags, times, i), label)
            for i in np.flatnonzero(fire).tolist()]


# -- presets and config ------------------------------------------------------------

def preset(name: str) -> tuple[Schedule, NotificationRule]:
    """Schedule and rule of the large consumer-wearable AF studies.

    ``apple``: 1 min tachogram every 2 h, 5 consecutive irregular within 48 h.
    ``fitbit``: 5 min tachogram every 2.5 min, 11 successive irregular.
    ``huawei``: one evaluation every 10 min, more than ten AF measurements in 24 h.
    """
    if name == "apple":
        return (Schedule(span=1 * MINUTE, period=2 * HOUR),
                NotificationRule(Consecutive(k=5, max_span=48 * HOUR), name="apple"))
    if name == "fitbit":
        return (Schedule(span=5 * MINUTE, period=150_000),
                NotificationRule(Consecutive(k=11), cooldown=24 * HOUR, name="fitbit"))
    if name == "huawei":
        return (Schedule(span=10 * MINUTE, period=10 * MINUTE),
                NotificationRule(CountInWindow(m=11, window=24 * HOUR), name="huawei"))
    raise ValueError(f"unknown preset {name!r}")


PRESETS = ("apple", "fitbit", "huawei")


def schedule_from_config(cfg: Mapping) -> Schedule:
    return Schedule(int(cfg["span_ms"]), int(cfg["period_ms"]), cfg.get("gate_scenario"),
                    int(cfg.get("origin_ms", 0)))


def schedule_to_config(s: Schedule) -> dict:
    gate = s.gate if s.gate is None or isinstance(s.gate, str) else sorted(s.gate)
    return {"span_ms": s.span, "period_ms": s.period, "gate_scenario": gate, "origin_ms": s.origin}


def variant_from_config(cfg: Mapping) -> Variant:
    kind = cfg.get("variant")
    if kind == "consecutive":
        span = cfg.get("max_span_ms")
        return Consecutive(int(cfg["k"]), None if span is None else int(span))
    if kind == "mofn":
        return MofN(int(cfg["m"]), int(cfg["n"]))
    if kind == "count_in_window":
        return CountInWindow(int(cfg["m"]), int(cfg["window_ms"]))
    raise ValueError(f"unknown rule variant {kind!r}")


def rule_from_config(cfg: Mapping) -> NotificationRule:
    cooldown = cfg.get("cooldown_ms")
    return NotificationRule(
        variant_from_config(cfg),
        float(cfg.get("flag_threshold", 0.5)),
        None if cooldown is None else int(cooldown),
        str(cfg.get("name", "")),
    )


def rule_to_config(rule: NotificationRule) -> dict:
    v = rule.variant
    if isinstance(v, Consecutive):
        out = {"variant": "consecutive", "k": v.k, "max_span_ms": v.max_span}
    elif isinstance(v, MofN):
        out = {"variant": "mofn", "m": v.m, "n": v.n}
    else:
        out = {"variant": "count_in_window", "m": v.m, "window_ms": v.window}
    out.update(flag_threshold=rule.flag_threshold, cooldown_ms=rule.effective_cooldown, name=rule.label)
    return out


# -- cohort driver -----------------------------------------------------------------

def run_rule(dataset: Dataset, schedule: Schedule, rule: NotificationRule) -> dict[str, list[Notification]]:
    """Notifications per subject, keyed in sorted subject order."""
    out = {}
    for sid in dataset.subjects:
        m = apply_schedule(dataset.segments_of(sid), schedule, rule.flag_threshold)
        out[sid] = evaluate_rule(rule, m, sid)
    return out


def write_notifications(path, notifications: Iterable[Notification]):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("subject_id", "time_ms", "rule_name"))
        for n in sorted(notifications, key=lambda n: (n.subject_id, n.time)):
            w.writerow((n.subject_id, n.time, n.rule_name))


# -- interval-level predictions ---------------------------------------------------------

UNMONITORED = -1


@dataclass(frozen=True, eq=False)
class IntervalLabels:
    """Unit-aligned intervals; ``state`` is 1 positive, 0 negative, -1 unmonitored.

    ``score`` is the interval's aggregate score (NaN when unmonitored).
    """

    start: np.ndarray
    end: np.ndarray
    state: np.ndarray
    score: np.ndarray

    def __len__(self) -> int:
        return self.start.size

    @property
    def monitored(self) -> np.ndarray:
        return self.state != UNMONITORED


PositiveRule = Union[str, Callable[[np.ndarray, np.ndarray], float]]


def _interval_score(rule: PositiveRule, scores, durations) -> float:
    if rule == "mean":
        return float(np.average(scores, weights=durations))
    if callable(rule):
        return float(rule(scores, durations))
    raise ValueError(f"unknown positive_rule {rule!r}")


def interval_predictions(
    segments: Segments,
    unit: int,
    positive_rule: PositiveRule = "any",
    threshold: float = 0.5,
    span: tuple[int, int] | None = None,
    origin: int = 0,
) -> IntervalLabels:
    """Label each unit-aligned interval from the segments overlapping it.

    With ``positive_rule="any"`` the interval score is the maximum overlapping
    segment score, so an interval is positive iff some segment in it is.
    ``"mean"`` uses the duration-weighted mean; a callable receives
    ``(scores, overlap_durations)`` and returns the interval score.
    """
    if unit <= 0:
        raise ValueError("unit must be positive")
    if span is None:
        if len(segments) == 0:
            raise ValueError("span is required when there are no segments")
        span = (int(segments.start.min()), int(segments.end.max()))
    lo = origin + ((span[0] - origin) // unit) * unit
    hi = origin - ((origin - span[1]) // unit) * unit
    a = np.arange(lo, max(hi, lo + unit), unit, dtype=np.int64)
    b = a + unit
    score = np.full(a.size, np.nan)
    if len(segments):
        ia, ib, ov = _intervals.overlap_pairs(a, b, segments.start, segments.end)
        if isinstance(positive_rule, str) and positive_rule == "any":
            best = np.full(a.size, -np.inf)
            np.maximum.at(best, ia, segments.score[ib])
            has = np.isfinite(best)
            score[has] = best[has]
        else:
            bounds = np.r_[0, np.flatnonzero(np.diff(ia)) + 1, ia.size]
            for s0, s1 in zip(bounds[:-1], bounds[1:]):
                if s1 > s0:
                    score[ia[s0]] = _interval_score(positive_rule, segments.score[ib[s0:s1]], ov[s0:s1])
    state = np.where(np.isnan(score), UNMONITORED, (score >= threshold).astype(int))
    return IntervalLabels(a, b, state, score)


def interval_truth(labels: IntervalLabels, onset, offset) -> np.ndarray:
    """True where an interval overlaps any episode."""
    return _intervals.overlap_with_union(labels.start, labels.end, onset, offset) > 0


# -- notification scoring ------------------------------------------------------------

def _episodes_for(annotations, condition):
    if isinstance(annotations, Dataset):
        return annotations.episode_index(condition)
    if isinstance(annotations, Mapping):
        return annotations
    grouped: dict[str, list] = {}
    for a in annotations:
        if a.condition == condition:
            grouped.setdefault(a.subject_id, []).append((a.onset, a.offset))
    return {s: (np.array([r[0] for r in sorted(v)], dtype=np.int64),
                np.array([r[1] for r in sorted(v)], dtype=np.int64)) for s, v in grouped.items()}


def match_times(times, onset, offset, tolerance: int) -> np.ndarray:
    """True where ``onset <= t <= offset + tolerance`` for some episode."""
    times = np.asarray(times, dtype=np.int64)
    if onset.size == 0:
        return np.zeros(times.shape, dtype=bool)
    idx = np.searchsorted(onset, times, side="right") - 1
    return (idx >= 0) & (times <= offset[np.maximum(idx, 0)] + tolerance)


def detected_episodes(times, onset, offset, tolerance: int) -> np.ndarray:
    """True for each episode with some time in ``[onset, offset + tolerance]``."""
    times = np.sort(np.asarray(times, dtype=np.int64))
    j = np.searchsorted(times, onset, side="left")
    ok = j < times.size
    ok[ok] = times[j[ok]] <= offset[ok] + tolerance
    return ok


@dataclass(frozen=True)
class FalseNotificationStats:
    rate_per_day: float
    matched: int
    unmatched: int
    monitored_days: float


def false_notification_rate(
    notifications: Iterable[Notification] | Mapping[str, Sequence[Notification]],
    annotations,
    monitored_ms: int,
    condition: str = "AF",
    match_tolerance: int = DEFAULT_MATCH_TOLERANCE,
) -> FalseNotificationStats:
    """Unmatched notifications per monitored day.

    A notification is matched when it falls inside an episode of the same
    subject or within ``match_tolerance`` after the episode ends.
    """
    if monitored_ms <= 0:
        raise ValueError("monitored time must be positive")
    if isinstance(notifications, Mapping):
        notifications = [n for v in notifications.values() for n in v]
    episodes = _episodes_for(annotations, condition)
    by_subject: dict[str, list[int]] = {}
    for n in notifications:
        by_subject.setdefault(n.subject_id, []).append(n.time)
    matched = 0
    total = 0
    empty = (np.zeros(0, np.int64), np.zeros(0, np.int64))
    for sid, times in by_subject.items():
        onset, offset = episodes.get(sid, empty)
        matched += int(match_times(times, onset, offset, match_tolerance).sum())
        total += len(times)
    days = monitored_ms / DAY
    return FalseNotificationStats((total - matched) / days, matched, total - matched, days)


# -- rule sweeps ----------------------------------------------------------------------

@dataclass(frozen=True)
class RuleFamily:
    """One rule variant with fixed ``base`` parameters and a swept ``grid``.

    Parameter names follow the JSON rule config (``k``, ``max_span_ms``,
    ``m``, ``n``, ``window_ms``, ``cooldown_ms``, ``flag_threshold``).
    """

    name: str
    variant: str
    grid: Mapping[str, Sequence] = field(default_factory=dict)
    base: Mapping = field(default_factory=dict)

    def settings(self) -> list[dict]:
        keys = sorted(self.grid)
        combos = itertools.product(*(list(self.grid[k]) for k in keys))
        return [dict(zip(keys, c)) for c in combos]

    def rule(self, params: Mapping) -> NotificationRule:
        cfg = {"variant": self.variant, **self.base, **params}
        return rule_from_config(cfg)


@dataclass(frozen=True)
class SweepPoint:
    family: str
    params: dict
    precision: float | None
    recall: float
    n_notifications: int
    true_positives: int


@dataclass(frozen=True)
class SweepResult:
    points: list[SweepPoint]
    auprc: dict[str, float]
    pareto: dict[str, list[int]]
    truth_level: str


def pareto_front(precision: Sequence[float], recall: Sequence[float]) -> list[int]:
    """Indices of points not dominated in (precision, recall), sorted by recall."""
    pts = sorted(range(len(precision)), key=lambda i: (-recall[i], -precision[i], i))
    front = []
    best = -1.0
    for i in pts:
        if precision[i] > best:
            front.append(i)
            best = precision[i]
    return sorted(front, key=lambda i: (recall[i], -precision[i]))


def operating_point_ap(precision: Sequence[float], recall: Sequence[float]) -> float:
    """Area under the upper precision envelope of a set of operating points.

    Interpolated precision at recall ``r`` is the best precision among points
    with recall >= ``r``; the area is summed stepwise over the Pareto front.
    """
    front = pareto_front(precision, recall)
    area = 0.0
    prev_r = 0.0
    for i in front:
        area += (recall[i] - prev_r) * precision[i]
        prev_r = recall[i]
    return area


def sweep_rules(
    families: RuleFamily | Sequence[RuleFamily],
    dataset: Dataset,
    schedule: Schedule,
    condition: str = "AF",
    truth_level: str = "notification",
    match_tolerance: int = DEFAULT_MATCH_TOLERANCE,
) -> SweepResult:
    """Precision and recall of every grid setting, and AP per rule family.

    ``truth_level="notification"``: precision is the matched fraction of
    notifications, recall the fraction of episodes detected.
    ``truth_level="subject"``: a subject is positive when it has any episode
    and predicted positive when notified at least once.
    """
    if isinstance(families, RuleFamily):
        families = [families]
    if truth_level not in ("notification", "subject"):
        raise ValueError("truth_level must be 'notification' or 'subject'")
    settings = [(fam, p) for fam in families for p in fam.settings()]
    if not settings:
        raise ValueError("empty parameter grid")
    episodes = dataset.episode_index(condition)
    n_episodes = sum(v[0].size for v in episodes.values())
    positive_subjects = {s for s, v in episodes.items() if v[0].size}
    if truth_level == "notification" and n_episodes == 0:
        raise ValueError("truth has no episodes of the condition")
    if truth_level == "subject" and not positive_subjects:
        raise ValueError("no subject has an episode of the condition")

    cache: dict[float, dict[str, Measurements]] = {}
    points = []
    for fam, params in settings:
        rule = fam.rule(params)
        if rule.flag_threshold not in cache:
            cache[rule.flag_threshold] = {
                s: apply_schedule(dataset.segments_of(s), schedule, rule.flag_threshold)
                for s in dataset.subjects}
        n_total = tp = detected = 0
        notified = set()
        for sid, m in cache[rule.flag_threshold].items():
            if len(m) == 0:
                continue
            fire = evaluate_flags(rule, m.flag, m.time)
            times = m.time[fire]
            if times.size == 0:
                continue
            onset, offset = episodes.get(sid, (np.zeros(0, np.int64),) * 2)
            n_total += times.size
            tp += int(match_times(times, onset, offset, match_tolerance).sum())
            detected += int(detected_episodes(times, onset, offset, match_tolerance).sum())
            notified.add(sid)
        if truth_level == "notification":
            precision = tp / n_total if n_total else None
            recall = detected / n_episodes
            hits = tp
        else:
            hits = len(notified & positive_subjects)
            precision = hits / len(notified) if notified else None
            recall = hits / len(positive_subjects)
        points.append(SweepPoint(fam.name, dict(params), precision, recall, n_total, hits))

    auprc, pareto = {}, {}
    for fam in families:
        idx = [i for i, p in enumerate(points) if p.family == fam.name and p.precision is not None]
        prec = [points[i].precision for i in idx]
        rec = [points[i].recall for i in idx]
        auprc[fam.name] = operating_point_ap(prec, rec)
        pareto[fam.name] = [idx[i] for i in pareto_front(prec, rec)]
    return SweepResult(points, auprc, pareto, truth_level)
