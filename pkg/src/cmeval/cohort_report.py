"""Cohort and scenario stratification, and the full evaluation report.

The report follows four parts: who was studied (cohort), under which
conditions (scenarios), how predictions are turned into notifications
(segment- and aggregation-level evaluation), and which outcome-oriented
metrics were measured (episodes and artifact tolerance). Every stratum is
re-evaluated with the same machinery as the pooled cohort.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from . import _intervals
from . import artifact_tolerance as at
from . import episode_eval as ee
from . import segment_metrics as sm
from .aggregation import (
    DEFAULT_MATCH_TOLERANCE, Notification, NotificationRule, Schedule, apply_schedule, detected_episodes,
    evaluate_rule, interval_predictions, interval_truth, match_times, preset, rule_to_config,
    schedule_to_config,
)
from .timeline import DAY, HOUR, SECOND, DEFAULT_THETA, Dataset, EpisodeAnnotation, truth_labels

SCHEMA_VERSION = "1.0"
UNSPECIFIED = "unspecified"
DEFAULT_MIN_SUBGROUP_SIZE = 20
UNITS = {"hour": HOUR, "day": DAY}
ADJECTIVE = {"hour": "hourly", "day": "daily"}
REPORT_KEYS = ("schema_version", "dataset", "config", "cohort", "scenarios", "segment_level",
               "aggregation_level", "episode_level", "artifact_tolerance", "strata")


# -- stratification -------------------------------------------------------------------------

def _attribute_groups(dataset: Dataset, attribute: str) -> dict[str, list[str]]:
    groups: dict[str, list[str]] = {}
    found = False
    for sid in dataset.subjects:
        value = dataset.profiles[sid].attributes.get(attribute)
        found |= value is not None
        groups.setdefault(value if value is not None else UNSPECIFIED, []).append(sid)
    if not found:
        raise ValueError(f"attribute {attribute!r} is absent from every subject")
    return dict(sorted(groups.items()))


def _scenario_key(tag) -> str:
    return UNSPECIFIED if tag is None or tag == "" else str(tag)


def _scenario_keys(scenario: np.ndarray) -> np.ndarray:
    keys = scenario.copy()
    keys[(keys == None) | (keys == "")] = UNSPECIFIED  # noqa: E711 (elementwise)
    return keys


def scenario_tags(dataset: Dataset) -> list[str]:
    tags = set()
    for seg in dataset.segments.values():
        tags.update(_scenario_key(t) for t in set(seg.scenario.tolist()))
    return sorted(tags)


def stratify(dataset: Dataset, attribute: str | None = None, scenario: bool = False) -> dict[str, Dataset]:
    """Partition subjects by a profile attribute, or segments by scenario tag.

    Subjects lacking the attribute, and untagged segments, form the
    ``"unspecified"`` stratum.
    """
    if (attribute is None) == (not scenario):
        raise ValueError("give exactly one of attribute or scenario=True")
    if attribute is not None:
        return {v: dataset.subset(ids) for v, ids in _attribute_groups(dataset, attribute).items()}
    tags = scenario_tags(dataset)
    if tags == [UNSPECIFIED] or not tags:
        raise ValueError("no scenario tags present")
    out = {}
    for tag in tags:
        segs = {}
        for sid, seg in dataset.segments.items():
            segs[sid] = seg[_scenario_keys(seg.scenario) == tag]
        out[tag] = dataset.with_segments(segs)
    return out


def study_level_sensitivity(notified_with_condition: int, not_notified_with_condition: int) -> float:
    """Share of participants with the condition who were notified."""
    total = notified_with_condition + not_notified_with_condition
    if notified_with_condition < 0 or not_notified_with_condition < 0:
        raise ValueError("counts must be non-negative")
    if total == 0:
        raise ValueError("no participants with the condition")
    return notified_with_condition / total


# -- configuration ------------------------------------------------------------------------------

@dataclass(frozen=True)
class EvalConfig:
    condition: str = "AF"
    preset: str | None = "apple"
    schedule: Schedule | None = None
    rule: NotificationRule | None = None
    theta: float = DEFAULT_THETA
    positive_threshold: float = 0.5
    units: tuple[str, ...] = ("hour", "day")
    match_tolerance: int = DEFAULT_MATCH_TOLERANCE
    merge_gap: int | None = None
    min_duration: int = ee.DEFAULT_MIN_DURATION
    atc_metric: str = "accuracy"
    bins: tuple[float, ...] = at.DECILES
    min_bin_count: int = at.DEFAULT_MIN_BIN_COUNT
    perf_min: float = 0.8
    stratify: tuple[str, ...] = ()
    stratify_scenarios: bool = True
    min_subgroup_size: int = DEFAULT_MIN_SUBGROUP_SIZE

    def __post_init__(self):
        if self.schedule is None or self.rule is None:
            if self.preset is None:
                raise ValueError("either a preset or both schedule and rule are required")
            s, r = preset(self.preset)
            object.__setattr__(self, "schedule", self.schedule or s)
            object.__setattr__(self, "rule", self.rule or r)
        for u in self.units:
            if u not in UNITS:
                raise ValueError(f"unknown unit {u!r} (expected hour or day)")
        if not 0 < self.theta <= 1:
            raise ValueError("theta must lie in (0, 1]")
        if not 0 < self.positive_threshold < 1:
            raise ValueError("positive_threshold must lie in (0, 1)")
        object.__setattr__(self, "units", tuple(self.units))
        object.__setattr__(self, "stratify", tuple(self.stratify))
        object.__setattr__(self, "bins", tuple(float(b) for b in self.bins))

    def to_dict(self) -> dict:
        return {
            "condition": self.condition,
            "preset": self.preset,
            "schedule": schedule_to_config(self.schedule),
            "rule": rule_to_config(self.rule),
            "theta": self.theta,
            "positive_threshold": self.positive_threshold,
            "units": list(self.units),
            "match_tolerance_ms": self.match_tolerance,
            "merge_gap_ms": self.merge_gap,
            "min_duration_ms": self.min_duration,
            "atc_metric": self.atc_metric,
            "bins": list(self.bins),
            "min_bin_count": self.min_bin_count,
            "perf_min": self.perf_min,
            "stratify": list(self.stratify),
            "stratify_scenarios": self.stratify_scenarios,
            "min_subgroup_size": self.min_subgroup_size,
        }


# -- per-subject evaluation -------------------------------------------------------------------------

@dataclass
class SubjectEval:
    subject_id: str
    windows: tuple[np.ndarray, np.ndarray]
    score: np.ndarray
    sqi: np.ndarray
    duration: np.ndarray
    truth: np.ndarray
    scenario: np.ndarray
    confusion: sm.ConfusionMatrix | None
    monitored_ms: int
    eligible_ms: int
    n_measurements: int
    notifications: list[Notification]
    notifications_matched: int
    episodes_detected: int
    truth_episodes: list[EpisodeAnnotation]
    predicted: list[ee.PredictedEpisode]
    match: ee.EpisodeMatch
    burden_true: float
    burden_predicted: float
    intervals: dict[str, tuple[np.ndarray, np.ndarray]] = field(default_factory=dict)


def _windows(profile):
    w = np.array(profile.monitored_windows, dtype=np.int64).reshape(-1, 2)
    return w[:, 0], w[:, 1]


def _subject_eval(dataset: Dataset, sid: str, episodes, cfg: EvalConfig) -> SubjectEval:
    seg = dataset.segments_of(sid)
    profile = dataset.profiles[sid]
    onset, offset = episodes.get(sid, (np.zeros(0, np.int64),) * 2)
    truth = truth_labels(seg.start, seg.end, onset, offset, cfg.theta)
    cm = sm.confusion(seg.score >= cfg.positive_threshold, truth) if len(seg) else None
    w_on, w_off = _windows(profile)
    monitored = int((w_off - w_on).sum())

    gate = cfg.schedule.gate_mask(seg.scenario)
    kept = seg if gate is None else seg[gate]
    u_on, u_off, _ = _intervals.merge(kept.start, kept.end)
    eligible = int((u_off - u_on).sum())

    meas = apply_schedule(seg, cfg.schedule, cfg.rule.flag_threshold)
    notes = evaluate_rule(cfg.rule, meas, sid)
    ntimes = np.array([n.time for n in notes], dtype=np.int64)
    matched = int(match_times(ntimes, onset, offset, cfg.match_tolerance).sum())
    detected = int(detected_episodes(ntimes, onset, offset, cfg.match_tolerance).sum())

    truth_eps = [EpisodeAnnotation(sid, cfg.condition, int(a), int(b)) for a, b in zip(onset, offset)]
    predicted = ee.extract_episodes(seg, cfg.positive_threshold, cfg.merge_gap, cfg.min_duration, sid)
    match = ee.match_episodes(predicted, truth_eps)
    p_on = np.array([p.onset for p in predicted], dtype=np.int64)
    p_off = np.array([p.offset for p in predicted], dtype=np.int64)
    if monitored > 0:
        b_true = float(_intervals.overlap_with_union(w_on, w_off, onset, offset).sum()) / monitored
        b_pred = float(_intervals.overlap_with_union(w_on, w_off, p_on, p_off).sum()) / monitored
    else:
        b_true = b_pred = float("nan")

    intervals = {}
    for unit in cfg.units:
        if monitored <= 0:
            continue
        lab = interval_predictions(seg, UNITS[unit], "any", cfg.positive_threshold,
                                   span=(int(w_on.min()), int(w_off.max())))
        mon = lab.monitored
        intervals[unit] = (lab.score[mon], interval_truth(lab, onset, offset)[mon], int((~mon).sum()))

    return SubjectEval(sid, (w_on, w_off), seg.score, seg.sqi, seg.duration, truth, _scenario_keys(seg.scenario), cm, monitored, eligible, len(meas), notes,
                       matched, detected, truth_eps, predicted, match, b_true, b_pred, intervals)


# -- section builders --------------------------------------------------------------------------------

def _f(x):
    if x is None:
        return None
    x = float(x)
    return None if x != x else x


def _segment_section(score, sqi, truth, cfg: EvalConfig, curves: bool):
    if score.size == 0:
        return {"omitted": "no segments"}, None
    res = sm.scored_metrics(score, truth, cfg.positive_threshold, curves=curves)
    sec = {"n_segments": int(score.size), "confusion": res.confusion.as_dict(), "metrics": res.metrics.as_dict()}
    return sec, res


def _atc_section(score, sqi, truth, cfg: EvalConfig):
    try:
        points = at.atc_from_arrays(sqi, score, truth, cfg.atc_metric, cfg.bins, cfg.min_bin_count,
                                    cfg.positive_threshold)
    except ValueError as exc:
        return {"metric": cfg.atc_metric, "omitted": str(exc)}, []
    summary = at.summarize(points, cfg.perf_min)
    return {
        "metric": cfg.atc_metric,
        "points": [{"quality": p.quality, "metric_value": p.metric_value, "n": p.n} for p in points],
        "summary": summary.as_dict(),
    }, points


def _aggregation_section(subjects: Sequence[SubjectEval], cfg: EvalConfig):
    monitored = sum(s.monitored_ms for s in subjects)
    eligible = sum(s.eligible_ms for s in subjects)
    notes = [n for s in subjects for n in s.notifications]
    n_notes = len(notes)
    matched = sum(s.notifications_matched for s in subjects)
    n_eps = sum(len(s.truth_episodes) for s in subjects)
    detected = sum(s.episodes_detected for s in subjects)
    sec = {
        "schedule": schedule_to_config(cfg.schedule),
        "rule": rule_to_config(cfg.rule),
        "monitored_hours": monitored / HOUR,
        "eligible_hours": eligible / HOUR,
        "gated_out_hours": (monitored - eligible) / HOUR,
        "n_measurements": sum(s.n_measurements for s in subjects),
        "n_notifications": n_notes,
        "omitted": {},
    }
    if monitored > 0:
        days = monitored / DAY
        sec["notifications_per_day"] = n_notes / days
        sec["false_notifications"] = {"matched": matched, "unmatched": n_notes - matched,
                                      "rate_per_day": (n_notes - matched) / days}
    else:
        sec["omitted"]["false_notifications"] = "no monitored time"
    if n_notes:
        sec["notification_precision"] = matched / n_notes
    else:
        sec["omitted"]["notification_precision"] = "no notifications"
    if n_eps:
        sec["episode_recall"] = detected / n_eps
    else:
        sec["omitted"]["episode_recall"] = "no true episodes"

    positive = [s for s in subjects if s.truth_episodes]
    notified = {s.subject_id for s in subjects if s.notifications}
    hit = sum(1 for s in positive if s.subject_id in notified)
    subject_level = {"notified": len(notified), "with_condition": len(positive),
                     "notified_with_condition": hit, "omitted": {}}
    if positive:
        subject_level["sensitivity"] = study_level_sensitivity(hit, len(positive) - hit)
    else:
        subject_level["omitted"]["sensitivity"] = "no subject with the condition"
    if notified:
        subject_level["ppv"] = hit / len(notified)
    else:
        subject_level["omitted"]["ppv"] = "no subject notified"
    sec["subject_level"] = subject_level

    latency = ee.time_to_detection([e for s in subjects for e in s.truth_episodes],
                                   sorted(notes, key=lambda n: (n.subject_id, n.time)), cfg.match_tolerance)
    ttd = {"n_episodes": latency.n_episodes, "n_undetected": latency.n_undetected,
           "fraction_undetected": _f(latency.fraction_undetected)}
    if latency.latencies.size:
        ttd.update(mean_s=latency.mean / SECOND, median_s=latency.median / SECOND,
                   max_s=float(latency.latencies.max()) / SECOND)
    sec["time_to_detection"] = ttd

    intervals = {}
    for unit in cfg.units:
        parts = [s.intervals[unit] for s in subjects if unit in s.intervals]
        score = np.concatenate([p[0] for p in parts]) if parts else np.zeros(0)
        truth = np.concatenate([p[1] for p in parts]) if parts else np.zeros(0, bool)
        unmon = sum(p[2] for p in parts)
        if score.size:
            res = sm.scored_metrics(score, truth, cfg.positive_threshold)
            intervals[unit] = {"n_intervals": int(score.size), "n_unmonitored": unmon,
                               "confusion": res.confusion.as_dict(), "metrics": res.metrics.as_dict()}
        else:
            intervals[unit] = {"n_intervals": 0, "n_unmonitored": unmon, "omitted": "no monitored intervals"}
    sec["intervals"] = intervals
    return sec


def _episode_section(subjects: Sequence[SubjectEval], cfg: EvalConfig):
    pairs = [p for s in subjects for p in s.match.pairs]
    lost_t = [t for s in subjects for t in s.match.unmatched_truth]
    lost_p = [p for s in subjects for p in s.match.unmatched_predicted]
    match = ee.EpisodeMatch(pairs, lost_t, lost_p)
    sec = {"n_truth": len(pairs) + len(lost_t), "n_predicted": len(pairs) + len(lost_p),
           "n_matched": len(pairs), "omitted": {}}
    for name, value, reason in (("sensitivity", match.sensitivity, "no true episodes"),
                                ("precision", match.precision, "no predicted episodes")):
        if value is None:
            sec["omitted"][name] = reason
        else:
            sec[name] = value
    if pairs:
        err = ee.onset_offset_errors(match)
        sec["onset_error_s"] = err.onset.as_dict(SECOND)
        sec["offset_error_s"] = err.offset.as_dict(SECOND)
    else:
        sec["omitted"]["onset_error_s"] = sec["omitted"]["offset_error_s"] = "no matched episodes"
    with_time = [s for s in subjects if s.monitored_ms > 0]
    if with_time:
        bt = np.array([s.burden_true for s in with_time])
        bp = np.array([s.burden_predicted for s in with_time])
        total = sum(s.monitored_ms for s in with_time)
        w = np.array([s.monitored_ms for s in with_time]) / total
        sec["burden"] = {
            "true_pooled": float(np.sum(w * bt)),
            "predicted_pooled": float(np.sum(w * bp)),
            "mean_absolute_error": float(np.mean(np.abs(bp - bt))),
            "mean_signed_error": float(np.mean(bp - bt)),
            "n_subjects": len(with_time),
        }
        sec["truth_stats"] = _pooled_stats(with_time, "truth_episodes")
        sec["predicted_stats"] = _pooled_stats(with_time, "predicted")
    else:
        sec["omitted"]["burden"] = "no monitored time"
    return sec, match


def _pooled_stats(subjects: Sequence[SubjectEval], attr: str) -> dict:
    """Episode frequency, duration and burden pooled over subjects' monitored time."""
    durations, covered, monitored = [], 0, 0
    for s in subjects:
        eps = getattr(s, attr)
        on = np.array([e.onset for e in eps], dtype=np.int64)
        off = np.array([e.offset for e in eps], dtype=np.int64)
        inside = _intervals.overlap_with_union(on, off, *s.windows)
        durations.append(inside[inside > 0])
        covered += int(inside.sum())
        monitored += s.monitored_ms
    dur = np.concatenate(durations) / SECOND
    summary = (float(dur.min()), float(np.median(dur)), float(dur.mean()), float(dur.max())) if dur.size \
        else (None,) * 4
    return ee.EpisodeStats(int(dur.size), dur.size / (monitored / DAY), *summary, covered / monitored).as_dict()


def _pooled(subjects: Sequence[SubjectEval], mask_by_scenario: str | None = None):
    if not subjects:
        return np.zeros(0), np.zeros(0), np.zeros(0, bool)
    if mask_by_scenario is None:
        return (np.concatenate([s.score for s in subjects]), np.concatenate([s.sqi for s in subjects]),
                np.concatenate([s.truth for s in subjects]))
    parts = []
    for s in subjects:
        m = s.scenario == mask_by_scenario
        parts.append((s.score[m], s.sqi[m], s.truth[m]))
    return tuple(np.concatenate([p[i] for p in parts]) for i in range(3))


def _stratum(name_attr, value, subjects: Sequence[SubjectEval], cfg: EvalConfig, scenario: str | None = None):
    score, sqi, truth = _pooled(subjects, scenario)
    n_subj = len(subjects) if scenario is None else sum(1 for s in subjects if np.any(s.scenario == scenario))
    cm = sm.confusion(score >= cfg.positive_threshold, truth) if score.size else sm.ConfusionMatrix()
    out = {"attribute": name_attr, "value": value, "n_subjects": n_subj, "n_segments": int(score.size),
           "confusion": cm.as_dict(), "omitted": {}}
    if n_subj < cfg.min_subgroup_size:
        out["insufficient"] = True
        out["omitted"]["metrics"] = f"insufficient: {n_subj} subjects < min_subgroup_size {cfg.min_subgroup_size}"
        return out
    out["insufficient"] = False
    seg_sec, _ = _segment_section(score, sqi, truth, cfg, curves=False)
    out["segment_level"] = seg_sec
    out["artifact_tolerance"], _ = _atc_section(score, sqi, truth, cfg)
    if scenario is None:
        out["aggregation_level"] = _aggregation_section(subjects, cfg)
        out["episode_level"], _ = _episode_section(subjects, cfg)
    else:
        reason = "not defined on a segment partition"
        out["omitted"]["aggregation_level"] = out["omitted"]["episode_level"] = reason
    return out


# -- top level -------------------------------------------------------------------------------------------

@dataclass(frozen=True)
class EvalResult:
    report: dict
    curves: dict
    notifications: list[Notification]
    episode_match: ee.EpisodeMatch


def dataset_digest(dataset: Dataset) -> dict:
    h = hashlib.sha256()
    for sid in dataset.subjects:
        seg = dataset.segments_of(sid)
        h.update(sid.encode())
        for a in (seg.start, seg.end, seg.score, seg.sqi):
            h.update(np.ascontiguousarray(a).tobytes())
        if len(seg):
            tags, codes = np.unique(_scenario_keys(seg.scenario), return_inverse=True)
            h.update("\x1f".join(tags.tolist()).encode())
            h.update(codes.astype(np.int32).tobytes())
    for a in dataset.annotations:
        h.update(f"{a.subject_id}\x1f{a.condition}\x1f{a.onset}\x1f{a.offset}".encode())
    return {
        "n_subjects": len(dataset.profiles),
        "n_segments": dataset.n_segments,
        "n_annotations": len(dataset.annotations),
        "conditions": dataset.conditions,
        "monitored_hours": dataset.monitored_ms() / HOUR,
        "sha256": h.hexdigest(),
        "warnings": list(dataset.warnings),
    }


def evaluate(dataset: Dataset, config: EvalConfig | None = None) -> EvalResult:
    """Run every evaluation of the report on ``dataset``."""
    cfg = config or EvalConfig()
    episodes = dataset.episode_index(cfg.condition)
    subjects = []
    for sid in dataset.subjects:
        subjects.append(_subject_eval(dataset, sid, episodes, cfg))

    score, sqi, truth = _pooled(subjects)
    seg_sec, seg_res = _segment_section(score, sqi, truth, cfg, curves=True)
    if seg_res is not None:
        seg_sec["curves"] = {}
        if seg_res.roc:
            seg_sec["curves"]["roc"] = "curves/roc.csv"
        if seg_res.pr:
            seg_sec["curves"]["pr"] = "curves/pr.csv"
    atc_sec, atc_points = _atc_section(score, sqi, truth, cfg)
    if atc_points:
        atc_sec["curve"] = "curves/atc.csv"
    agg_sec = _aggregation_section(subjects, cfg)
    ep_sec, match = _episode_section(subjects, cfg)

    cohort = {"n_subjects": len(subjects), "attributes": {}, "min_subgroup_size": cfg.min_subgroup_size}
    attrs = sorted({k for p in dataset.profiles.values() for k in p.attributes})
    for a in attrs:
        cohort["attributes"][a] = {v: len(ids) for v, ids in _attribute_groups(dataset, a).items()}

    tags = scenario_tags(dataset) if subjects else []
    scen = {"tags": {}, "gate": schedule_to_config(cfg.schedule)["gate_scenario"]}
    for tag in tags:
        n_seg = dur = n_subj = 0
        for s in subjects:
            m = s.scenario == tag
            if m.any():
                n_subj += 1
                n_seg += int(m.sum())
                dur += int(s.duration[m].sum())
        scen["tags"][tag] = {"n_segments": n_seg, "n_subjects": n_subj, "hours": dur / HOUR}

    by_id = {s.subject_id: s for s in subjects}
    strata = {"attributes": {}, "scenarios": {}}
    for a in cfg.stratify:
        groups = _attribute_groups(dataset, a)
        strata["attributes"][a] = {v: _stratum(a, v, [by_id[i] for i in ids], cfg) for v, ids in groups.items()}
    if cfg.stratify_scenarios and tags and tags != [UNSPECIFIED]:
        strata["scenarios"] = {t: _stratum("scenario", t, subjects, cfg, scenario=t) for t in tags}

    report = {
        "schema_version": SCHEMA_VERSION,
        "dataset": dataset_digest(dataset),
        "config": cfg.to_dict(),
        "cohort": cohort,
        "scenarios": scen,
        "segment_level": seg_sec,
        "aggregation_level": agg_sec,
        "episode_level": ep_sec,
        "artifact_tolerance": atc_sec,
        "strata": strata,
    }
    report = _jsonable(report)
    curves = {"roc": seg_res.roc if seg_res else None, "pr": seg_res.pr if seg_res else None, "atc": atc_points}
    notes = [n for s in subjects for n in s.notifications]
    return EvalResult(report, curves, notes, match)


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        return _f(x)
    return x


# -- rendering ----------------------------------------------------------------------------------------------

def render_report(results: EvalResult | Mapping, format: str = "json") -> str:
    """Serialise a report as byte-deterministic JSON or as markdown."""
    report = results.report if isinstance(results, EvalResult) else results
    if format == "json":
        return json.dumps(report, sort_keys=True, indent=2, allow_nan=False) + "\n"
    if format == "markdown":
        return _markdown(report)
    raise ValueError(f"unknown report format {format!r}")


def _fmt(v) -> str:
    if v is None:
        return "n/a"
    if isinstance(v, bool):
        return "yes" if v else "no"
    if isinstance(v, float):
        return f"{v:.4g}"
    return str(v)


def _kv_table(d: Mapping, skip=()) -> list[str]:
    rows = ["| key | value |", "|---|---|"]
    for k in sorted(d):
        if k in skip or isinstance(d[k], (dict, list)):
            continue
        rows.append(f"| {k} | {_fmt(d[k])} |")
    return rows


def _metrics_table(ms: Mapping) -> list[str]:
    rows = ["| metric | value |", "|---|---|"]
    for k in sm.METRIC_NAMES:
        if k in ms.get("values", {}):
            rows.append(f"| {k} | {_fmt(ms['values'][k])} |")
        elif k in ms.get("omitted", {}):
            rows.append(f"| {k} | omitted: {ms['omitted'][k]} |")
    return rows


def _omitted(d: Mapping) -> list[str]:
    om = d.get("omitted")
    if isinstance(om, str):
        return [f"Omitted: {om}", ""]
    if om:
        return [f"- omitted `{k}`: {v}" for k, v in sorted(om.items())] + [""]
    return []


def _markdown(r: Mapping) -> str:
    out = [f"# Continuous-monitoring evaluation report (schema {r['schema_version']})", ""]
    ds = r["dataset"]
    out += ["## Dataset", ""] + _kv_table(ds) + [""]
    if ds.get("warnings"):
        out += [f"- warning: {w}" for w in ds["warnings"]] + [""]
    out += ["## Configuration", "", "```json", json.dumps(r["config"], sort_keys=True, indent=2), "```", ""]

    out += ["## 1. Cohort", "", f"Subjects: {r['cohort']['n_subjects']}", ""]
    for attr, counts in sorted(r["cohort"]["attributes"].items()):
        out += [f"### {attr}", "", "| value | subjects |", "|---|---|"]
        out += [f"| {v} | {n} |" for v, n in sorted(counts.items())] + [""]

    out += ["## 2. Target scenarios", "", f"Measurement gate: {_fmt(r['scenarios']['gate'])}", ""]
    if r["scenarios"]["tags"]:
        out += ["| scenario | subjects | segments | hours |", "|---|---|---|---|"]
        for tag, t in sorted(r["scenarios"]["tags"].items()):
            out.append(f"| {tag} | {t['n_subjects']} | {t['n_segments']} | {_fmt(t['hours'])} |")
        out.append("")

    out += ["## 3. Evaluation approaches and notification strategy", "", "### Segment level", ""]
    seg = r["segment_level"]
    out += _omitted(seg)
    if "metrics" in seg:
        cm = ", ".join(f"{k}={seg['confusion'][k]}" for k in ("tp", "fp", "tn", "fn"))
        out += [f"Confusion: {cm}", ""] + _metrics_table(seg["metrics"]) + [""]
    agg = r["aggregation_level"]
    out += ["### Aggregation level", "", f"Rule: `{agg['rule']['name']}`", ""] + _kv_table(agg) + [""]
    out += _omitted(agg)
    for key in ("false_notifications", "subject_level", "time_to_detection"):
        if key in agg:
            out += [f"#### {key.replace('_', ' ')}", ""] + _kv_table(agg[key]) + [""]
    for unit, sec in sorted(agg.get("intervals", {}).items()):
        out += [f"#### {ADJECTIVE.get(unit, unit)} intervals", ""] + _kv_table(sec) + [""]
        if "metrics" in sec:
            out += _metrics_table(sec["metrics"]) + [""]
        out += _omitted(sec)

    out += ["## 4. Metrics", "", "### Episode level (onset, offset, burden)", ""]
    ep = r["episode_level"]
    out += _kv_table(ep) + [""] + _omitted(ep)
    for key in ("onset_error_s", "offset_error_s", "burden", "truth_stats", "predicted_stats"):
        if key in ep:
            out += [f"#### {key.replace('_', ' ')}", ""] + _kv_table(ep[key]) + [""]
    atc = r["artifact_tolerance"]
    out += ["### Artifact tolerance", "", f"Metric: {atc['metric']}", ""] + _omitted(atc)
    if "points" in atc:
        out += ["| quality | value | n |", "|---|---|---|"]
        out += [f"| {_fmt(p['quality'])} | {_fmt(p['metric_value'])} | {p['n']} |" for p in atc["points"]]
        out += [""] + _kv_table(atc["summary"]) + [""] + _omitted(atc["summary"])

    out += ["## Strata", ""]
    for group in ("attributes", "scenarios"):
        blocks = r["strata"].get(group, {})
        items = blocks.items() if group == "attributes" else [("scenario", blocks)] if blocks else []
        for attr, values in sorted(items):
            out += [f"### {attr}", "", "| value | subjects | segments | insufficient | accuracy | sensitivity "
                    "| specificity | auprc |", "|---|---|---|---|---|---|---|---|"]
            for v, st in sorted(values.items()):
                vals = st.get("segment_level", {}).get("metrics", {}).get("values", {})
                cells = " | ".join(_fmt(vals.get(k)) for k in ("accuracy", "sensitivity", "specificity", "auprc"))
                out.append(f"| {v} | {st['n_subjects']} | {st['n_segments']} | {_fmt(st['insufficient'])} | {cells} |")
            out.append("")
    return "\n".join(out).rstrip() + "\n"
