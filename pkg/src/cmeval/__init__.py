"""Evaluation of continuous-monitoring detectors on scored wearable segments.

Integer-millisecond timelines, segment metrics, notification rules,
episode scoring, artifact tolerance curves, stratified reports and a
seeded synthetic cohort generator.
"""

from .aggregation import (
    Consecutive, CountInWindow, MofN, Notification, NotificationRule, RuleFamily, Schedule, apply_schedule,
    evaluate_flags, evaluate_rule, false_notification_rate, interval_predictions, preset, sweep_rules,
)
from .artifact_tolerance import ATCPoint, atc, atc_from_arrays, ati_max_coverage, ati_slope, auatc
from .cohort_report import EvalConfig, evaluate, render_report, stratify, study_level_sensitivity
from .episode_eval import (
    burden_error, extract_episodes, match_episodes, onset_offset_errors, time_to_detection,
)
from .segment_metrics import ConfusionMatrix, MetricSet, basic_metrics, confusion, pr_curve, roc_curve, scored_metrics
from .synthgen import SynthConfig, gen_cohort, inject_onset_bias
from .timeline import (
    DAY, HOUR, MINUTE, SECOND, Dataset, DatasetError, EpisodeAnnotation, ScoredSegment, Segments,
    SubjectProfile, load_dataset, make_dataset, truth_label, truth_labels, write_dataset,
)

__version__ = "0.1.0"
