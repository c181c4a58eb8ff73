import dataclasses
import json

import numpy as np
import pytest

from cmeval.cohort_report import (
    REPORT_KEYS, UNSPECIFIED, EvalConfig, evaluate, render_report, stratify, study_level_sensitivity,
)
from cmeval.synthgen import SynthConfig, gen_cohort
from cmeval.timeline import DAY, SubjectProfile


@pytest.fixture(scope="module")
def cohort():
    cfg = SynthConfig(seed=5, n_subjects=10, horizon=2 * DAY, scenarios={"rest": 0.6, "exercise": 0.4})
    return gen_cohort(cfg).dataset


@pytest.fixture(scope="module")
def result(cohort):
    return evaluate(cohort, EvalConfig(stratify=("sex",), min_subgroup_size=3))


def test_study_level_sensitivity():
    assert study_level_sensitivity(404, 3070) == pytest.approx(0.1163, abs=1e-4)
    assert study_level_sensitivity(7, 0) == 1.0
    assert study_level_sensitivity(0, 7) == 0.0
    with pytest.raises(ValueError):
        study_level_sensitivity(0, 0)


def test_attribute_partition(cohort):
    parts = stratify(cohort, "sex")
    assert set(parts) <= {"F", "M"}
    assert sum(len(p.subjects) for p in parts.values()) == 10


def test_missing_attribute_is_unspecified(cohort):
    sid = cohort.subjects[0]
    profiles = dict(cohort.profiles)
    profiles[sid] = SubjectProfile(sid, {}, profiles[sid].monitored_windows)
    ds = dataclasses.replace(cohort, profiles=profiles)
    parts = stratify(ds, "sex")
    assert parts[UNSPECIFIED].subjects == [sid]
    with pytest.raises(ValueError, match="absent"):
        stratify(cohort, "skin_tone")


def test_scenario_partition(cohort):
    parts = stratify(cohort, scenario=True)
    assert set(parts) == {"rest", "exercise"}
    assert sum(p.n_segments for p in parts.values()) == cohort.n_segments


def test_report_keys_and_sections(result):
    assert tuple(result.report) == REPORT_KEYS
    md = render_report(result, "markdown")
    heads = ["## 1. Cohort", "## 2. Target scenarios", "## 3. Evaluation approaches", "## 4. Metrics"]
    pos = [md.index(h) for h in heads]
    assert pos == sorted(pos)


def test_json_round_trip(result):
    text = render_report(result, "json")
    assert render_report(json.loads(text), "json") == text


def test_unknown_format(result):
    with pytest.raises(ValueError, match="format"):
        render_report(result, "pdf")


def test_strata_confusion_sums(result):
    pooled = result.report["segment_level"]["confusion"]
    for group in (result.report["strata"]["attributes"]["sex"], result.report["strata"]["scenarios"]):
        total = {k: sum(s["confusion"][k] for s in group.values()) for k in pooled}
        assert total == pooled


def test_insufficient_stratum_flagged(cohort):
    r = evaluate(cohort, EvalConfig(stratify=("sex",), min_subgroup_size=20)).report
    for s in r["strata"]["attributes"]["sex"].values():
        assert s["insufficient"] and "segment_level" not in s
        assert s["omitted"]["metrics"].startswith("insufficient")


def test_every_omission_has_reason(result):
    def walk(d):
        if isinstance(d, dict):
            for k, v in d.items():
                if k == "omitted":
                    assert all(isinstance(x, str) and x for x in v.values())
                else:
                    walk(v)
        elif isinstance(d, list):
            for v in d:
                walk(v)
    walk(result.report)


def test_config_validation():
    with pytest.raises(ValueError, match="unknown preset"):
        EvalConfig(preset="garmin")
    with pytest.raises(ValueError):
        EvalConfig(theta=0.0)


def test_no_nan_in_json(result):
    assert "NaN" not in render_report(result, "json")
    assert np.isfinite(result.report["dataset"]["monitored_hours"])
