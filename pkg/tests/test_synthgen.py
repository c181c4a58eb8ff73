import dataclasses

import numpy as np
import pytest

from cmeval.episode_eval import extract_episodes, match_episodes
from cmeval.synthgen import (
    ArtifactProcess, DetectorModel, EpisodeProcess, SynthConfig, gen_cohort, inject_onset_bias, subject_ids,
)
from cmeval.timeline import DAY, HOUR, MINUTE, SECOND, load_dataset, truth_labels, write_dataset

SMALL = SynthConfig(seed=42, n_subjects=4, horizon=2 * DAY)
NOISELESS = DetectorModel(1.0, 0.0, 0.0)


def test_same_seed_same_bytes(tmp_path):
    a = write_dataset(gen_cohort(SMALL).dataset, tmp_path / "a")
    b = write_dataset(gen_cohort(SMALL).dataset, tmp_path / "b")
    for k in a:
        assert open(a[k], "rb").read() == open(b[k], "rb").read()
    c = write_dataset(gen_cohort(dataclasses.replace(SMALL, seed=43)).dataset, tmp_path / "c")
    assert open(a["segments"], "rb").read() != open(c["segments"], "rb").read()


def test_subject_streams_independent_of_cohort_size():
    few = gen_cohort(SMALL).dataset
    more = gen_cohort(dataclasses.replace(SMALL, n_subjects=6)).dataset
    for sid in few.subjects:
        assert few.segments_of(sid) == more.segments_of(sid)


def test_generated_dataset_loads(tmp_path):
    ds = gen_cohort(dataclasses.replace(SMALL, scenarios={"rest": 1.0, "sleep": 1.0})).dataset
    p = write_dataset(ds, tmp_path)
    assert load_dataset(p["segments"], p["annotations"], p["subjects"]) == ds


def test_tiling_and_counts():
    res = gen_cohort(SMALL)
    seg = res.dataset.segments_of(subject_ids(4)[0])
    assert len(seg) == 2 * DAY // (30 * SECOND) == res.truth["segments_per_subject"]
    assert np.all(np.diff(seg.start) == 30 * SECOND)
    assert res.truth["expected_burden"] == pytest.approx(0.1)


def test_noiseless_detector_reproduces_truth():
    ds = gen_cohort(dataclasses.replace(SMALL, detector=NOISELESS)).dataset
    ep = ds.episode_index("AF")
    for sid in ds.subjects:
        seg = ds.segments_of(sid)
        t = truth_labels(seg.start, seg.end, *ep[sid], 0.5)
        assert np.array_equal(seg.score >= 0.5, t)
        assert set(np.unique(seg.score)) <= {0.0, 1.0}


def test_degradation_clamped():
    cfg = dataclasses.replace(SMALL, n_subjects=1, detector=DetectorModel(0.95, 5.0, 0.1),
                              artifacts=ArtifactProcess("constant", value=0.0))
    ds = gen_cohort(cfg).dataset
    seg = ds.segments_of(ds.subjects[0])
    t = truth_labels(seg.start, seg.end, *ds.episode_index("AF")[ds.subjects[0]], 0.5)
    # accuracy clamps at 0: every label lands on the wrong side
    assert not np.any((seg.score >= 0.5) == t)


@pytest.mark.parametrize("bad", [
    dict(n_subjects=0), dict(horizon=0), dict(seed=-1),
    dict(detector=DetectorModel(1.5)), dict(episodes=EpisodeProcess(mean_on=0)),
    dict(artifacts=ArtifactProcess("gamma")),
])
def test_invalid_config(bad):
    with pytest.raises(ValueError):
        dataclasses.replace(SMALL, **bad)


def test_config_dict_round_trip():
    cfg = dataclasses.replace(SMALL, episodes=EpisodeProcess(2 * HOUR, 8 * HOUR, "lognormal", 0.5))
    assert SynthConfig.from_dict(cfg.to_dict()) == cfg
    with pytest.raises(ValueError, match="unknown synth setting"):
        SynthConfig.from_dict({"n_subject": 3})


def test_lognormal_burden():
    cfg = SynthConfig(seed=1, n_subjects=20, horizon=10 * DAY, attributes={}, detector=NOISELESS,
                      episodes=EpisodeProcess(HOUR, 9 * HOUR, "lognormal", 0.8))
    ds = gen_cohort(cfg).dataset
    on = sum(a.offset - a.onset for a in ds.annotations)
    assert on / ds.monitored_ms() == pytest.approx(0.1, abs=0.02)


def _aligned(**kw):
    return SynthConfig(seed=2, n_subjects=3, horizon=3 * DAY, attributes={}, detector=NOISELESS,
                       episodes=EpisodeProcess(HOUR, 9 * HOUR, align_to_stride=True), **kw)


def test_onset_bias_shifts_predictions():
    ds = gen_cohort(_aligned()).dataset
    assert inject_onset_bias(ds, 0) is ds
    shifted = inject_onset_bias(ds, 90 * SECOND)
    pred = [e for sid in ds.subjects
            for e in extract_episodes(shifted.segments_of(sid), merge_gap=0, min_duration=0, subject_id=sid)]
    m = match_episodes(pred, ds.annotations)
    err = [p.onset - t.onset for t, p in m.pairs]
    assert err and all(e == 90 * SECOND for e in err)
    with pytest.raises(ValueError):
        inject_onset_bias(ds, -1)


def test_onset_bias_longer_than_episode_hides_it():
    ds = gen_cohort(_aligned()).dataset
    longest = max(a.offset - a.onset for a in ds.annotations)
    hidden = inject_onset_bias(ds, longest + MINUTE)
    assert all(np.all(hidden.segments_of(s).score < 0.5) for s in ds.subjects)
