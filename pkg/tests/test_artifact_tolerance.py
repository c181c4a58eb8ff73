import numpy as np
import pytest

from cmeval.artifact_tolerance import (
    ATCPoint, atc, atc_from_arrays, ati_max_coverage, ati_slope, auatc, summarize, write_atc,
)
from cmeval.synthgen import ArtifactProcess, DetectorModel, SynthConfig, gen_cohort

LINE = [ATCPoint(1.0, 0.95, 100), ATCPoint(0.8, 0.87, 100), ATCPoint(0.6, 0.79, 100)]


def test_collinear_slope():
    s = ati_slope(LINE)
    assert s.magnitude == pytest.approx(0.4, abs=1e-12) and s.sign == -1


def test_flat_and_rising():
    flat = [ATCPoint(q, 0.9, 10) for q in (0.2, 0.5, 0.9)]
    assert ati_slope(flat).magnitude == 0.0
    rising = [ATCPoint(1.0, 0.5, 10), ATCPoint(0.5, 0.6, 10)]
    s = ati_slope(rising)
    assert s.sign == 1 and s.magnitude == pytest.approx(0.2)


def test_slope_weights():
    pts = [ATCPoint(1.0, 1.0, 1000), ATCPoint(0.5, 0.8, 1000), ATCPoint(0.0, 0.0, 1)]
    assert ati_slope(pts).magnitude < 0.6
    with pytest.raises(ValueError):
        ati_slope(LINE[:1])


def test_max_coverage():
    assert ati_max_coverage(LINE, 0.87) == pytest.approx(0.2, abs=1e-12)
    assert ati_max_coverage(LINE, 0.5) == pytest.approx(0.4)
    assert ati_max_coverage(LINE, 0.91) == pytest.approx(0.1, abs=1e-12)
    assert ati_max_coverage(LINE, 0.99) is None


def test_max_coverage_stops_at_first_failure():
    # a dirty bin recovering above the floor does not extend the coverage
    pts = [ATCPoint(1.0, 0.9, 10), ATCPoint(0.8, 0.7, 10), ATCPoint(0.4, 0.95, 10)]
    assert ati_max_coverage(pts, 0.8) == pytest.approx(0.1)


def test_auatc():
    assert auatc([LINE[0], LINE[2]]) == pytest.approx(0.87, abs=1e-12)
    assert auatc(LINE) == pytest.approx(0.87, abs=1e-12)
    assert auatc([ATCPoint(0.3, 0.9, 1), ATCPoint(0.7, 0.9, 1)]) == pytest.approx(0.9)


def test_summary_omissions():
    s = summarize(LINE[:1], 0.99)
    assert s.slope_magnitude is None and s.max_coverage is None
    assert set(s.omitted) == {"slope_magnitude", "auatc", "max_coverage"}
    assert summarize(LINE, 0.8).as_dict()["omitted"] == {}


def test_bins_merge_when_sparse():
    rng = np.random.default_rng(0)
    sqi = np.concatenate([rng.uniform(0.5, 1.0, 1000), [0.05, 0.15]])
    labels = rng.random(sqi.size) < 0.5
    pts = atc_from_arrays(sqi, labels.astype(float), labels, min_bin_count=50)
    assert sum(p.n for p in pts) == sqi.size
    assert all(p.n >= 50 for p in pts)


def test_bin_errors():
    with pytest.raises(ValueError):
        atc_from_arrays([0.5], [0.5], [True], bins=[0.5, 0.2])
    with pytest.raises(ValueError, match="under-populated"):
        atc_from_arrays([0.5] * 10, [0.5] * 10, [True] * 10)
    with pytest.raises(ValueError, match="unknown metric"):
        atc_from_arrays([0.5], [0.5], [True], metric="hype")


def test_atc_recovers_line():
    cfg = SynthConfig(seed=3, n_subjects=1, horizon=10_000 * 30_000, attributes={},
                      detector=DetectorModel(0.95, 0.4, 0.15), artifacts=ArtifactProcess("uniform"))
    pts = atc(gen_cohort(cfg).dataset)
    assert len(pts) == 10
    for p in pts:
        assert abs(p.metric_value - (0.95 - 0.4 * (1 - p.quality))) < 0.03


def test_write_atc(tmp_path):
    write_atc(tmp_path / "atc.csv", LINE)
    assert (tmp_path / "atc.csv").read_text().splitlines()[0] == "quality,metric_value,n"
