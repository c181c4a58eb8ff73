"""Seeded synthetic cohorts with known ground truth.

Each subject alternates between condition-free and condition periods (a
two-state semi-Markov process), carries a per-segment signal quality, and is
scored by a noisy detector whose accuracy degrades linearly with artifact
fraction.

Randomness contract
-------------------
``numpy.random.SeedSequence(seed).spawn(n_subjects)`` gives one substream per
subject; each subject stream is spawned again into four independent streams
(episodes, signal quality, detector, profile). Every stream is a PCG64 bit
generator and only uniform doubles (``Generator.random``) are drawn from it;
exponential, log-normal, normal and categorical variates are derived by
inverse-CDF transforms in this module. Output therefore depends only on the
seed and the config, never on how subjects are scheduled.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields
from typing import Mapping

import numpy as np
from scipy.special import betaincinv, ndtri

from . import _intervals
from .timeline import (
    DAY, HOUR, SECOND, Dataset, EpisodeAnnotation, Segments, SubjectProfile, make_dataset, truth_labels,
)

DEFAULT_START = 1_704_067_200_000  # 2024-01-01T00:00:00Z
_TINY = 2.0 ** -53


@dataclass(frozen=True)
class EpisodeProcess:
    mean_on: int = 1 * HOUR
    mean_off: int = 9 * HOUR
    distribution: str = "exponential"
    sigma: float = 1.0
    align_to_stride: bool = False

    @property
    def expected_burden(self) -> float:
        return self.mean_on / (self.mean_on + self.mean_off)


@dataclass(frozen=True)
class DetectorModel:
    p_correct_clean: float = 0.95
    degradation_slope: float = 0.0
    score_noise_sd: float = 0.15


@dataclass(frozen=True)
class ArtifactProcess:
    distribution: str = "uniform"
    low: float = 0.0
    high: float = 1.0
    a: float = 2.0
    b: float = 2.0
    value: float = 1.0


def _default_attributes():
    return {
        "sex": {"F": 0.5, "M": 0.5},
        "age_band": {"18-39": 0.3, "40-64": 0.4, "65+": 0.3},
    }


@dataclass(frozen=True)
class SynthConfig:
    seed: int = 0
    n_subjects: int = 10
    horizon: int = 30 * DAY
    segment_length: int = 30 * SECOND
    stride: int = 30 * SECOND
    start: int = DEFAULT_START
    condition: str = "AF"
    episodes: EpisodeProcess = field(default_factory=EpisodeProcess)
    detector: DetectorModel = field(default_factory=DetectorModel)
    artifacts: ArtifactProcess = field(default_factory=ArtifactProcess)
    scenarios: Mapping[str, float] = field(default_factory=dict)
    scenario_block: int = 1 * HOUR
    attributes: Mapping[str, Mapping[str, float]] = field(default_factory=_default_attributes)
    onset_bias: int = 0
    decimals: int = 4

    def __post_init__(self):
        validate_config(self)

    # JSON uses *_ms suffixes for every duration
    _DURATIONS = {"horizon": "horizon_ms", "segment_length": "segment_length_ms", "stride": "stride_ms",
                  "start": "start_ms", "scenario_block": "scenario_block_ms", "onset_bias": "onset_bias_ms"}

    @classmethod
    def from_dict(cls, cfg: Mapping) -> SynthConfig:
        cfg = dict(cfg)
        kw = {}
        for f in fields(cls):
            key = cls._DURATIONS.get(f.name, f.name)
            if key in cfg:
                kw[f.name] = cfg.pop(key)
        for name, sub, durations in (("episodes", EpisodeProcess, ("mean_on", "mean_off")),
                                     ("detector", DetectorModel, ()), ("artifacts", ArtifactProcess, ())):
            if name in kw:
                raw = dict(kw[name])
                for d in durations:
                    if d + "_ms" in raw:
                        raw[d] = raw.pop(d + "_ms")
                unknown = set(raw) - {f.name for f in fields(sub)}
                if unknown:
                    raise ValueError(f"unknown {name} setting(s): {', '.join(sorted(unknown))}")
                kw[name] = sub(**raw)
        if cfg:
            raise ValueError(f"unknown synth setting(s): {', '.join(sorted(cfg))}")
        return cls(**kw)

    @classmethod
    def from_json(cls, path) -> SynthConfig:
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    def to_dict(self) -> dict:
        out = {}
        for f in fields(self):
            v = getattr(self, f.name)
            if f.name == "episodes":
                v = asdict(v)
                v["mean_on_ms"] = v.pop("mean_on")
                v["mean_off_ms"] = v.pop("mean_off")
            elif f.name in ("detector", "artifacts"):
                v = asdict(v)
            elif f.name in ("scenarios", "attributes"):
                v = json.loads(json.dumps(v))
            out[self._DURATIONS.get(f.name, f.name)] = v
        return out


def validate_config(c: SynthConfig):
    def need(ok, msg):
        if not ok:
            raise ValueError(msg)

    need(isinstance(c.seed, int) and c.seed >= 0, "seed must be a non-negative integer")
    need(c.n_subjects >= 1, "n_subjects must be >= 1")
    need(c.horizon > 0 and c.segment_length > 0 and c.stride > 0, "durations must be positive")
    need(c.segment_length <= c.horizon, "segment_length exceeds horizon")
    need(c.start >= 0, "start must be non-negative")
    e = c.episodes
    need(e.mean_on > 0 and e.mean_off > 0, "episode mean durations must be positive")
    need(e.distribution in ("exponential", "lognormal"), f"unknown episode distribution {e.distribution!r}")
    need(e.sigma > 0, "sigma must be positive")
    d = c.detector
    need(0 <= d.p_correct_clean <= 1, "p_correct_clean must lie in [0, 1]")
    need(d.score_noise_sd >= 0, "score_noise_sd must be non-negative")
    a = c.artifacts
    need(a.distribution in ("uniform", "beta", "constant"), f"unknown sqi distribution {a.distribution!r}")
    need(0 <= a.low <= a.high <= 1 and 0 <= a.value <= 1, "sqi bounds must lie in [0, 1]")
    need(a.a > 0 and a.b > 0, "beta parameters must be positive")
    for name, probs in [("scenarios", c.scenarios)] + [(k, v) for k, v in c.attributes.items()]:
        if probs:
            need(all(p >= 0 for p in probs.values()) and sum(probs.values()) > 0,
                 f"{name} probabilities must be non-negative with a positive sum")
    need(c.scenario_block > 0, "scenario_block must be positive")
    need(c.onset_bias >= 0, "onset_bias must be non-negative")
    need(1 <= c.decimals <= 12, "decimals must lie in [1, 12]")


# -- variates from uniforms ---------------------------------------------------------

def _uniform(rng, n):
    return np.clip(rng.random(n), _TINY, 1.0 - _TINY)


def _durations(rng, n, mean, ep: EpisodeProcess):
    u = _uniform(rng, n)
    if ep.distribution == "exponential":
        return -mean * np.log(u)
    mu = np.log(mean) - ep.sigma ** 2 / 2.0
    return np.exp(mu + ep.sigma * ndtri(u))


def _categorical(rng, n, probs: Mapping[str, float]):
    names = sorted(probs)
    cum = np.cumsum([probs[k] for k in names])
    idx = np.searchsorted(cum / cum[-1], rng.random(n), side="right")
    return np.array(names, dtype=object)[np.minimum(idx, len(names) - 1)]


def _sqi(rng, n, art: ArtifactProcess):
    if art.distribution == "constant":
        return np.full(n, art.value)
    if art.distribution == "uniform":
        return art.low + (art.high - art.low) * rng.random(n)
    return betaincinv(art.a, art.b, rng.random(n))


def _episode_intervals(rng, cfg: SynthConfig, t0: int, t1: int):
    """Alternating off/on periods from a burn-in start, clipped to ``[t0, t1)``."""
    ep = cfg.episodes
    cycle = ep.mean_on + ep.mean_off
    unit = cfg.stride if ep.align_to_stride else 1
    burn = -(-10 * cycle // unit) * unit
    length = t1 - t0 + burn
    on_parts, off_parts = [], []
    total = 0.0
    batch = int(length / cycle * 1.2) + 16
    while total < length:
        off_d = _durations(rng, batch, ep.mean_off, ep)
        on_d = _durations(rng, batch, ep.mean_on, ep)
        off_parts.append(off_d)
        on_parts.append(on_d)
        total += off_d.sum() + on_d.sum()
    off_d = np.concatenate(off_parts)
    on_d = np.concatenate(on_parts)
    off_q = np.maximum(np.rint(off_d / unit), 1).astype(np.int64) * unit
    on_q = np.maximum(np.rint(on_d / unit), 1).astype(np.int64) * unit
    steps = np.empty(2 * off_q.size, dtype=np.int64)
    steps[0::2] = off_q
    steps[1::2] = on_q
    edges = (t0 - burn) + np.cumsum(steps)
    onset = edges[0::2]
    offset = edges[1::2]
    onset = np.clip(onset, t0, t1)
    offset = np.clip(offset, t0, t1)
    keep = offset > onset
    return onset[keep], offset[keep]


@dataclass(frozen=True)
class SynthCohort:
    dataset: Dataset
    truth: dict


def _subject(cfg: SynthConfig, sid: str, seq: np.random.SeedSequence):
    r_ep, r_sqi, r_det, r_prof = (np.random.Generator(np.random.PCG64(s)) for s in seq.spawn(4))
    n = (cfg.horizon - cfg.segment_length) // cfg.stride + 1
    start = cfg.start + np.arange(n, dtype=np.int64) * cfg.stride
    end = start + cfg.segment_length
    window = (int(cfg.start), int(end[-1]))
    onset, offset = _episode_intervals(r_ep, cfg, *window)

    scale = 10.0 ** cfg.decimals
    sqi = np.round(_sqi(r_sqi, n, cfg.artifacts), cfg.decimals)
    truth = truth_labels(start, end, onset, offset, 0.5)
    det = cfg.detector
    p_eff = np.clip(det.p_correct_clean - det.degradation_slope * (1.0 - sqi), 0.0, 1.0)
    correct = r_det.random(n) < p_eff
    positive = truth == correct
    if det.score_noise_sd > 0:
        dist = 0.5 - np.abs(det.score_noise_sd * ndtri(_uniform(r_det, n)))
        dist = np.clip(dist, 1.0 / scale, 0.5)
    else:
        dist = np.full(n, 0.5)
    score = np.round(np.where(positive, 0.5 + dist, 0.5 - dist), cfg.decimals)

    if cfg.scenarios:
        n_blocks = int((window[1] - window[0] - 1) // cfg.scenario_block) + 1
        tags = _categorical(r_sqi, n_blocks, cfg.scenarios)
        scenario = tags[(start - cfg.start) // cfg.scenario_block]
    else:
        scenario = None
    attrs = {}
    for name in sorted(cfg.attributes):
        probs = cfg.attributes[name]
        if probs:
            attrs[name] = str(_categorical(r_prof, 1, probs)[0])
    seg = Segments(start, end, score, sqi, scenario)
    episodes = [EpisodeAnnotation(sid, cfg.condition, int(a), int(b)) for a, b in zip(onset, offset)]
    return seg, episodes, SubjectProfile(sid, attrs, (window,))


def subject_ids(n: int) -> list[str]:
    width = max(4, len(str(n - 1)))
    return [f"S{i:0{width}d}" for i in range(n)]


def gen_cohort(config: SynthConfig) -> SynthCohort:
    """Generate a validated cohort and echo the generating parameters."""
    validate_config(config)
    seqs = np.random.SeedSequence(config.seed).spawn(config.n_subjects)
    segments, annotations, profiles = {}, [], []
    for sid, seq in zip(subject_ids(config.n_subjects), seqs):
        seg, eps, prof = _subject(config, sid, seq)
        segments[sid] = seg
        annotations.extend(eps)
        profiles.append(prof)
    ds = make_dataset(segments, annotations, profiles, where="synthgen")
    if config.onset_bias:
        ds = inject_onset_bias(ds, config.onset_bias, config.condition)
    truth = {
        "config": config.to_dict(),
        "expected_burden": config.episodes.expected_burden,
        "segments_per_subject": int((config.horizon - config.segment_length) // config.stride + 1),
    }
    return SynthCohort(ds, truth)


def inject_onset_bias(dataset: Dataset, delta: int, condition: str = "AF", threshold: float = 0.5) -> Dataset:
    """Delay every detected episode start by ``delta`` after its true onset.

    Positive segments overlapping ``[onset, onset + delta)`` of a true episode
    are re-scored to 0, so detector positives resume ``delta`` after each
    onset. An episode shorter than ``delta`` is never predicted.
    """
    if delta < 0:
        raise ValueError("delta must be non-negative")
    if delta == 0:
        return dataset
    episodes = dataset.episode_index(condition)
    out = {}
    for sid, seg in dataset.segments.items():
        onset, offset = episodes.get(sid, (np.zeros(0, np.int64),) * 2)
        hushed = _intervals.overlap_with_union(seg.start, seg.end, onset, np.minimum(onset + delta, offset)) > 0
        hushed &= seg.score >= threshold
        out[sid] = seg.replace(score=np.where(hushed, 0.0, seg.score)) if hushed.any() else seg
    return dataset.with_segments(out)
