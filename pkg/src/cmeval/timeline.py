"""Recordings, scored segments, ground-truth episodes and subject profiles.

Every time axis is integer milliseconds since the Unix epoch (UTC). Durations
stay integral until a report converts them to seconds, so overlap tests are
exact.
"""

from __future__ import annotations

import csv
import json
import os
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np
import pyarrow as pa
import pyarrow.compute as pc
import pyarrow.csv as pacsv

from . import _intervals

SECOND = 1_000
MINUTE = 60 * SECOND
HOUR = 60 * MINUTE
DAY = 24 * HOUR

DEFAULT_THETA = 0.5

SEGMENT_COLUMNS = ("subject_id", "start_ms", "end_ms", "score", "sqi", "scenario")
ANNOTATION_COLUMNS = ("subject_id", "condition", "onset_ms", "offset_ms")


class DatasetError(ValueError):
    """Raised when input files or in-memory data violate the data model."""


@dataclass(frozen=True)
class ScoredSegment:
    subject_id: str
    start: int
    end: int
    score: float
    sqi: float = 1.0
    scenario: str | None = None

    @property
    def duration(self) -> int:
        return self.end - self.start


@dataclass(frozen=True)
class EpisodeAnnotation:
    subject_id: str
    condition: str
    onset: int
    offset: int

    @property
    def duration(self) -> int:
        return self.offset - self.onset


@dataclass(frozen=True)
class SubjectProfile:
    subject_id: str
    attributes: Mapping[str, str] = field(default_factory=dict)
    monitored_windows: tuple[tuple[int, int], ...] = ()

    @property
    def monitored_ms(self) -> int:
        return sum(e - s for s, e in self.monitored_windows)


def _frozen(a, dtype):
    a = np.ascontiguousarray(a, dtype=dtype)
    a.flags.writeable = False
    return a


class Segments:
    """Columnar, read-only block of one subject's segments, sorted by start."""

    __slots__ = ("start", "end", "score", "sqi", "scenario")

    def __init__(self, start, end, score, sqi=None, scenario=None):
        start = np.asarray(start, dtype=np.int64)
        n = start.size
        if sqi is None:
            sqi = np.ones(n)
        if scenario is None:
            scenario = np.full(n, None, dtype=object)
        self.start = _frozen(start, np.int64)
        self.end = _frozen(end, np.int64)
        self.score = _frozen(score, np.float64)
        self.sqi = _frozen(sqi, np.float64)
        self.scenario = _frozen(scenario, object)
        if not (self.end.size == self.score.size == self.sqi.size == self.scenario.size == n):
            raise DatasetError("segment columns have unequal lengths")

    @classmethod
    def empty(cls) -> Segments:
        return cls(np.zeros(0, np.int64), np.zeros(0, np.int64), np.zeros(0))

    @classmethod
    def from_records(cls, records: Iterable[ScoredSegment]) -> Segments:
        records = sorted(records, key=lambda r: (r.start, r.end))
        return cls(
            [r.start for r in records],
            [r.end for r in records],
            [r.score for r in records],
            [r.sqi for r in records],
            np.array([r.scenario for r in records], dtype=object),
        )

    def __len__(self) -> int:
        return self.start.size

    def __getitem__(self, index) -> Segments:
        if isinstance(index, (int, np.integer)):
            raise TypeError("use Segments.record(i) for a single segment")
        return Segments(
            self.start[index], self.end[index], self.score[index],
            self.sqi[index], self.scenario[index],
        )

    def record(self, i: int, subject_id: str = "") -> ScoredSegment:
        return ScoredSegment(
            subject_id, int(self.start[i]), int(self.end[i]),
            float(self.score[i]), float(self.sqi[i]), self.scenario[i],
        )

    @property
    def duration(self) -> np.ndarray:
        return self.end - self.start

    def replace(self, **columns) -> Segments:
        cols = {name: getattr(self, name) for name in self.__slots__}
        cols.update(columns)
        return Segments(**cols)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Segments):
            return NotImplemented
        return (
            np.array_equal(self.start, other.start)
            and np.array_equal(self.end, other.end)
            and np.array_equal(self.score, other.score)
            and np.array_equal(self.sqi, other.sqi)
            and list(self.scenario) == list(other.scenario)
        )

    def __repr__(self) -> str:
        return f"Segments(n={len(self)})"


@dataclass(frozen=True)
class Dataset:
    """Validated cohort: segments and annotations keyed by subject, plus profiles.

    Build with :func:`make_dataset` or :func:`load_dataset`; both enforce the
    per-subject invariants. Instances are never mutated.
    """

    segments: Mapping[str, Segments]
    annotations: tuple[EpisodeAnnotation, ...]
    profiles: Mapping[str, SubjectProfile]
    warnings: tuple[str, ...] = field(default=(), compare=False)

    @property
    def subjects(self) -> list[str]:
        return sorted(self.profiles)

    @property
    def n_segments(self) -> int:
        return sum(len(s) for s in self.segments.values())

    def segments_of(self, subject_id: str) -> Segments:
        return self.segments.get(subject_id) or Segments.empty()

    def episodes(self, subject_id: str, condition: str) -> tuple[np.ndarray, np.ndarray]:
        """Sorted ``(onset, offset)`` arrays for one subject and condition."""
        rows = [a for a in self.annotations if a.subject_id == subject_id and a.condition == condition]
        return (np.array([a.onset for a in rows], dtype=np.int64),
                np.array([a.offset for a in rows], dtype=np.int64))

    def episode_index(self, condition: str) -> dict[str, tuple[np.ndarray, np.ndarray]]:
        """``episodes`` for every subject at once (one pass over annotations)."""
        grouped: dict[str, list[EpisodeAnnotation]] = {s: [] for s in self.profiles}
        for a in self.annotations:
            if a.condition == condition:
                grouped.setdefault(a.subject_id, []).append(a)
        return {
            s: (np.array([a.onset for a in rows], dtype=np.int64),
                np.array([a.offset for a in rows], dtype=np.int64))
            for s, rows in grouped.items()
        }

    @property
    def conditions(self) -> list[str]:
        return sorted({a.condition for a in self.annotations})

    def monitored_ms(self, subject_id: str | None = None) -> int:
        if subject_id is not None:
            return self.profiles[subject_id].monitored_ms
        return sum(p.monitored_ms for p in self.profiles.values())

    def subset(self, subject_ids: Iterable[str]) -> Dataset:
        keep = set(subject_ids)
        return Dataset(
            {s: v for s, v in self.segments.items() if s in keep},
            tuple(a for a in self.annotations if a.subject_id in keep),
            {s: p for s, p in self.profiles.items() if s in keep},
            self.warnings,
        )

    def with_segments(self, segments: Mapping[str, Segments]) -> Dataset:
        return Dataset(dict(segments), self.annotations, self.profiles, self.warnings)


# -- construction and validation ----------------------------------------------

def _check_segments(subject_id: str, seg: Segments, profile: SubjectProfile, where: str):
    def fail(mask, what):
        i = int(np.flatnonzero(mask)[0])
        raise DatasetError(f"{where}: subject {subject_id!r} segment {i}: {what}")

    if len(seg) == 0:
        return
    bad = seg.end <= seg.start
    if bad.any():
        fail(bad, "end must be greater than start")
    bad = seg.start < 0
    if bad.any():
        fail(bad, "timestamps must be non-negative")
    bad = ~((seg.score >= 0) & (seg.score <= 1))
    if bad.any():
        fail(bad, "score must lie in [0, 1]")
    bad = ~((seg.sqi >= 0) & (seg.sqi <= 1))
    if bad.any():
        fail(bad, "sqi must lie in [0, 1]")
    bad = np.diff(seg.start) < 0
    if bad.any():
        fail(np.r_[False, bad], "segments not sorted by start")
    w = np.array(profile.monitored_windows, dtype=np.int64).reshape(-1, 2)
    idx = np.searchsorted(w[:, 0], seg.start, side="right") - 1
    inside = (idx >= 0) & (seg.end <= w[np.maximum(idx, 0), 1])
    if not inside.all():
        fail(~inside, "segment lies outside every monitored window")


def _check_windows(profile: SubjectProfile, where: str):
    prev_end = None
    for s, e in profile.monitored_windows:
        if e <= s:
            raise DatasetError(f"{where}: subject {profile.subject_id!r}: empty monitored window [{s}, {e})")
        if prev_end is not None and s < prev_end:
            raise DatasetError(
                f"{where}: subject {profile.subject_id!r}: monitored windows overlap or are unsorted")
        prev_end = e


def _check_annotations(annotations: Sequence[EpisodeAnnotation], profiles, where: str):
    last: dict[tuple[str, str], EpisodeAnnotation] = {}
    for i, a in enumerate(annotations):
        if a.subject_id not in profiles:
            raise DatasetError(f"{where}: annotation {i}: unknown subject_id {a.subject_id!r}")
        if a.offset <= a.onset:
            raise DatasetError(f"{where}: annotation {i}: offset must be greater than onset")
        key = (a.subject_id, a.condition)
        prev = last.get(key)
        if prev is not None and a.onset < prev.offset:
            raise DatasetError(
                f"{where}: annotation {i}: episodes of {key} overlap ({prev.onset}-{prev.offset} and "
                f"{a.onset}-{a.offset})")
        last[key] = a


def make_dataset(
    segments: Mapping[str, Segments],
    annotations: Iterable[EpisodeAnnotation],
    profiles: Iterable[SubjectProfile] | Mapping[str, SubjectProfile],
    warnings: Sequence[str] = (),
    where: str = "dataset",
) -> Dataset:
    """Validate the pieces of a cohort and assemble a :class:`Dataset`."""
    if isinstance(profiles, Mapping):
        profiles = dict(profiles)
    else:
        profiles = {p.subject_id: p for p in profiles}
    annotations = tuple(sorted(annotations, key=lambda a: (a.subject_id, a.condition, a.onset)))
    for p in profiles.values():
        _check_windows(p, where)
    for s, seg in segments.items():
        if s not in profiles:
            raise DatasetError(f"{where}: unknown subject_id {s!r} in segments")
        _check_segments(s, seg, profiles[s], where)
    _check_annotations(annotations, profiles, where)
    return Dataset(dict(segments), annotations, profiles, tuple(warnings))


# -- file IO ------------------------------------------------------------------

def _scan_segment_rows(path: str, header: list[str]):
    """Slow path: find the first malformed row to cite its line number."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        next(reader)
        for lineno, row in enumerate(reader, start=2):
            if len(row) != len(header):
                raise DatasetError(f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}")
            rec = dict(zip(header, row))
            for name, conv in (("start_ms", int), ("end_ms", int), ("score", float), ("sqi", float)):
                if name not in rec or (name == "sqi" and rec[name] == ""):
                    continue
                try:
                    conv(rec[name])
                except ValueError:
                    raise DatasetError(f"{path}:{lineno}: invalid {name} value {rec[name]!r}") from None
    raise DatasetError(f"{path}: unreadable segments file")


def _read_segments_table(path: str):
    with open(path, newline="") as fh:
        header = next(csv.reader(fh), None)
    if not header:
        raise DatasetError(f"{path}: empty file")
    header = [h.strip() for h in header]
    missing = [c for c in SEGMENT_COLUMNS[:4] if c not in header]
    if missing:
        raise DatasetError(f"{path}:1: missing required column(s) {', '.join(missing)}")
    unknown = [c for c in header if c not in SEGMENT_COLUMNS]
    if unknown:
        raise DatasetError(f"{path}:1: unknown column(s) {', '.join(unknown)}")
    types = {"subject_id": pa.string(), "start_ms": pa.int64(), "end_ms": pa.int64(),
             "score": pa.float64(), "sqi": pa.float64(), "scenario": pa.string()}
    try:
        table = pacsv.read_csv(
            path,
            read_options=pacsv.ReadOptions(column_names=header, skip_rows=1),
            convert_options=pacsv.ConvertOptions(
                column_types={c: types[c] for c in header}, strings_can_be_null=False),
        )
    except (pa.ArrowInvalid, pa.ArrowTypeError):
        _scan_segment_rows(path, header)
    return table, header


def _first_line(mask, offset=2) -> int:
    return int(np.flatnonzero(mask)[0]) + offset


def _load_segments(path: str, profiles: Mapping[str, SubjectProfile], warnings: list[str]):
    table, header = _read_segments_table(path)
    n = table.num_rows
    for name in ("start_ms", "end_ms", "score"):
        nulls = table.column(name).is_null().to_numpy(zero_copy_only=False)
        if nulls.any():
            raise DatasetError(f"{path}:{_first_line(nulls)}: missing {name}")
    start = table.column("start_ms").to_numpy()
    end = table.column("end_ms").to_numpy()
    score = table.column("score").to_numpy()
    if "sqi" in header:
        sqi_col = table.column("sqi")
        missing = sqi_col.is_null().to_numpy(zero_copy_only=False)
        sqi = pc.fill_null(sqi_col, 1.0).to_numpy()
    else:
        missing = np.ones(n, dtype=bool)
        sqi = np.ones(n)
    if missing.any():
        lines = (np.flatnonzero(missing)[:5] + 2).tolist()
        warnings.append(
            f"{path}: {int(missing.sum())} row(s) without sqi defaulted to 1.0 (first lines {lines})")

    for bad, what in (
        (end <= start, "end_ms must be greater than start_ms"),
        (start < 0, "timestamps must be non-negative"),
        (~((score >= 0) & (score <= 1)), "score must lie in [0, 1]"),
        (~((sqi >= 0) & (sqi <= 1)), "sqi must lie in [0, 1]"),
    ):
        if bad.any():
            raise DatasetError(f"{path}:{_first_line(bad)}: {what}")

    subj = pc.dictionary_encode(table.column("subject_id")).combine_chunks()
    codes = subj.indices.to_numpy(zero_copy_only=False).astype(np.int64)
    names = subj.dictionary.to_pylist()
    for k, name in enumerate(names):
        if name not in profiles:
            raise DatasetError(f"{path}:{_first_line(codes == k)}: unknown subject_id {name!r}")

    if "scenario" in header:
        scen = pc.dictionary_encode(table.column("scenario")).combine_chunks()
        lookup = np.array([v if v else None for v in scen.dictionary.to_pylist()] or [None], dtype=object)
        scenario = lookup[scen.indices.to_numpy(zero_copy_only=False)]
    else:
        scenario = np.full(n, None, dtype=object)
    del table

    order_names = np.argsort(np.array(names, dtype=object)) if names else np.zeros(0, np.int64)
    rank = np.empty(len(names), dtype=np.int64)
    rank[order_names] = np.arange(len(names))
    key = rank[codes] if n else codes
    if n and np.all(np.diff(key) >= 0):
        order = None
    else:
        order = np.argsort(key, kind="stable")
        key = key[order]
    bounds = np.searchsorted(key, np.arange(len(names) + 1))
    out: dict[str, Segments] = {}
    for r, k in enumerate(order_names):
        lo, hi = bounds[r], bounds[r + 1]
        idx = slice(lo, hi) if order is None else order[lo:hi]
        s = start[idx]
        if np.any(np.diff(s) < 0):
            sub = np.argsort(s, kind="stable")
            idx = (np.arange(lo, hi) if order is None else order[lo:hi])[sub]
            s = start[idx]
        out[names[k]] = Segments(s, end[idx], score[idx], sqi[idx], scenario[idx])
    return out


def _load_annotations(path: str) -> list[EpisodeAnnotation]:
    rows = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise DatasetError(f"{path}: empty file")
        header = [h.strip() for h in header]
        missing = [c for c in ANNOTATION_COLUMNS if c not in header]
        if missing:
            raise DatasetError(f"{path}:1: missing required column(s) {', '.join(missing)}")
        cols = [header.index(c) for c in ANNOTATION_COLUMNS]
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise DatasetError(f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}")
            subject, condition, onset, offset = (row[c] for c in cols)
            try:
                onset_i, offset_i = int(onset), int(offset)
            except ValueError:
                raise DatasetError(f"{path}:{lineno}: onset_ms/offset_ms must be integers") from None
            if offset_i <= onset_i:
                raise DatasetError(f"{path}:{lineno}: offset_ms must be greater than onset_ms")
            if onset_i < 0:
                raise DatasetError(f"{path}:{lineno}: timestamps must be non-negative")
            rows.append(EpisodeAnnotation(subject, condition, onset_i, offset_i))
    return rows


def _load_subjects(path: str, warnings: list[str]) -> dict[str, SubjectProfile]:
    profiles = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
                sid = obj["subject_id"]
                attrs = {str(k): str(v) for k, v in (obj.get("attributes") or {}).items()}
                windows = obj.get("monitored_windows")
                if windows is not None:
                    windows = tuple((int(s), int(e)) for s, e in windows)
            except (ValueError, KeyError, TypeError) as exc:
                raise DatasetError(f"{path}:{lineno}: malformed subject record ({exc})") from None
            if not isinstance(sid, str):
                raise DatasetError(f"{path}:{lineno}: subject_id must be a string")
            if sid in profiles:
                raise DatasetError(f"{path}:{lineno}: duplicate subject_id {sid!r}")
            profiles[sid] = SubjectProfile(sid, attrs, windows)
    return profiles


def load_dataset(segments_path, annotations_path, subjects_path) -> Dataset:
    """Read and validate the three cohort files.

    Segments missing an ``sqi`` value are taken as clean (``sqi = 1.0``) and
    noted in ``Dataset.warnings``. Subjects without ``monitored_windows`` get
    the hull of their segments, also with a warning.
    """
    segments_path, annotations_path, subjects_path = map(os.fspath, (segments_path, annotations_path, subjects_path))
    for p in (segments_path, annotations_path, subjects_path):
        if not os.path.isfile(p):
            raise DatasetError(f"{p}: no such file")
    warnings: list[str] = []
    profiles = _load_subjects(subjects_path, warnings)
    segments = _load_segments(segments_path, profiles, warnings)
    for sid, p in list(profiles.items()):
        if p.monitored_windows is None:
            seg = segments.get(sid)
            hull = ((int(seg.start[0]), int(seg.end.max())),) if seg is not None and len(seg) else ()
            profiles[sid] = SubjectProfile(sid, p.attributes, hull)
            warnings.append(f"{subjects_path}: subject {sid!r} has no monitored_windows; using segment hull")
    annotations = _load_annotations(annotations_path)
    for i, a in enumerate(annotations):
        if a.subject_id not in profiles:
            raise DatasetError(f"{annotations_path}:{i + 2}: unknown subject_id {a.subject_id!r}")
    return make_dataset(segments, annotations, profiles, warnings, where=segments_path)


def write_segments(path, subject_segments: Mapping[str, Segments]):
    ids = sorted(subject_segments)
    blocks = [subject_segments[s] for s in ids]
    counts = [len(b) for b in blocks]
    if sum(counts):
        scen = np.concatenate([b.scenario for b in blocks])
        scen = np.where(scen == None, "", scen)  # noqa: E711
        table = pa.table({
            "subject_id": pa.DictionaryArray.from_arrays(
                np.repeat(np.arange(len(ids), dtype=np.int32), counts), pa.array(ids, pa.string())
            ).cast(pa.string()),
            "start_ms": np.concatenate([b.start for b in blocks]),
            "end_ms": np.concatenate([b.end for b in blocks]),
            "score": np.concatenate([b.score for b in blocks]),
            "sqi": np.concatenate([b.sqi for b in blocks]),
            "scenario": pa.array(scen.tolist(), pa.string()),
        })
    with open(path, "wb") as fh:
        fh.write((",".join(SEGMENT_COLUMNS) + "\n").encode())
        if sum(counts):
            pacsv.write_csv(table, fh, pacsv.WriteOptions(include_header=False, quoting_style="none"))


def write_annotations(path, annotations: Iterable[EpisodeAnnotation]):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(ANNOTATION_COLUMNS)
        for a in annotations:
            w.writerow((a.subject_id, a.condition, a.onset, a.offset))


def write_subjects(path, profiles: Mapping[str, SubjectProfile]):
    with open(path, "w") as fh:
        for sid in sorted(profiles):
            p = profiles[sid]
            fh.write(json.dumps({
                "subject_id": sid,
                "attributes": dict(p.attributes),
                "monitored_windows": [list(w) for w in p.monitored_windows],
            }, sort_keys=True) + "\n")


def write_dataset(dataset: Dataset, directory) -> dict[str, str]:
    """Write ``segments.csv``, ``annotations.csv`` and ``subjects.jsonl``."""
    directory = os.fspath(directory)
    os.makedirs(directory, exist_ok=True)
    paths = {
        "segments": os.path.join(directory, "segments.csv"),
        "annotations": os.path.join(directory, "annotations.csv"),
        "subjects": os.path.join(directory, "subjects.jsonl"),
    }
    write_segments(paths["segments"], dataset.segments)
    write_annotations(paths["annotations"], dataset.annotations)
    write_subjects(paths["subjects"], dataset.profiles)
    return paths


# -- ground truth -------------------------------------------------------------

def _episode_arrays(annotations, subject_id, condition):
    if isinstance(annotations, Dataset):
        return annotations.episodes(subject_id, condition)
    rows = sorted((a.onset, a.offset) for a in annotations
                  if a.subject_id == subject_id and a.condition == condition)
    return (np.array([r[0] for r in rows], dtype=np.int64),
            np.array([r[1] for r in rows], dtype=np.int64))


def truth_labels(start, end, onset, offset, theta: float = DEFAULT_THETA) -> np.ndarray:
    """Vectorised segment truth: overlap fraction with the episodes >= ``theta``."""
    if not 0 < theta <= 1:
        raise ValueError("theta must lie in (0, 1]")
    start = np.asarray(start, dtype=np.int64)
    end = np.asarray(end, dtype=np.int64)
    ov = _intervals.overlap_with_union(start, end, onset, offset)
    # the product is exact for dyadic theta such as the default 0.5
    return ov >= theta * (end - start)


def truth_label(segment: ScoredSegment, annotations, condition: str, theta: float = DEFAULT_THETA) -> bool:
    onset, offset = _episode_arrays(annotations, segment.subject_id, condition)
    return bool(truth_labels([segment.start], [segment.end], onset, offset, theta)[0])


def burden_truth(annotations, subject_id: str, condition: str, window: tuple[int, int]) -> float:
    """Fraction of ``window`` covered by the subject's episodes of ``condition``."""
    lo, hi = int(window[0]), int(window[1])
    if hi <= lo:
        raise ValueError("burden window must be non-empty")
    onset, offset = _episode_arrays(annotations, subject_id, condition)
    covered = _intervals.overlap_with_union([lo], [hi], onset, offset)[0]
    return float(covered) / (hi - lo)
