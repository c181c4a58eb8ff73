"""Command-line entry point: ``validate``, ``evaluate``, ``sweep`` and ``synth``.

Configuration comes from one JSON file (``--config``) with flag overrides;
flags win. Errors are printed to stderr as one JSON object. Exit codes are
0 on success, 1 on usage or validation errors and 2 on internal errors.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from dataclasses import dataclass, field, replace
from typing import Mapping, Sequence

from . import artifact_tolerance as at
from . import episode_eval as ee
from .aggregation import (
    PRESETS, DEFAULT_MATCH_TOLERANCE, RuleFamily, preset, rule_from_config, schedule_from_config, sweep_rules,
    write_notifications,
)
from .cohort_report import DEFAULT_MIN_SUBGROUP_SIZE, EvalConfig, evaluate, render_report
from .segment_metrics import write_curve
from .synthgen import SynthConfig, gen_cohort
from .timeline import DEFAULT_THETA, load_dataset, write_dataset


class UsageError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# -- run configuration ------------------------------------------------------------------

@dataclass
class RunConfig:
    segments: str | None = None
    annotations: str | None = None
    subjects: str | None = None
    out: str | None = None
    condition: str = "AF"
    preset: str | None = "apple"
    schedule: dict | None = None
    rule: dict | None = None
    theta: float = DEFAULT_THETA
    positive_threshold: float = 0.5
    perf_min: float = 0.8
    bins: list = field(default_factory=lambda: list(at.DECILES))
    min_bin_count: int = at.DEFAULT_MIN_BIN_COUNT
    atc_metric: str = "accuracy"
    stratify: list = field(default_factory=list)
    units: list = field(default_factory=lambda: ["hour", "day"])
    match_tolerance_ms: int = DEFAULT_MATCH_TOLERANCE
    merge_gap_ms: int | None = None
    min_duration_ms: int = ee.DEFAULT_MIN_DURATION
    min_subgroup_size: int = DEFAULT_MIN_SUBGROUP_SIZE
    plots: bool = True
    families: list = field(default_factory=list)
    truth_level: str = "notification"

    @classmethod
    def from_sources(cls, path: str | None, overrides: Mapping) -> RunConfig:
        data = {}
        if path:
            with open(path) as fh:
                data = json.load(fh)
            if not isinstance(data, dict):
                raise UsageError(f"{path}: config must be a JSON object")
        data.update({k: v for k, v in overrides.items() if v is not None})
        known = set(cls.__dataclass_fields__)
        unknown = sorted(set(data) - known)
        if unknown:
            raise UsageError(f"unknown config key(s): {', '.join(unknown)}")
        cfg = cls(**data)
        if cfg.preset is not None and cfg.preset not in PRESETS:
            raise UsageError(f"unknown preset {cfg.preset!r} (expected one of {', '.join(PRESETS)})")
        return cfg

    def require(self, *names):
        missing = [n for n in names if not getattr(self, n)]
        if missing:
            raise UsageError("missing required setting(s): " + ", ".join("--" + n for n in missing))

    def eval_config(self) -> EvalConfig:
        schedule = rule = None
        if self.preset is not None:
            schedule, rule = preset(self.preset)
        if self.schedule is not None:
            schedule = schedule_from_config(self.schedule)
        if self.rule is not None:
            rule = rule_from_config(self.rule)
        if schedule is None or rule is None:
            raise UsageError("a preset or both schedule and rule configs are required")
        return EvalConfig(
            condition=self.condition, preset=self.preset, schedule=schedule, rule=rule, theta=self.theta,
            positive_threshold=self.positive_threshold, units=tuple(self.units),
            match_tolerance=self.match_tolerance_ms, merge_gap=self.merge_gap_ms,
            min_duration=self.min_duration_ms, atc_metric=self.atc_metric, bins=tuple(self.bins),
            min_bin_count=self.min_bin_count, perf_min=self.perf_min, stratify=tuple(self.stratify),
            min_subgroup_size=self.min_subgroup_size,
        )


# -- commands ----------------------------------------------------------------------------

def _load(cfg: RunConfig):
    cfg.require("segments", "annotations", "subjects")
    return load_dataset(cfg.segments, cfg.annotations, cfg.subjects)


def _emit(obj):
    sys.stdout.write(json.dumps(obj, sort_keys=True, indent=2) + "\n")


def cmd_validate(cfg: RunConfig) -> int:
    ds = _load(cfg)
    _emit({"valid": True, "n_subjects": len(ds.profiles), "n_segments": ds.n_segments,
           "n_annotations": len(ds.annotations), "conditions": ds.conditions,
           "monitored_hours": ds.monitored_ms() / 3_600_000, "warnings": list(ds.warnings)})
    return 0


def _plot(path, xs, ys, xlabel, ylabel, title, diagonal=False):
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    with matplotlib.rc_context({"svg.hashsalt": "cmeval", "svg.fonttype": "none"}):
        fig, ax = plt.subplots(figsize=(4.5, 4.0))
        if diagonal:
            ax.plot([0, 1], [0, 1], color="0.7", lw=0.8, ls="--")
        ax.plot(xs, ys, color="C0", lw=1.5, marker="o" if len(xs) <= 20 else None, ms=3)
        ax.set(xlabel=xlabel, ylabel=ylabel, title=title, xlim=(-0.02, 1.02), ylim=(-0.02, 1.02))
        ax.grid(alpha=0.3)
        fig.tight_layout()
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)


def cmd_evaluate(cfg: RunConfig) -> int:
    cfg.require("out")
    ecfg = cfg.eval_config()
    ds = _load(cfg)
    res = evaluate(ds, ecfg)
    report = dict(res.report)
    report["config"] = {**report["config"], "dataset_paths": {
        "segments": os.path.basename(cfg.segments), "annotations": os.path.basename(cfg.annotations),
        "subjects": os.path.basename(cfg.subjects)}}
    out = cfg.out
    os.makedirs(os.path.join(out, "curves"), exist_ok=True)
    with open(os.path.join(out, "report.json"), "w") as fh:
        fh.write(render_report(report, "json"))
    with open(os.path.join(out, "report.md"), "w") as fh:
        fh.write(render_report(report, "markdown"))
    if res.curves["roc"]:
        write_curve(os.path.join(out, "curves", "roc.csv"), res.curves["roc"])
    if res.curves["pr"]:
        write_curve(os.path.join(out, "curves", "pr.csv"), res.curves["pr"])
    if res.curves["atc"]:
        at.write_atc(os.path.join(out, "curves", "atc.csv"), res.curves["atc"])
    write_notifications(os.path.join(out, "notifications.csv"), res.notifications)
    ee.write_episodes(os.path.join(out, "episodes.csv"), res.episode_match)
    if cfg.plots:
        os.makedirs(os.path.join(out, "plots"), exist_ok=True)
        if res.curves["roc"]:
            roc = res.curves["roc"]
            _plot(os.path.join(out, "plots", "roc.svg"), [p.x for p in roc], [p.y for p in roc],
                  "false positive rate", "sensitivity", "Segment ROC", diagonal=True)
        if res.curves["pr"]:
            pr = res.curves["pr"]
            _plot(os.path.join(out, "plots", "pr.svg"), [p.x for p in pr], [p.y for p in pr],
                  "recall", "precision", "Segment precision-recall")
        if res.curves["atc"]:
            atc = res.curves["atc"]
            _plot(os.path.join(out, "plots", "atc.svg"), [p.quality for p in atc], [p.metric_value for p in atc],
                  "signal quality (1 - artifact fraction)", ecfg.atc_metric, "Artifact tolerance")
    seg = report["segment_level"].get("metrics", {}).get("values", {})
    _emit({"out": out, "n_segments": report["dataset"]["n_segments"],
           "n_notifications": report["aggregation_level"]["n_notifications"],
           "auroc": seg.get("auroc"), "auprc": seg.get("auprc")})
    return 0


def cmd_sweep(cfg: RunConfig) -> int:
    cfg.require("out")
    if not cfg.families:
        raise UsageError("sweep needs a non-empty 'families' list in the config")
    families = []
    for f in cfg.families:
        try:
            families.append(RuleFamily(f["name"], f["variant"], f.get("grid", {}), f.get("base", {})))
        except KeyError as exc:
            raise UsageError(f"rule family is missing {exc.args[0]!r}") from None
    if sum(len(f.settings()) for f in families) == 0 or any(not f.grid for f in families):
        raise UsageError("empty parameter grid")
    schedule = preset(cfg.preset)[0] if cfg.preset else None
    if cfg.schedule is not None:
        schedule = schedule_from_config(cfg.schedule)
    if schedule is None:
        raise UsageError("a preset or a schedule config is required")
    ds = _load(cfg)
    res = sweep_rules(families, ds, schedule, cfg.condition, cfg.truth_level, cfg.match_tolerance_ms)
    os.makedirs(cfg.out, exist_ok=True)
    keys = sorted({k for p in res.points for k in p.params})
    with open(os.path.join(cfg.out, "sweep.csv"), "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["family", *keys, "precision", "recall", "n_notifications", "true_positives"])
        for p in res.points:
            w.writerow([p.family, *(p.params.get(k, "") for k in keys),
                        "" if p.precision is None else repr(p.precision), repr(p.recall),
                        p.n_notifications, p.true_positives])
    summary = {"truth_level": res.truth_level, "n_settings": len(res.points), "auprc": res.auprc,
               "pareto": res.pareto}
    with open(os.path.join(cfg.out, "sweep.json"), "w") as fh:
        fh.write(json.dumps(summary, sort_keys=True, indent=2) + "\n")
    _emit(summary)
    return 0


def cmd_synth(args) -> int:
    if not args.config:
        raise UsageError("synth needs --config <synth.json>")
    if not args.out:
        raise UsageError("synth needs --out <dir>")
    config = SynthConfig.from_json(args.config)
    if args.seed is not None:
        config = replace(config, seed=args.seed)
    cohort = gen_cohort(config)
    paths = write_dataset(cohort.dataset, args.out)
    with open(os.path.join(args.out, "truth.json"), "w") as fh:
        fh.write(json.dumps(cohort.truth, sort_keys=True, indent=2) + "\n")
    _emit({"n_subjects": len(cohort.dataset.profiles), "n_segments": cohort.dataset.n_segments,
           "n_annotations": len(cohort.dataset.annotations), "files": paths})
    return 0


# -- entry point ----------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="cmeval", description="Evaluate continuous-monitoring detectors on scored segments.")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)
    common = _Parser(add_help=False)
    common.add_argument("--config", help="JSON run configuration; flags override its keys")
    common.add_argument("--out", help="output directory")

    data = _Parser(add_help=False)
    data.add_argument("--segments")
    data.add_argument("--annotations")
    data.add_argument("--subjects")
    data.add_argument("--condition")

    run = _Parser(add_help=False)
    run.add_argument("--preset", choices=None, help="apple | fitbit | huawei")
    run.add_argument("--stratify", action="append", metavar="ATTR", help="stratify by a subject attribute")
    run.add_argument("--unit", action="append", choices=("hour", "day"), help="interval unit (repeatable)")
    run.add_argument("--perf-min", type=float, dest="perf_min")
    run.add_argument("--no-plots", action="store_true")
    run.add_argument("--seed", type=int, help="accepted for symmetry; evaluation is deterministic")

    sub.add_parser("validate", parents=[common, data], help="check dataset files")
    sub.add_parser("evaluate", parents=[common, data, run], help="write the full report")
    sub.add_parser("sweep", parents=[common, data, run], help="precision/recall over rule grids")
    sp = sub.add_parser("synth", parents=[common], help="generate a synthetic cohort")
    sp.add_argument("--seed", type=int)
    return p


def _run_config(args) -> RunConfig:
    overrides = {k: getattr(args, k, None) for k in
                 ("segments", "annotations", "subjects", "out", "condition", "preset", "perf_min")}
    if getattr(args, "stratify", None):
        overrides["stratify"] = args.stratify
    if getattr(args, "unit", None):
        overrides["units"] = args.unit
    if getattr(args, "no_plots", False):
        overrides["plots"] = False
    return RunConfig.from_sources(args.config, overrides)


def _fail(code: int, exc: BaseException) -> int:
    sys.stderr.write(json.dumps({"error": str(exc), "type": type(exc).__name__, "exit_code": code},
                                sort_keys=True) + "\n")
    return code


def main(argv: Sequence[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        if args.command is None:
            raise UsageError("a command is required: validate, evaluate, sweep or synth")
        if args.command == "synth":
            return cmd_synth(args)
        cfg = _run_config(args)
        return {"validate": cmd_validate, "evaluate": cmd_evaluate, "sweep": cmd_sweep}[args.command](cfg)
    except (ValueError, OSError) as exc:
        # DatasetError, UsageError and JSON decode errors are all ValueErrors
        return _fail(1, exc)
    except Exception as exc:  # noqa: BLE001
        return _fail(2, exc)


if __name__ == "__main__":
    sys.exit(main())
