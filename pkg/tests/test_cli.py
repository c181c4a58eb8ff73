import json

import pytest

from cmeval import cli


@pytest.fixture(scope="module")
def data(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli")
    synth = root / "synth.json"
    synth.write_text(json.dumps({"seed": 42, "n_subjects": 6, "horizon_ms": 2 * 86_400_000,
                                 "scenarios": {"rest": 0.7, "exercise": 0.3}}))
    assert cli.main(["synth", "--config", str(synth), "--out", str(root / "ds")]) == 0
    return root


def _paths(root):
    d = root / "ds"
    return ["--segments", str(d / "segments.csv"), "--annotations", str(d / "annotations.csv"),
            "--subjects", str(d / "subjects.jsonl")]


def _err(capsys):
    return json.loads(capsys.readouterr().err.strip().splitlines()[-1])


def test_validate_ok(data, capsys):
    assert cli.main(["validate", *_paths(data)]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["valid"] and out["n_subjects"] == 6 and out["n_segments"] == 6 * 5760


def test_validate_broken_row(data, tmp_path, capsys):
    lines = (data / "ds" / "segments.csv").read_text().splitlines()
    parts = lines[3].split(",")
    parts[3] = "7.5"
    lines[3] = ",".join(parts)
    bad = tmp_path / "segments.csv"
    bad.write_text("\n".join(lines) + "\n")
    args = _paths(data)
    args[1] = str(bad)
    assert cli.main(["validate", *args]) == 1
    assert ":4:" in _err(capsys)["error"]


def test_validate_missing_file(data, capsys):
    args = _paths(data)
    args[1] = str(data / "nope.csv")
    assert cli.main(["validate", *args]) == 1
    assert "nope.csv" in _err(capsys)["error"]


def test_unknown_preset(data, tmp_path, capsys):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"preset": "garmin"}))
    code = cli.main(["evaluate", "--config", str(cfg), *_paths(data), "--out", str(tmp_path / "o")])
    assert code == 1 and "unknown preset" in _err(capsys)["error"]


def test_unknown_config_key(data, tmp_path, capsys):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"presett": "apple"}))
    assert cli.main(["evaluate", "--config", str(cfg), *_paths(data), "--out", str(tmp_path)]) == 1


def test_evaluate_outputs_and_determinism(data, tmp_path, capsys):
    outs = []
    for name in ("a", "b"):
        out = tmp_path / name
        assert cli.main(["evaluate", *_paths(data), "--preset", "apple", "--stratify", "sex",
                         "--out", str(out)]) == 0
        outs.append(out)
    for rel in ("report.json", "report.md", "curves/roc.csv", "curves/pr.csv", "curves/atc.csv",
                "notifications.csv", "episodes.csv", "plots/roc.svg", "plots/pr.svg", "plots/atc.svg"):
        assert (outs[0] / rel).read_bytes() == (outs[1] / rel).read_bytes(), rel
    md = (outs[0] / "report.md").read_text()
    for head in ("## 1. Cohort", "## 2. Target scenarios", "## 3. Evaluation", "## 4. Metrics"):
        assert head in md
    report = json.loads((outs[0] / "report.json").read_text())
    assert report["config"]["preset"] == "apple"
    assert report["config"]["dataset_paths"]["segments"] == "segments.csv"


def test_flags_override_config(data, tmp_path):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"preset": "huawei", "plots": False}))
    out = tmp_path / "o"
    assert cli.main(["evaluate", "--config", str(cfg), *_paths(data), "--preset", "fitbit", "--out", str(out)]) == 0
    assert json.loads((out / "report.json").read_text())["config"]["preset"] == "fitbit"
    assert not (out / "plots").exists()


def _sweep_cfg(tmp_path, grid):
    cfg = tmp_path / "sweep.json"
    cfg.write_text(json.dumps({"preset": "apple", "families": [
        {"name": "consecutive", "variant": "consecutive", "grid": grid, "base": {"cooldown_ms": 1}}]}))
    return cfg


def test_sweep_ten_rows(data, tmp_path):
    cfg = _sweep_cfg(tmp_path, {"k": list(range(1, 11))})
    assert cli.main(["sweep", "--config", str(cfg), *_paths(data), "--out", str(tmp_path / "s")]) == 0
    rows = (tmp_path / "s" / "sweep.csv").read_text().splitlines()
    assert len(rows) == 11
    summary = json.loads((tmp_path / "s" / "sweep.json").read_text())
    assert "consecutive" in summary["auprc"]


def test_sweep_empty_grid(data, tmp_path, capsys):
    cfg = _sweep_cfg(tmp_path, {"k": []})
    assert cli.main(["sweep", "--config", str(cfg), *_paths(data), "--out", str(tmp_path / "s")]) == 1
    assert "empty" in _err(capsys)["error"]


def test_synth_reproducible_and_invalid(tmp_path, capsys):
    cfg = tmp_path / "synth.json"
    cfg.write_text(json.dumps({"seed": 42, "n_subjects": 2, "horizon_ms": 86_400_000}))
    for name in ("a", "b"):
        assert cli.main(["synth", "--config", str(cfg), "--out", str(tmp_path / name)]) == 0
    for f in ("segments.csv", "annotations.csv", "subjects.jsonl", "truth.json"):
        assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()
    seg_lines = (tmp_path / "a" / "segments.csv").read_text().count("\n")
    assert seg_lines == 2 * 2880 + 1
    cfg.write_text(json.dumps({"n_subjects": 0}))
    assert cli.main(["synth", "--config", str(cfg), "--out", str(tmp_path / "c")]) == 1
    assert "n_subjects" in _err(capsys)["error"]


def test_usage_errors_exit_one(capsys):
    assert cli.main([]) == 1
    assert cli.main(["evaluate", "--bogus"]) == 1
    assert cli.main(["evaluate"]) == 1
    capsys.readouterr()


def test_internal_error_exit_two(monkeypatch, data, capsys):
    def boom(*a, **k):
        raise RuntimeError("kaboom")
    monkeypatch.setattr(cli, "cmd_validate", boom)
    assert cli.main(["validate", *_paths(data)]) == 2
    assert _err(capsys)["exit_code"] == 2


def test_module_entry_point():
    import subprocess
    import sys
    r = subprocess.run([sys.executable, "-m", "cmeval", "--help"], capture_output=True, text=True)
    assert r.returncode == 0 and "validate" in r.stdout
