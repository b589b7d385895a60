from __future__ import annotations

import csv
import io
import shutil

import pytest

from tracecarve import pipeline
from tracecarve.cli import run
from tracecarve.errors import ConfigInvalid


def test_config_defaults_and_environment(tmp_path):
    env = {"TRACECARVE_FLAKY_RUNS": "3", "TRACECARVE_ASSERT_MODE": "native-eq"}
    cfg = pipeline.config_from({"subject": tmp_path, "out": tmp_path / "o"}, env)
    assert cfg.flaky_runs == 3 and cfg.assert_mode == "native-eq"
    assert cfg.threshold_bytes == 200_000_000 and cfg.inline_threshold_bytes == 1024
    assert cfg.variant_timeout == 60 and cfg.store_root == tmp_path / "o" / "store"
    flagged = pipeline.config_from({"subject": tmp_path, "out": tmp_path, "flaky_runs": 7}, env)
    assert flagged.flaky_runs == 7


@pytest.mark.parametrize(
    "values",
    [
        {"threshold_bytes": 0},
        {"flaky_runs": -1},
        {"assert_mode": "fuzzy"},
        {"targets": "/does/not/exist"},
        {"subject": "/does/not/exist"},
    ],
)
def test_invalid_config(tmp_path, values):
    with pytest.raises(ConfigInvalid):
        pipeline.config_from({"subject": tmp_path, "out": tmp_path, **values}, {})


def test_bad_environment_value(tmp_path):
    with pytest.raises(ConfigInvalid):
        pipeline.config_from({"subject": tmp_path, "out": tmp_path}, {"TRACECARVE_SEED": "x"})


def test_config_error_exit_code(tmp_path, capsys):
    assert run(["select-targets", "--subject", str(tmp_path), "--out", str(tmp_path), "--flaky-runs", "0"]) == 2
    assert "configuration error" in capsys.readouterr().err


def test_missing_subject_flag(tmp_path, monkeypatch):
    monkeypatch.delenv("TRACECARVE_SUBJECT", raising=False)
    assert run(["report", "--out", str(tmp_path)]) == 2


@pytest.mark.parametrize("command", ["generate", "assess", "report", "instrument"])
def test_missing_prerequisites(calc_project, tmp_path, capsys, command):
    code = run([command, "--subject", str(calc_project), "--out", str(tmp_path / "out")])
    assert code == 1
    assert "failed" in capsys.readouterr().err


def _outputs(out):
    names = [
        "classification.json", "targets.list", "instrumentation-manifest.json", "profile-stats.json",
        "synthesis-report.json", "execution.json", "assessment-report.json", "assessment-report.csv",
    ]
    return {n: (out / n).read_bytes() for n in names}


def test_pipeline_on_small_project(calc_project, tmp_path, capsys):
    out = tmp_path / "out"
    args = ["--subject", str(calc_project), "--out", str(out), "--flaky-runs", "2"]
    assert run(["pipeline", *args]) == 0
    rows = list(csv.DictReader(io.StringIO(capsys.readouterr().out)))
    by_method = {r["METHOD"]: r for r in rows}
    # with no driver the original tests are the workload
    assert set(by_method) == {"calc.ops:Calc.is_zero/0", "calc.ops:Calc.label/0", "calc.ops:Calc.reset/0"}
    label = by_method["calc.ops:Calc.label/0"]
    assert (label["#GENERATED"], label["#PASSING"], label["STATUS_AFTER"]) == ("1", "1", "well-tested")
    reset = by_method["calc.ops:Calc.reset/0"]
    assert reset["STATUS_AFTER"] == "pseudo-tested"  # nothing to observe in a None result

    assert run(["report", *args]) == 0
    assert capsys.readouterr().out.splitlines()[0].startswith("METHOD,#INVOCATIONS")
    first = _outputs(out)
    assert str(tmp_path) not in b"".join(first.values()).decode()

    # deleting the output root and running again reproduces every report
    shutil.rmtree(out)
    assert run(["pipeline", *args]) == 0
    assert _outputs(out) == first


def test_phases_one_by_one(calc_project, tmp_path, capsys):
    out = tmp_path / "out"
    targets = tmp_path / "targets.list"
    targets.write_text("# only one\ncalc.ops:Calc.is_zero/0\n")
    args = ["--subject", str(calc_project), "--out", str(out), "--targets", str(targets)]
    assert run(["select-targets", *args]) == 0
    assert (out / "targets.list").read_text() == "calc.ops:Calc.is_zero/0\n"
    assert run(["instrument", *args]) == 0
    # a user-supplied workload, run inside the instrumented tree
    workload = "python3 -c 'from calc.ops import Calc; [Calc().is_zero() for _ in range({seed})]'"
    cfg = pipeline.config_from(
        {"subject": calc_project, "out": out, "targets": targets, "workload": workload, "seed": 3}, {}
    )
    assert pipeline.run_workload(cfg).returncode == 0
    assert run(["generate", *args]) == 0
    assert "1 tests written" in capsys.readouterr().out
    assert run(["assess", *args, "--flaky-runs", "1"]) == 0
    row = list(csv.DictReader(io.StringIO(capsys.readouterr().out)))[0]
    assert (row["#INVOCATIONS"], row["#COLLECTED"], row["#UNIQUE"]) == ("3", "3", "1")
    assert row["STATUS_AFTER"] == "well-tested"
