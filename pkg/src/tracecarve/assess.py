"""Run generated tests, filter out flaky ones, and measure what they add.

A test is *pass* when every repeated run passes, *fail* when every run fails
and *flaky* otherwise. Only passing tests join the original suite for the
second mutation analysis.
"""
from __future__ import annotations

import csv
import io
import json
import logging
import shutil
import tempfile
from collections import Counter
from dataclasses import asdict, dataclass, field
from pathlib import Path

from tracecarve.errors import BaselineMissing, BaselineSuiteFails
from tracecarve.mutation import (
    DEFAULT_VARIANT_TIMEOUT,
    PSEUDO_TESTED,
    WELL_TESTED,
    Classification,
    classify_targets,
)
from tracecarve.runner import copy_tree, run_pytest
from tracecarve.store import ProfileStats
from tracecarve.synth import prune_tests

log = logging.getLogger(__name__)

PASS, FAIL, FLAKY = "pass", "fail", "flaky"
DEFAULT_RUNS = 5
CARVED_DIR = "carved"
EXECUTION_FILE = "execution.json"
REPORT_JSON = "assessment-report.json"
REPORT_CSV = "assessment-report.csv"
CSV_COLUMNS = (
    "METHOD", "#INVOCATIONS", "#COLLECTED", "#UNIQUE", "#GENERATED",
    "#PASSING", "#FAILING", "#FLAKY", "STATUS_BEFORE", "STATUS_AFTER",
)
_RANK = {PSEUDO_TESTED: 0, WELL_TESTED: 1}


@dataclass
class TestOutcome:
    outcome: str
    cause: str | None = None
    runs: list[str] = field(default_factory=list)

    __test__ = False


def combine_runs(runs: list[str]) -> str:
    """``pass`` iff all runs passed, ``fail`` iff all failed, else ``flaky``."""
    if runs and all(r == "passed" for r in runs):
        return PASS
    if runs and all(r != "passed" for r in runs):
        return FAIL
    return FLAKY


def _workspace_with_tests(subject_root: Path, generated_root: Path, suite: str) -> Path:
    workspace = Path(tempfile.mkdtemp(prefix="tracecarve-assess-"))
    copy_tree(subject_root, workspace)
    carved = workspace / suite / CARVED_DIR
    if carved.exists():
        shutil.rmtree(carved)
    copy_tree(generated_root, carved)
    return workspace


def _containers(root: Path) -> list[Path]:
    return sorted(p for p in root.glob("test_*.py"))


def execute_suite(
    generated_root: Path,
    subject_root: Path,
    tests: list[str],
    *,
    runs: int = DEFAULT_RUNS,
    suite: str = "tests",
    timeout: float | None = 600,
) -> dict[str, TestOutcome]:
    """Run the generated tests *runs* times, one run after another.

    *tests* lists test ids of the form ``<container>::<name>``. A container
    that does not compile fails all of its tests with cause
    ``compile-error``; the other containers are still run.
    """
    if runs < 1:
        raise ValueError("runs must be positive")
    generated_root = Path(generated_root)
    results: dict[str, TestOutcome] = {}
    workspace = _workspace_with_tests(Path(subject_root), generated_root, suite)
    try:
        carved = workspace / suite / CARVED_DIR
        for container in _containers(carved):
            try:
                compile(container.read_bytes(), container.name, "exec")
            except SyntaxError as exc:
                log.warning("%s does not compile: %s", container.name, exc)
                container.unlink()
                for test in tests:
                    if test.startswith(container.name + "::"):
                        results[test] = TestOutcome(FAIL, "compile-error")
        remaining = [t for t in tests if t not in results]
        history: dict[str, list[str]] = {t: [] for t in remaining}
        causes: dict[str, list[str]] = {t: [] for t in remaining}
        prefix = f"{suite}/{CARVED_DIR}/"
        for _ in range(runs if remaining else 0):
            run = run_pytest([f"{suite}/{CARVED_DIR}"], cwd=workspace, timeout=timeout)
            for test in remaining:
                record = run.outcomes.get(prefix + test)
                if record is None:
                    history[test].append("failed")
                    causes[test].append("timeout" if run.timed_out else "not-run")
                    continue
                history[test].append(record["outcome"])
                if record["outcome"] != "passed" and record.get("cause"):
                    causes[test].append(record["cause"])
        for test in remaining:
            outcome = combine_runs(history[test])
            cause = None
            if outcome != PASS:
                cause = Counter(causes[test]).most_common(1)[0][0] if causes[test] else None
            results[test] = TestOutcome(outcome, cause, history[test])
    finally:
        shutil.rmtree(workspace, ignore_errors=True)
    return dict(sorted(results.items()))


def write_execution(results: dict[str, TestOutcome], path: Path) -> Path:
    payload = {t: asdict(o) for t, o in sorted(results.items())}
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    return Path(path)


def read_execution(path: Path) -> dict[str, TestOutcome]:
    return {t: TestOutcome(**o) for t, o in json.loads(Path(path).read_text()).items()}


@dataclass
class MethodReport:
    method: str
    invocations: int
    collected: int
    unique: int
    generated: int
    passing: int
    failing: int
    flaky: int
    status_before: str | None
    status_after: str | None
    causes: dict[str, int] = field(default_factory=dict)


@dataclass
class AssessmentReport:
    methods: list[MethodReport]
    downgrades: list[str] = field(default_factory=list)
    demoted: list[str] = field(default_factory=list)
    # generated tests that joined the suite for the second classification
    suite_tests: list[str] = field(default_factory=list)

    def row(self, method: str) -> MethodReport:
        for report in self.methods:
            if report.method == method:
                return report
        raise KeyError(method)

    def improved(self) -> list[str]:
        return [
            r.method for r in self.methods
            if r.status_before == PSEUDO_TESTED and r.status_after == WELL_TESTED
        ]

    def to_json(self) -> str:
        payload = {
            "methods": [asdict(r) for r in self.methods],
            "downgrades": self.downgrades,
            "demoted": self.demoted,
            "suite_tests": self.suite_tests,
        }
        return json.dumps(payload, indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text: str) -> AssessmentReport:
        data = json.loads(text)
        return cls(
            [MethodReport(**r) for r in data["methods"]],
            data["downgrades"],
            data["demoted"],
            data["suite_tests"],
        )

    def to_csv(self) -> str:
        out = io.StringIO()
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for r in self.methods:
            writer.writerow([
                r.method, r.invocations, r.collected, r.unique, r.generated,
                r.passing, r.failing, r.flaky, r.status_before or "", r.status_after or "",
            ])
        return out.getvalue()


def _keep_passing(carved: Path, passing: set[str]) -> None:
    for container in _containers(carved):
        keep = {t.split("::", 1)[1] for t in passing if t.startswith(container.name + "::")}
        if not keep:
            container.unlink()
            continue
        container.write_text(prune_tests(container.read_text(encoding="utf-8"), keep), encoding="utf-8")
    if not _containers(carved):
        shutil.rmtree(carved)


def assess_improvement(
    subject_root: Path,
    generated_root: Path,
    results: dict[str, TestOutcome],
    tests: dict[str, str],
    baseline: Classification | None,
    stats: dict[str, ProfileStats],
    *,
    suite: str = "tests",
    targets: list[str] | None = None,
    timeout: float = DEFAULT_VARIANT_TIMEOUT,
    jobs: int | None = None,
) -> AssessmentReport:
    """Re-classify the subject with the passing generated tests added to its suite.

    *tests* maps test ids to method ids. Generated tests that pass alone but
    fail inside the combined suite are demoted to flaky, with cause
    ``order-dependent``, and left out.
    """
    if baseline is None:
        raise BaselineMissing("no baseline classification")
    results = dict(results)
    passing = {t for t, o in results.items() if o.outcome == PASS}
    demoted: list[str] = []
    workspace = _workspace_with_tests(Path(subject_root), Path(generated_root), suite)
    try:
        carved = workspace / suite / CARVED_DIR
        if carved.exists():
            _keep_passing(carved, passing)
        prefix = f"{suite}/{CARVED_DIR}/"
        while passing:
            run = run_pytest([suite], cwd=workspace)
            failed = {
                nodeid[len(prefix):] for nodeid, rec in run.outcomes.items()
                if rec["outcome"] != "passed" and nodeid.startswith(prefix)
            }
            others = [
                nodeid for nodeid, rec in run.outcomes.items()
                if rec["outcome"] == "failed" and not nodeid.startswith(prefix)
            ]
            if others:
                raise BaselineSuiteFails(f"original tests fail beside generated ones: {others}")
            failed &= passing
            if not failed:
                break
            for test in sorted(failed):
                demoted.append(test)
                results[test] = TestOutcome(FLAKY, "order-dependent", results[test].runs)
            passing -= failed
            if carved.exists():
                _keep_passing(carved, passing)
        wanted = [r.method for r in baseline.records]
        after = classify_targets(workspace, suite, methods=wanted, timeout=timeout, jobs=jobs)
    finally:
        shutil.rmtree(workspace, ignore_errors=True)

    before = baseline.statuses()
    after_status = after.statuses()
    methods = targets if targets is not None else sorted(set(tests.values()))
    per_method: dict[str, list[TestOutcome]] = {m: [] for m in methods}
    for test, method in tests.items():
        if method in per_method and test in results:
            per_method[method].append(results[test])
    rows = []
    downgrades = []
    for method in sorted(methods):
        outcomes = per_method[method]
        s = stats.get(method, ProfileStats())
        status_before = before.get(method)
        status_after = after_status.get(method, status_before)
        if status_before in _RANK and status_after in _RANK and _RANK[status_after] < _RANK[status_before]:
            downgrades.append(method)
        rows.append(MethodReport(
            method=method,
            invocations=s.invocations,
            collected=s.collected,
            unique=s.unique,
            generated=len(outcomes),
            passing=sum(o.outcome == PASS for o in outcomes),
            failing=sum(o.outcome == FAIL for o in outcomes),
            flaky=sum(o.outcome == FLAKY for o in outcomes),
            status_before=status_before,
            status_after=status_after,
            causes=dict(sorted(Counter(o.cause for o in outcomes if o.cause).items())),
        ))
    return AssessmentReport(rows, downgrades, demoted, sorted(passing))


def write_report(report: AssessmentReport, out_root: Path) -> tuple[Path, Path]:
    out_root = Path(out_root)
    json_path, csv_path = out_root / REPORT_JSON, out_root / REPORT_CSV
    json_path.write_text(report.to_json())
    csv_path.write_text(report.to_csv())
    return json_path, csv_path

