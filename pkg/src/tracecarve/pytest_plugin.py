"""pytest plugin loaded into tracecarve's subprocess test runs.

Inert unless one of these environment variables is set:

``TRACECARVE_COVERAGE_OUT`` / ``TRACECARVE_COVERAGE_ROOT``
    record which tests call which functions defined under the root
``TRACECARVE_OUTCOMES_OUT``
    record the outcome of every test, with a cause tag for failures
"""
from __future__ import annotations

import json
import os
import sys
import threading
from typing import Any

import pytest

_UNSET = object()


class _CallTracer:
    def __init__(self, root: str) -> None:
        self.root = os.path.realpath(root) + os.sep
        self.current: str | None = None
        self.hits: dict[tuple[str, int], set[str]] = {}
        self._keys: dict[Any, Any] = {}

    def _key(self, code: Any) -> tuple[str, int] | None:
        key = self._keys.get(code, _UNSET)
        if key is _UNSET:
            filename = os.path.realpath(code.co_filename)
            if filename.startswith(self.root):
                rel = os.path.relpath(filename, self.root).replace(os.sep, "/")
                key = (rel, code.co_firstlineno)
            else:
                key = None
            self._keys[code] = key
        return key

    def profile(self, frame: Any, event: str, arg: Any) -> None:
        if event != "call" or self.current is None:
            return
        key = self._key(frame.f_code)
        if key is not None:
            self.hits.setdefault(key, set()).add(self.current)

    def dump(self, path: str) -> None:
        rows = [
            {"path": p, "line": line, "tests": sorted(tests)}
            for (p, line), tests in sorted(self.hits.items())
        ]
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(rows, fh)


_tracer: _CallTracer | None = None
_outcomes: dict[str, dict[str, str]] = {}


def pytest_configure(config: pytest.Config) -> None:
    global _tracer
    root = os.environ.get("TRACECARVE_COVERAGE_ROOT")
    if os.environ.get("TRACECARVE_COVERAGE_OUT") and root:
        _tracer = _CallTracer(root)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_protocol(item: pytest.Item, nextitem: Any):
    if _tracer is None:
        yield
        return
    _tracer.current = item.nodeid
    sys.setprofile(_tracer.profile)
    threading.setprofile(_tracer.profile)
    try:
        yield
    finally:
        sys.setprofile(None)
        threading.setprofile(None)  # type: ignore[arg-type]
        _tracer.current = None


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item: pytest.Item, call: pytest.CallInfo):
    outcome = yield
    report = outcome.get_result()
    previous = _outcomes.get(item.nodeid)
    if report.failed:
        if previous is None or previous["outcome"] != "failed":
            excinfo = call.excinfo
            if excinfo is not None and excinfo.errisinstance(AssertionError):
                cause = "assertion"
            else:
                cause = f"error:{excinfo.typename if excinfo else 'unknown'}"
            if report.when != "call":
                cause = f"{report.when}-{cause}"
            _outcomes[item.nodeid] = {"outcome": "failed", "cause": cause}
    elif report.when == "call" and previous is None:
        _outcomes[item.nodeid] = {"outcome": report.outcome, "cause": ""}
    elif report.when == "setup" and report.skipped and previous is None:
        _outcomes[item.nodeid] = {"outcome": "skipped", "cause": ""}


def pytest_collectreport(report: pytest.CollectReport) -> None:
    if report.failed:
        _outcomes[f"<collect>::{report.nodeid}"] = {
            "outcome": "failed",
            "cause": "collection-error",
        }


def pytest_sessionfinish(session: pytest.Session, exitstatus: int) -> None:
    coverage_out = os.environ.get("TRACECARVE_COVERAGE_OUT")
    if _tracer is not None and coverage_out:
        _tracer.dump(coverage_out)
    outcomes_out = os.environ.get("TRACECARVE_OUTCOMES_OUT")
    if outcomes_out:
        with open(outcomes_out, "w", encoding="utf-8") as fh:
            json.dump(_outcomes, fh, sort_keys=True)
