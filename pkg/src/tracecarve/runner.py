"""Run pytest in a child process against a subject workspace."""
from __future__ import annotations

import json
import os
import shutil
import subprocess
import sys
import tempfile
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from pathlib import Path

import tracecarve

# pytest exit codes
OK, TESTS_FAILED, INTERRUPTED, INTERNAL_ERROR, USAGE_ERROR, NO_TESTS = range(6)

_PACKAGE_PARENT = str(Path(tracecarve.__file__).resolve().parent.parent)
_COPY_IGNORE = shutil.ignore_patterns("__pycache__", "*.pyc", ".pytest_cache", ".hypothesis")


@dataclass
class PytestRun:
    returncode: int | None
    timed_out: bool = False
    outcomes: dict[str, dict[str, str]] = field(default_factory=dict)
    coverage: dict[tuple[str, int], list[str]] = field(default_factory=dict)
    output: str = ""

    @property
    def passed(self) -> bool:
        return self.returncode == OK


def subject_env(pythonpath: Iterable[str | os.PathLike] = ()) -> dict[str, str]:
    """Environment for a child process that imports the subject and tracecarve."""
    env = dict(os.environ)
    for name in ("TRACECARVE_STORE", "TRACECARVE_COVERAGE_OUT", "TRACECARVE_OUTCOMES_OUT"):
        env.pop(name, None)
    paths = [str(p) for p in pythonpath] + [_PACKAGE_PARENT]
    if env.get("PYTHONPATH"):
        paths.append(env["PYTHONPATH"])
    env["PYTHONPATH"] = os.pathsep.join(paths)
    env["PYTHONDONTWRITEBYTECODE"] = "1"
    return env


def copy_tree(src: Path, dest: Path) -> Path:
    shutil.copytree(src, dest, ignore=_COPY_IGNORE, dirs_exist_ok=True)
    return dest


def run_pytest(
    args: Sequence[str],
    *,
    cwd: Path,
    pythonpath: Iterable[str | os.PathLike] = (),
    timeout: float | None = None,
    coverage_root: Path | None = None,
    fail_fast: bool = False,
) -> PytestRun:
    """Run ``pytest args`` with *cwd* as rootdir and an empty configuration.

    The subject's own conftest files still apply; ini files above *cwd* do
    not leak in.
    """
    with tempfile.TemporaryDirectory(prefix="tracecarve-run-") as tmp:
        tmp_path = Path(tmp)
        ini = tmp_path / "pytest.ini"
        ini.write_text("[pytest]\n")
        outcomes_path = tmp_path / "outcomes.json"
        env = subject_env([cwd, *pythonpath])
        env["TRACECARVE_OUTCOMES_OUT"] = str(outcomes_path)
        coverage_path = tmp_path / "coverage.json"
        if coverage_root is not None:
            env["TRACECARVE_COVERAGE_OUT"] = str(coverage_path)
            env["TRACECARVE_COVERAGE_ROOT"] = str(coverage_root)
        cmd = [
            sys.executable, "-m", "pytest", "-q",
            "-p", "no:cacheprovider",
            "-p", "no:hypothesispytest",
            "-p", "tracecarve.pytest_plugin",
            "-c", str(ini),
            "--rootdir", str(cwd),
        ]
        if fail_fast:
            cmd.append("-x")
        cmd.extend(args)
        try:
            proc = subprocess.run(
                cmd,
                cwd=cwd,
                env=env,
                capture_output=True,
                text=True,
                timeout=timeout,
            )
        except subprocess.TimeoutExpired as exc:
            output = exc.stdout or ""
            if isinstance(output, bytes):
                output = output.decode("utf-8", "replace")
            return PytestRun(None, timed_out=True, output=output)
        run = PytestRun(proc.returncode, output=proc.stdout + proc.stderr)
        if outcomes_path.exists():
            run.outcomes = json.loads(outcomes_path.read_text())
        if coverage_path.exists():
            for row in json.loads(coverage_path.read_text()):
                run.coverage[(row["path"], row["line"])] = row["tests"]
        return run
