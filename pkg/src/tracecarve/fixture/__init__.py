"""A small subject project with a planted, deliberately weak test suite.

``subject/`` holds a font-table library analog (``fontlib``), a cart and
pricing analog (``shop``), the weak suite under ``tests/``, a deterministic
``workload.py`` driver and ``fixture-manifest.json`` describing what was
planted in each method.
"""
from __future__ import annotations

import json
import os
import subprocess
import sys
from dataclasses import dataclass
from pathlib import Path

from tracecarve.runner import copy_tree, subject_env

SUBJECT_ROOT = Path(__file__).resolve().parent / "subject"
MANIFEST_NAME = "fixture-manifest.json"


@dataclass(frozen=True)
class FixtureMethod:
    method: str
    planted_status: str
    determinism: str
    return_shape: str
    traits: tuple[str, ...] = ()


@dataclass(frozen=True)
class FixtureManifest:
    workload: str
    suite: str
    methods: tuple[FixtureMethod, ...]

    def with_status(self, status: str) -> list[FixtureMethod]:
        return [m for m in self.methods if m.planted_status == status]

    def with_trait(self, trait: str) -> list[FixtureMethod]:
        return [m for m in self.methods if trait in m.traits]

    def get(self, method_id: str) -> FixtureMethod:
        for m in self.methods:
            if m.method == method_id:
                return m
        raise KeyError(method_id)


def load_manifest(root: Path = SUBJECT_ROOT) -> FixtureManifest:
    data = json.loads((Path(root) / MANIFEST_NAME).read_text())
    return FixtureManifest(
        data["workload"],
        data["suite"],
        tuple(FixtureMethod(**{**m, "traits": tuple(m["traits"])}) for m in data["methods"]),
    )


def copy_subject(dest: Path) -> Path:
    """Copy the pristine fixture into *dest* (created if needed)."""
    return copy_tree(SUBJECT_ROOT, Path(dest))


@dataclass
class WorkloadRun:
    returncode: int
    stdout: str
    stderr: str


def run_workload(
    subject_root: Path,
    store: Path | None = None,
    *,
    seed: int = 0,
    threads: int = 0,
    threshold_bytes: int | None = None,
    timeout: float = 300,
) -> WorkloadRun:
    """Run the fixture workload driver against *subject_root* (pristine or instrumented).

    With *store* set, an instrumented subject records profiles there.
    """
    subject_root = Path(subject_root)
    env = subject_env([subject_root])
    if store is not None:
        env["TRACECARVE_STORE"] = os.fspath(store)
        if threshold_bytes is not None:
            env["TRACECARVE_THRESHOLD_BYTES"] = str(threshold_bytes)
    proc = subprocess.run(
        [sys.executable, "workload.py", "--seed", str(seed), "--threads", str(threads)],
        cwd=subject_root,
        env=env,
        capture_output=True,
        text=True,
        timeout=timeout,
    )
    return WorkloadRun(proc.returncode, proc.stdout, proc.stderr)
