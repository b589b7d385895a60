"""Phases of the pipeline and the file layout that connects them.

Every phase reads its inputs from, and writes its outputs to, the output
root. Nothing else is shared between phases::

    out/
      classification.json  targets.list                 select-targets
      instrumented/  instrumentation-manifest.json      instrument
      store/                                            workload
      unique-profiles/  profile-stats.json              generate
      generated/  synthesis-report.json                 generate
      execution.json  assessment-report.{json,csv}      assess
"""
from __future__ import annotations

import dataclasses
import json
import logging
import os
import shlex
import shutil
import subprocess
import sys
from dataclasses import dataclass
from pathlib import Path

from tracecarve import assess, store, synth
from tracecarve.collector import DEFAULT_THRESHOLD_BYTES
from tracecarve.errors import CarveError, ConfigInvalid, MissingPrerequisite
from tracecarve.instrument import MANIFEST_NAME, InstrumentationPlan, apply_probes, write_manifest
from tracecarve.model import read_target_list, write_target_list
from tracecarve.mutation import DEFAULT_VARIANT_TIMEOUT, PSEUDO_TESTED, Classification, classify_targets
from tracecarve.runner import subject_env

log = logging.getLogger(__name__)

ENV_PREFIX = "TRACECARVE_"
CLASSIFICATION_FILE = "classification.json"
TARGETS_FILE = "targets.list"
INSTRUMENTED_DIR = "instrumented"
STORE_DIR = "store"
GENERATED_DIR = "generated"


@dataclass
class PipelineConfig:
    subject: Path
    out: Path
    targets: Path | None = None
    suite: str = "tests"
    threshold_bytes: int = DEFAULT_THRESHOLD_BYTES
    inline_threshold_bytes: int = synth.INLINE_THRESHOLD
    assert_mode: str = synth.DEEP_SERIAL
    flaky_runs: int = assess.DEFAULT_RUNS
    variant_timeout: float = DEFAULT_VARIANT_TIMEOUT
    store: Path | None = None
    workload: str | None = None
    seed: int = 0
    jobs: int | None = None

    # fields that TRACECARVE_<NAME> may set; command-line flags still win
    ENV_FIELDS = (
        "subject", "out", "targets", "suite", "threshold_bytes", "inline_threshold_bytes",
        "assert_mode", "flaky_runs", "variant_timeout", "workload", "seed", "jobs",
    )

    @property
    def store_root(self) -> Path:
        return self.store if self.store is not None else self.out / STORE_DIR

    def validate(self) -> PipelineConfig:
        for name in ("threshold_bytes", "inline_threshold_bytes", "flaky_runs", "variant_timeout"):
            if getattr(self, name) <= 0:
                raise ConfigInvalid(f"{name} must be positive")
        if self.jobs is not None and self.jobs <= 0:
            raise ConfigInvalid("jobs must be positive")
        if self.assert_mode not in synth.ASSERT_MODES:
            raise ConfigInvalid(f"assert mode must be one of {', '.join(synth.ASSERT_MODES)}")
        if not Path(self.subject).is_dir():
            raise ConfigInvalid(f"subject {self.subject} is not a directory")
        if self.targets is not None and not Path(self.targets).is_file():
            raise ConfigInvalid(f"target list {self.targets} does not exist")
        return self


def config_from(values: dict[str, object], environ: dict[str, str] | None = None) -> PipelineConfig:
    """Build a config from explicit *values* (None meaning unset) over environment overrides."""
    environ = os.environ if environ is None else environ
    types = {f.name: f.type for f in dataclasses.fields(PipelineConfig)}
    merged: dict[str, object] = {}
    for name in PipelineConfig.ENV_FIELDS:
        raw = environ.get(ENV_PREFIX + name.upper())
        if raw is None:
            continue
        kind = types[name]
        try:
            if "int" in kind:
                merged[name] = int(raw)
            elif "float" in kind:
                merged[name] = float(raw)
            elif "Path" in kind:
                merged[name] = Path(raw)
            else:
                merged[name] = raw
        except ValueError:
            raise ConfigInvalid(f"{ENV_PREFIX}{name.upper()}={raw!r} is not a valid value") from None
    merged.update({k: v for k, v in values.items() if v is not None})
    for name in ("subject", "out"):
        if name not in merged:
            raise ConfigInvalid(f"--{name} is required")
    for name in ("subject", "out", "targets", "store"):
        if merged.get(name) is not None:
            merged[name] = Path(merged[name])  # type: ignore[arg-type]
    return PipelineConfig(**merged).validate()  # type: ignore[arg-type]


def _require(path: Path, phase: str) -> Path:
    if not path.exists():
        raise MissingPrerequisite(f"{path} is missing; run `{phase}` first")
    return path


def select_targets(cfg: PipelineConfig) -> list[str]:
    cfg.out.mkdir(parents=True, exist_ok=True)
    classification = classify_targets(
        cfg.subject, cfg.suite, timeout=cfg.variant_timeout, jobs=cfg.jobs
    )
    (cfg.out / CLASSIFICATION_FILE).write_text(classification.to_json())
    if cfg.targets is not None:
        targets = read_target_list(cfg.targets.read_text())
    else:
        targets = classification.with_status(PSEUDO_TESTED)
    (cfg.out / TARGETS_FILE).write_text(write_target_list(targets))
    return targets


def load_targets(cfg: PipelineConfig) -> list[str]:
    if cfg.targets is not None:
        return read_target_list(cfg.targets.read_text())
    return read_target_list(_require(cfg.out / TARGETS_FILE, "select-targets").read_text())


def instrument(cfg: PipelineConfig) -> Path:
    targets = load_targets(cfg)
    output = cfg.out / INSTRUMENTED_DIR
    if output.exists():
        shutil.rmtree(output)
    plan = InstrumentationPlan(
        targets, cfg.subject, output, cfg.suite, {"threshold_bytes": cfg.threshold_bytes}
    )
    result = apply_probes(plan)
    write_manifest(result, cfg.out / MANIFEST_NAME)
    return output


def workload_command(cfg: PipelineConfig, root: Path) -> list[str]:
    if cfg.workload:
        return [part.format(seed=cfg.seed) for part in shlex.split(cfg.workload)]
    if (root / "workload.py").exists():
        return [sys.executable, "workload.py", "--seed", str(cfg.seed)]
    # with no driver the existing tests are the workload
    return [sys.executable, "-m", "pytest", "-q", "-p", "no:cacheprovider", cfg.suite]


def run_workload(cfg: PipelineConfig) -> subprocess.CompletedProcess:
    """Run the workload against the instrumented tree, recording into a fresh store."""
    root = _require(cfg.out / INSTRUMENTED_DIR, "instrument")
    store_root = cfg.store_root
    if store_root.exists():
        shutil.rmtree(store_root)
    store_root.mkdir(parents=True)
    env = subject_env([root])
    env["TRACECARVE_STORE"] = str(store_root.resolve())
    env["TRACECARVE_THRESHOLD_BYTES"] = str(cfg.threshold_bytes)
    proc = subprocess.run(
        workload_command(cfg, root), cwd=root, env=env, capture_output=True, text=True
    )
    if proc.returncode != 0:
        log.warning("workload exited %s: %s", proc.returncode, proc.stderr[-2000:])
    return proc


def generate(cfg: PipelineConfig) -> synth.SynthesisResult:
    contents = store.load_and_stats(cfg.store_root)
    targets = set(load_targets(cfg))
    contents = store.StoreContents(
        {m: p for m, p in contents.profiles.items() if m in targets},
        {m: s for m, s in contents.stats.items() if m in targets},
    )
    unique_dir = cfg.out / store.UNIQUE_DIR
    if unique_dir.exists():
        shutil.rmtree(unique_dir)
    unique = store.write_unique(contents, cfg.out)
    generated = cfg.out / GENERATED_DIR
    if generated.exists():
        shutil.rmtree(generated)
    result = synth.emit_suite(
        unique,
        generated,
        mode=cfg.assert_mode,
        inline_threshold=cfg.inline_threshold_bytes,
        subject_root=cfg.subject,
    )
    synth.write_report(
        result, {m: len(p) for m, p in unique.items()}, cfg.out / synth.SYNTHESIS_REPORT
    )
    return result


def assess_phase(cfg: PipelineConfig) -> assess.AssessmentReport:
    classification_path = _require(cfg.out / CLASSIFICATION_FILE, "select-targets")
    report_path = _require(cfg.out / synth.SYNTHESIS_REPORT, "generate")
    stats = store.load_profile_stats(cfg.out)
    tests = json.loads(report_path.read_text())["tests"]
    generated = cfg.out / GENERATED_DIR
    if tests:
        _require(generated, "generate")
    else:
        generated.mkdir(parents=True, exist_ok=True)
    results = assess.execute_suite(
        generated, cfg.subject, sorted(tests), runs=cfg.flaky_runs, suite=cfg.suite
    )
    assess.write_execution(results, cfg.out / assess.EXECUTION_FILE)
    report = assess.assess_improvement(
        cfg.subject,
        generated,
        results,
        tests,
        Classification.from_json(classification_path.read_text()),
        stats,
        suite=cfg.suite,
        targets=load_targets(cfg),
        timeout=cfg.variant_timeout,
        jobs=cfg.jobs,
    )
    assess.write_report(report, cfg.out)
    return report


def load_report(cfg: PipelineConfig) -> assess.AssessmentReport:
    path = _require(cfg.out / assess.REPORT_JSON, "assess")
    return assess.AssessmentReport.from_json(path.read_text())


def run_pipeline(cfg: PipelineConfig) -> assess.AssessmentReport:
    select_targets(cfg)
    instrument(cfg)
    proc = run_workload(cfg)
    if proc.returncode != 0:
        raise CarveError(f"workload failed with exit code {proc.returncode}")
    generate(cfg)
    return assess_phase(cfg)
