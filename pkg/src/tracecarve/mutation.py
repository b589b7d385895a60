"""Extreme mutation analysis: find covered methods whose body no test pins down.

Each candidate method's body is replaced by a trivial statement drawn from a
catalog keyed by the method's return shape. A variant is *detected* when at
least one test covering the method fails against it. A covered method with
no detected variant is pseudo-tested.
"""
from __future__ import annotations

import ast
import json
import logging
import os
import shutil
import tempfile
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from tracecarve.errors import BaselineSuiteFails, CarveError, UnsupportedShape
from tracecarve.model import MethodDescriptor
from tracecarve.runner import NO_TESTS, OK, TESTS_FAILED, copy_tree, run_pytest
from tracecarve.scan import (
    COLLECTION_EMPTY,
    ITERATOR_TYPES,
    find_method,
    line_offsets,
    parse_source,
    scan_methods,
)

log = logging.getLogger(__name__)

NOT_COVERED, PSEUDO_TESTED, WELL_TESTED = "not-covered", "pseudo-tested", "well-tested"
DETECTED, SURVIVED, COMPILE_FAILED, TIMED_OUT = "detected", "survived", "compile-failed", "timed-out"

DEFAULT_VARIANT_TIMEOUT = 60.0

_CATALOG: dict[str, tuple[str, ...]] = {
    "unit": ("pass",),
    "boolean": ("return True", "return False"),
    "integer-like": ("return -1", "return 0", "return 1"),
    "float-like": ("return -1.0", "return 0.0", "return 1.0"),
    "string": ("return None", 'return "A"', 'return ""'),
    "reference": ("return None",),
}


@dataclass
class ExtremeVariant:
    method: str
    replacement: str
    outcome: str | None = None


@dataclass
class TargetStatusRecord:
    method: str
    covered: bool
    covering_tests: list[str]
    variants: list[ExtremeVariant]
    status: str

    def to_dict(self) -> dict[str, Any]:
        return {
            "method": self.method,
            "covered": self.covered,
            "covering_tests": self.covering_tests,
            "variants": [
                {"replacement": v.replacement, "outcome": v.outcome} for v in self.variants
            ],
            "status": self.status,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> TargetStatusRecord:
        return cls(
            data["method"],
            data["covered"],
            list(data["covering_tests"]),
            [ExtremeVariant(data["method"], v["replacement"], v["outcome"]) for v in data["variants"]],
            data["status"],
        )


@dataclass
class Classification:
    records: list[TargetStatusRecord]
    excluded: dict[str, str] = field(default_factory=dict)

    def status_of(self, method_id: str) -> str | None:
        for record in self.records:
            if record.method == method_id:
                return record.status
        return None

    def statuses(self) -> dict[str, str]:
        return {r.method: r.status for r in self.records}

    def with_status(self, status: str) -> list[str]:
        return [r.method for r in self.records if r.status == status]

    def to_json(self) -> str:
        payload = {
            "records": [r.to_dict() for r in sorted(self.records, key=lambda r: r.method)],
            "excluded": dict(sorted(self.excluded.items())),
        }
        return json.dumps(payload, indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text: str) -> Classification:
        data = json.loads(text)
        return cls([TargetStatusRecord.from_dict(r) for r in data["records"]], data["excluded"])


def enumerate_candidates(subject_root: Path, exclude: tuple[str, ...] = ("tests",)) -> list[MethodDescriptor]:
    """Public instance methods of the subject, test code excluded."""
    return [f.descriptor for f in scan_methods(Path(subject_root), exclude) if f.descriptor.eligible]


def _empty_collection(annotation: str) -> str | None:
    if not annotation:
        return None
    try:
        node = ast.parse(annotation, mode="eval").body
    except SyntaxError:
        return None
    while True:
        if isinstance(node, ast.BinOp) and isinstance(node.op, ast.BitOr):
            members = [n for n in (node.left, node.right) if not (isinstance(n, ast.Constant) and n.value is None)]
            if len(members) != 1:
                return None
            node = members[0]
        elif isinstance(node, ast.Subscript) and getattr(node.value, "id", None) == "Optional":
            node = node.slice
        else:
            break
    base = node.value if isinstance(node, ast.Subscript) else node
    name = base.id if isinstance(base, ast.Name) else getattr(base, "attr", "")
    if name in ITERATOR_TYPES:
        return None
    return COLLECTION_EMPTY.get(name)


def generate_variants(method: MethodDescriptor) -> list[ExtremeVariant]:
    """Extreme variants for *method*'s return shape."""
    if method.return_annotation.startswith("~"):
        raise UnsupportedShape(f"{method.id}: generic return {method.return_annotation[1:]}")
    if method.return_shape == "collection":
        empty = _empty_collection(method.return_annotation)
        if empty is None:
            raise UnsupportedShape(
                f"{method.id}: cannot build an empty {method.return_annotation or 'generator'}"
            )
        replacements: tuple[str, ...] = (f"return {empty}",)
    else:
        try:
            replacements = _CATALOG[method.return_shape]
        except KeyError:
            raise UnsupportedShape(f"{method.id}: unknown shape {method.return_shape}") from None
    return [ExtremeVariant(method.id, r) for r in replacements]


def apply_variant(source: bytes, method: MethodDescriptor, replacement: str) -> bytes:
    """Replace *method*'s body in *source* with the *replacement* statement."""
    tree = parse_source(Path(method.path), source)
    ref = method.ref
    node = find_method(tree, ref.owner, ref.name)
    if node is None:
        raise CarveError(f"{method.id} not found in {method.path}")
    offsets = line_offsets(source)
    first, last = node.body[0], node.body[-1]
    start = offsets[first.lineno - 1] + first.col_offset
    end = offsets[last.end_lineno - 1] + last.end_col_offset
    return source[:start] + replacement.encode("utf-8") + source[end:]


def _run_variant(
    subject_root: Path,
    method: MethodDescriptor,
    variant: ExtremeVariant,
    tests: list[str],
    timeout: float,
) -> str:
    original = (subject_root / method.path).read_bytes()
    mutated = apply_variant(original, method, variant.replacement)
    try:
        compile(mutated, method.path, "exec")
    except SyntaxError:
        return COMPILE_FAILED
    workspace = Path(tempfile.mkdtemp(prefix="tracecarve-variant-"))
    try:
        copy_tree(subject_root, workspace)
        (workspace / method.path).write_bytes(mutated)
        run = run_pytest(tests, cwd=workspace, timeout=timeout, fail_fast=True)
    finally:
        shutil.rmtree(workspace, ignore_errors=True)
    if run.timed_out:
        return TIMED_OUT
    if run.returncode == OK:
        return SURVIVED
    if run.returncode in (TESTS_FAILED, 2):
        return DETECTED
    raise CarveError(
        f"pytest exited {run.returncode} for {method.id} [{variant.replacement}]:\n{run.output[-2000:]}"
    )


def derive_status(covered: bool, variants: list[ExtremeVariant]) -> str:
    if not covered:
        return NOT_COVERED
    if any(v.outcome == DETECTED for v in variants):
        return WELL_TESTED
    return PSEUDO_TESTED


def classify_targets(
    subject_root: Path,
    suite: str = "tests",
    *,
    methods: list[str] | None = None,
    timeout: float = DEFAULT_VARIANT_TIMEOUT,
    jobs: int | None = None,
) -> Classification:
    """Classify candidate methods as pseudo-tested, well-tested or not covered.

    The subject tree itself is never modified; every variant runs in its own
    temporary copy. *methods* restricts the analysis to the given ids.
    """
    subject_root = Path(subject_root).resolve()
    candidates = enumerate_candidates(subject_root, (suite,))
    if methods is not None:
        wanted = set(methods)
        candidates = [c for c in candidates if c.id in wanted]

    baseline = run_pytest([suite], cwd=subject_root, coverage_root=subject_root)
    if baseline.returncode not in (OK, NO_TESTS):
        raise BaselineSuiteFails(
            f"suite fails on the unmodified subject (exit {baseline.returncode}):\n"
            + baseline.output[-2000:]
        )

    excluded: dict[str, str] = {}
    plans: list[tuple[MethodDescriptor, list[str], list[ExtremeVariant]]] = []
    for method in candidates:
        try:
            variants = generate_variants(method)
        except UnsupportedShape as exc:
            log.warning("excluding %s", exc)
            excluded[method.id] = str(exc)
            continue
        tests = sorted(baseline.coverage.get((method.path, method.first_lineno), []))
        if not tests:
            for variant in variants:
                variant.outcome = NOT_COVERED
        plans.append((method, tests, variants))

    jobs = jobs or os.cpu_count() or 1
    work = [(m, t, v) for m, t, vs in plans if t for v in vs]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        outcomes = list(
            pool.map(lambda item: _run_variant(subject_root, item[0], item[2], item[1], timeout), work)
        )
    for (method, _, variant), outcome in zip(work, outcomes):
        variant.outcome = outcome

    records = [
        TargetStatusRecord(m.id, bool(t), t, vs, derive_status(bool(t), vs))
        for m, t, vs in plans
    ]
    records.sort(key=lambda r: r.method)
    return Classification(records, excluded)
