"""Source-to-source probe injection.

Each target method gets one extra line, a decorator placed directly above
its ``def``::

    @__import__("tracecarve.collector", fromlist=["probe"]).probe('shop.cart:Cart.subtotal/0')  # tracecarve:probe

The decorator snapshots the receiver and parameters on entry and hands the
result to the collector on normal return. No other byte of the subject
changes, so :func:`strip_probes` can restore the original exactly.
"""
from __future__ import annotations

import json
import logging
import re
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from tracecarve.errors import NotInstrumented, RewriteConflict, UnresolvedTarget
from tracecarve.model import MethodDescriptor
from tracecarve.runner import copy_tree
from tracecarve.scan import scan_methods

log = logging.getLogger(__name__)

MARKER = "# tracecarve:probe"
MANIFEST_NAME = "instrumentation-manifest.json"
_PROBE_LINE = re.compile(
    rb'^[ \t]*@__import__\("tracecarve\.collector", fromlist=\["probe"\]\)\.probe\(.*\)  '
    + re.escape(MARKER.encode())
    + rb"(\r\n|\n|\r)?$"
)


@dataclass
class InstrumentationPlan:
    targets: list[str]
    subject_root: Path
    output_root: Path
    suite: str = "tests"
    collector_config: dict[str, Any] = field(default_factory=dict)


@dataclass
class InstrumentationResult:
    output_root: Path
    probes: dict[str, dict[str, Any]]
    skipped: dict[str, str]
    collector_config: dict[str, Any] = field(default_factory=dict)

    def manifest(self) -> dict[str, Any]:
        return {
            "collector": self.collector_config,
            "probes": dict(sorted(self.probes.items())),
            "skipped": dict(sorted(self.skipped.items())),
        }


def probe_line(method_id: str, indent: bytes, newline: bytes) -> bytes:
    call = f'@__import__("tracecarve.collector", fromlist=["probe"]).probe({method_id!r})'
    return indent + f"{call}  {MARKER}".encode() + newline


def _check_rewritable(method: MethodDescriptor) -> None:
    if not method.eligible:
        raise RewriteConflict(f"{method.id} is not a public instance method")
    if method.decorated:
        raise RewriteConflict(f"{method.id} already has decorators")
    if not method.plain_params:
        raise RewriteConflict(f"{method.id} takes *args, **kwargs or keyword-only parameters")


def apply_probes(plan: InstrumentationPlan) -> InstrumentationResult:
    """Write an instrumented copy of the subject to ``plan.output_root``.

    Targets that cannot be wrapped are skipped and logged; a target id that
    does not name any method raises :class:`UnresolvedTarget`.
    """
    subject_root = Path(plan.subject_root)
    output_root = Path(plan.output_root)
    methods = {f.descriptor.id: f.descriptor for f in scan_methods(subject_root, (plan.suite,))}
    if output_root.resolve().is_relative_to(subject_root.resolve()):
        raise ValueError("output_root must be outside the subject tree")
    unresolved = [t for t in plan.targets if t not in methods]
    if unresolved:
        raise UnresolvedTarget(f"no such method: {', '.join(unresolved)}")

    copy_tree(subject_root, output_root)
    by_file: dict[str, list[MethodDescriptor]] = defaultdict(list)
    skipped: dict[str, str] = {}
    for target in dict.fromkeys(plan.targets):
        method = methods[target]
        try:
            _check_rewritable(method)
        except RewriteConflict as exc:
            log.warning("skipping target: %s", exc)
            skipped[target] = str(exc)
            continue
        by_file[method.path].append(method)

    probes: dict[str, dict[str, Any]] = {}
    for rel_path, targets in sorted(by_file.items()):
        source = (subject_root / rel_path).read_bytes()
        lines = source.splitlines(keepends=True)
        inserts: dict[int, bytes] = {}
        for method in targets:
            def_line = lines[method.lineno - 1]
            indent = def_line[: len(def_line) - len(def_line.lstrip(b" \t"))]
            newline = def_line[len(def_line.rstrip(b"\r\n")) :] or b"\n"
            inserts[method.lineno - 1] = probe_line(method.id, indent, newline)
        out: list[bytes] = []
        for index, line in enumerate(lines):
            if index in inserts:
                out.append(inserts[index])
            out.append(line)
        transformed = b"".join(out)
        compile(transformed, rel_path, "exec")
        (output_root / rel_path).write_bytes(transformed)
        for method in targets:
            inserted_before = sum(1 for i in inserts if i < method.lineno - 1)
            probes[method.id] = {
                "path": rel_path,
                "probe_line": method.lineno + inserted_before,
                "def_line": method.lineno + inserted_before + 1,
            }
    return InstrumentationResult(output_root, probes, skipped, dict(plan.collector_config))


def write_manifest(result: InstrumentationResult, path: Path) -> Path:
    path.write_text(json.dumps(result.manifest(), indent=2, sort_keys=True) + "\n")
    return path


def strip_probes(root: Path, output_root: Path | None = None) -> Path:
    """Remove injected probe lines, in place or into a copy at *output_root*."""
    root = Path(root)
    if output_root is not None:
        copy_tree(root, Path(output_root))
        root = Path(output_root)
    stripped = 0
    for path in sorted(root.rglob("*.py")):
        data = path.read_bytes()
        if MARKER.encode() not in data:
            continue
        kept = [line for line in data.splitlines(keepends=True) if not _PROBE_LINE.match(line)]
        removed = len(data.splitlines()) - len(kept)
        if removed:
            path.write_bytes(b"".join(kept))
            stripped += removed
    if not stripped:
        raise NotInstrumented(f"{root} contains no probes")
    return root

