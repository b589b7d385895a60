"""Turn unique object profiles into differential pytest tests.

Every test follows the same template: rebuild the receiver and the
arguments from their recorded canonical text, call the method, and compare
the result with the recorded one. Small constituents are embedded in the test
source; large ones are written to resource files beside it.
"""
from __future__ import annotations

import ast
import contextlib
import json
import math
import shutil
import sys
from collections.abc import Iterator
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from tracecarve import codec
from tracecarve.codec import CodecError, SerializedValue
from tracecarve.errors import UnreconstructibleProfile
from tracecarve.model import ObjectProfile, method_file_name, parse_method_id

DEEP_SERIAL, NATIVE_EQ = "deep-serial", "native-eq"
ASSERT_MODES = (DEEP_SERIAL, NATIVE_EQ)
INLINE_THRESHOLD = codec.INLINE_THRESHOLD
CODEC_MODULE = "_carved_codec"
RESOURCES_DIR = "resources"
SYNTHESIS_REPORT = "synthesis-report.json"

_HEADER = f'''"""Differential tests generated from recorded executions."""
from pathlib import Path

from {CODEC_MODULE} import dumps, loads

_RESOURCES = Path(__file__).resolve().parent / "{RESOURCES_DIR}"


def _resource(name):
    return (_RESOURCES / name).read_text(encoding="utf-8")
'''


@dataclass
class TestCaseArtifact:
    method: str
    name: str
    source: str
    resources: list[tuple[str, bytes]]
    assert_mode: str
    key_prefix: str
    profile: ObjectProfile = field(repr=False)

    __test__ = False  # not a pytest class


@contextlib.contextmanager
def subject_imports(subject_root: Path | None) -> Iterator[None]:
    """Make the subject importable, and forget its modules afterwards."""
    if subject_root is None:
        yield
        return
    root = str(Path(subject_root).resolve())
    before = set(sys.modules)
    sys.path.insert(0, root)
    try:
        yield
    finally:
        with contextlib.suppress(ValueError):
            sys.path.remove(root)
        for name in set(sys.modules) - before:
            module_file = getattr(sys.modules[name], "__file__", None) or ""
            if module_file.startswith(root):
                del sys.modules[name]


def _is_literal(value: Any) -> bool:
    if value is None or type(value) in (bool, int, str):
        return True
    return type(value) is float and math.isfinite(value)


def container_name(method_id: str) -> str:
    ref = parse_method_id(method_id)
    return f"test_carved_{ref.module.replace('.', '_')}_{ref.owner.replace('.', '_')}.py"


def synthesize_test(
    profile: ObjectProfile,
    mode: str = DEEP_SERIAL,
    inline_threshold: int = INLINE_THRESHOLD,
    *,
    suffix: str = "",
) -> TestCaseArtifact:
    """Build the test for one profile.

    Decoding happens here as a check, so the subject must be importable
    (see :func:`subject_imports`). Raises :class:`UnreconstructibleProfile`
    when a constituent cannot be rebuilt.
    """
    if mode not in ASSERT_MODES:
        raise ValueError(f"unknown assert mode {mode!r}")
    ref = parse_method_id(profile.method)
    prefix = profile.key().prefix
    name = f"test_{ref.name}_{prefix}{suffix}"
    resource_dir = f"{method_file_name(profile.method)}/{prefix}{suffix}"
    resources: list[tuple[str, bytes]] = []

    def decoded(label: str, value: SerializedValue) -> Any:
        try:
            return codec.deserialize_value(value)
        except (CodecError, ImportError, AttributeError, TypeError) as exc:
            raise UnreconstructibleProfile(f"{profile.method} {prefix} {label}: {exc}") from exc

    def text_expr(label: str, value: SerializedValue) -> str:
        if value.kind(inline_threshold) == codec.INLINE_CAPABLE:
            return repr(value.text)
        filename = f"{resource_dir}/{label}.ctxt"
        resources.append((filename, value.data))
        return f"_resource({filename!r})"

    decoded("receiving", profile.receiving)
    lines = [f"    receiving = loads({text_expr('receiving', profile.receiving)})"]
    args = []
    for i, param in enumerate(profile.parameters):
        value = decoded(f"param-{i}", param)
        if _is_literal(value) and param.kind(inline_threshold) == codec.INLINE_CAPABLE:
            args.append(repr(value))
        else:
            lines.append(f"    param_{i} = loads({text_expr(f'param-{i}', param)})")
            args.append(f"param_{i}")
    decoded("returned", profile.result)
    lines.append(f"    expected = {text_expr('returned', profile.result)}")
    lines.append(f"    actual = receiving.{ref.name}({', '.join(args)})")
    if mode == DEEP_SERIAL:
        lines.append("    assert dumps(actual) == expected")
    else:
        lines.append("    assert actual == loads(expected)")
    source = f"def {name}():\n" + "\n".join(lines) + "\n"
    return TestCaseArtifact(profile.method, name, source, resources, mode, prefix, profile)


@dataclass
class SynthesisResult:
    # test id ("<container>::<name>") -> method id
    tests: dict[str, str]
    generated: dict[str, int]
    unreconstructible: dict[str, list[str]]

    def report(self, unique: dict[str, int]) -> dict[str, Any]:
        methods = sorted(set(unique) | set(self.generated))
        return {
            "methods": {
                m: {
                    "unique": unique.get(m, 0),
                    "generated": self.generated.get(m, 0),
                    "unreconstructible": len(self.unreconstructible.get(m, [])),
                }
                for m in methods
            },
            "tests": dict(sorted(self.tests.items())),
        }


def emit_suite(
    profiles_by_method: dict[str, list[ObjectProfile]],
    out_root: Path,
    *,
    mode: str = DEEP_SERIAL,
    inline_threshold: int = INLINE_THRESHOLD,
    subject_root: Path | None = None,
) -> SynthesisResult:
    """Write one test container per owner class into *out_root*.

    Name collisions get ``_2``, ``_3``... suffixes, assigned in seq order.
    """
    out_root = Path(out_root)
    out_root.mkdir(parents=True, exist_ok=True)
    containers: dict[str, list[TestCaseArtifact]] = {}
    generated: dict[str, int] = {}
    unreconstructible: dict[str, list[str]] = {}
    with subject_imports(subject_root):
        for method in sorted(profiles_by_method):
            taken = {a.name for a in containers.get(container_name(method), [])}
            for profile in sorted(profiles_by_method[method], key=lambda p: p.seq):
                try:
                    artifact = synthesize_test(profile, mode, inline_threshold)
                    n = 1
                    while artifact.name in taken:
                        n += 1
                        artifact = synthesize_test(profile, mode, inline_threshold, suffix=f"_{n}")
                except UnreconstructibleProfile as exc:
                    unreconstructible.setdefault(method, []).append(str(exc))
                    continue
                taken.add(artifact.name)
                containers.setdefault(container_name(method), []).append(artifact)
                generated[method] = generated.get(method, 0) + 1

    tests: dict[str, str] = {}
    for filename, artifacts in sorted(containers.items()):
        source = _HEADER + "".join(f"\n\n{a.source}" for a in artifacts)
        compile(source, filename, "exec")
        (out_root / filename).write_text(source, encoding="utf-8")
        for artifact in artifacts:
            tests[f"{filename}::{artifact.name}"] = artifact.method
            for rel, data in artifact.resources:
                path = out_root / RESOURCES_DIR / rel
                path.parent.mkdir(parents=True, exist_ok=True)
                path.write_bytes(data)
    if containers:
        shutil.copyfile(codec.__file__, out_root / f"{CODEC_MODULE}.py")
    return SynthesisResult(tests, generated, unreconstructible)


def write_report(result: SynthesisResult, unique: dict[str, int], path: Path) -> Path:
    Path(path).write_text(json.dumps(result.report(unique), indent=2, sort_keys=True) + "\n")
    return Path(path)


def prune_tests(source: str, keep: set[str]) -> str:
    """Drop the top-level ``test_*`` functions of *source* not named in *keep*."""
    tree = ast.parse(source)
    lines = source.splitlines(keepends=True)
    drop: list[tuple[int, int]] = []
    for node in tree.body:
        if isinstance(node, ast.FunctionDef) and node.name.startswith("test_") and node.name not in keep:
            start = min([node.lineno] + [d.lineno for d in node.decorator_list])
            drop.append((start - 1, node.end_lineno))
    for start, end in reversed(drop):
        # take the blank lines separating this function from the previous one too
        while start > 0 and not lines[start - 1].strip():
            start -= 1
        del lines[start:end]
    return "".join(lines)
