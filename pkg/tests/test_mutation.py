from __future__ import annotations

import pytest

from conftest import write_project
from tracecarve.errors import BaselineSuiteFails, UnsupportedShape
from tracecarve.model import MethodDescriptor
from tracecarve.mutation import (
    DETECTED,
    NOT_COVERED,
    PSEUDO_TESTED,
    SURVIVED,
    TIMED_OUT,
    WELL_TESTED,
    Classification,
    apply_variant,
    classify_targets,
    enumerate_candidates,
    generate_variants,
)
from tracecarve.scan import scan_methods


def _descriptor(shape, annotation=""):
    return MethodDescriptor("m:C.f/0", "public", "instance", shape, 0, annotation)


@pytest.mark.parametrize(
    "shape, annotation, replacements",
    [
        ("unit", "None", ["pass"]),
        ("boolean", "bool", ["return True", "return False"]),
        ("integer-like", "int", ["return -1", "return 0", "return 1"]),
        ("float-like", "float", ["return -1.0", "return 0.0", "return 1.0"]),
        ("string", "str", ["return None", 'return "A"', 'return ""']),
        ("reference", "Money", ["return None"]),
        ("collection", "list[int]", ["return []"]),
        ("collection", "Optional[dict[str, int]]", ["return {}"]),
        ("collection", "tuple", ["return ()"]),
        ("collection", "set[str] | None", ["return set()"]),
    ],
)
def test_variant_catalog(shape, annotation, replacements):
    assert [v.replacement for v in generate_variants(_descriptor(shape, annotation))] == replacements


@pytest.mark.parametrize("annotation", ["Iterator[int]", "Generator", "~T"])
def test_unsupported_shapes(annotation):
    with pytest.raises(UnsupportedShape):
        generate_variants(_descriptor("collection" if annotation != "~T" else "reference", annotation))


def test_candidates_exclude_private_static_and_accessors(calc_project):
    ids = {m.id for m in enumerate_candidates(calc_project)}
    assert "calc.ops:Calc.add/1" in ids
    assert not any(name in i for i in ids for name in ("__init__", "doubled", "helper"))


def test_apply_variant_replaces_the_whole_body(calc_project):
    source = (calc_project / "calc/ops.py").read_bytes()
    method = next(f.descriptor for f in scan_methods(calc_project) if f.descriptor.id == "calc.ops:Calc.add/1")
    mutated = apply_variant(source, method, "return 0")
    assert b"self.total += x" not in mutated
    assert b"    def add(self, x: int) -> int:\n        return 0\n\n    def is_zero" in mutated
    compile(mutated, "ops.py", "exec")
    # everything outside the body is untouched
    assert mutated.replace(b"return 0", b"", 1) == source.replace(
        b"self.total += x\n        return self.total", b"", 1
    )


def test_classify_small_project(calc_project):
    before = (calc_project / "calc/ops.py").read_bytes()
    result = classify_targets(calc_project, timeout=60)
    statuses = result.statuses()
    assert statuses == {
        "calc.ops:Calc.add/1": WELL_TESTED,
        "calc.ops:Calc.is_zero/0": PSEUDO_TESTED,
        "calc.ops:Calc.label/0": PSEUDO_TESTED,
        "calc.ops:Calc.reset/0": PSEUDO_TESTED,
        "calc.ops:Calc.items/0": WELL_TESTED,
        "calc.ops:Calc.untested/0": NOT_COVERED,
    }
    assert set(result.excluded) == {"calc.ops:Calc.gen/0", "calc.ops:Calc.same/1"}
    add = next(r for r in result.records if r.method == "calc.ops:Calc.add/1")
    assert add.covering_tests == ["tests/test_ops.py::test_add"]
    assert [v.outcome for v in add.variants] == [DETECTED, DETECTED, DETECTED]
    label = next(r for r in result.records if r.method == "calc.ops:Calc.label/0")
    assert {v.outcome for v in label.variants} == {SURVIVED}
    # the subject tree is never modified
    assert (calc_project / "calc/ops.py").read_bytes() == before
    assert Classification.from_json(result.to_json()).statuses() == statuses


def test_failing_baseline_is_refused(calc_project):
    (calc_project / "tests/test_broken.py").write_text("def test_broken():\n    assert False\n")
    with pytest.raises(BaselineSuiteFails):
        classify_targets(calc_project)


def test_hanging_variant_times_out(tmp_path):
    project = write_project(tmp_path / "p", {
        "loop/__init__.py": "",
        "loop/core.py": (
            "class Countdown:\n"
            "    def run(self, n: int) -> int:\n"
            "        return n\n"
        ),
        "tests/test_core.py": (
            "from loop.core import Countdown\n\n\n"
            "def test_run():\n"
            "    n = 1\n"
            "    while Countdown().run(n) != n + 5:\n"
            "        if Countdown().run(n) == n:\n"
            "            return\n"
        ),
    })
    result = classify_targets(project, timeout=3)
    record = result.records[0]
    # variants returning -1 and 1 never match, 0 matches only n == 0: loop forever
    assert TIMED_OUT in {v.outcome for v in record.variants}
    assert record.status == PSEUDO_TESTED
