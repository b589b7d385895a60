from __future__ import annotations

import textwrap
from pathlib import Path

import pytest

from tracecarve.fixture import copy_subject

CALC_SOURCE = '''\
from typing import TypeVar

T = TypeVar("T")


class Calc:
    def __init__(self):
        self.total = 0

    def add(self, x: int) -> int:
        self.total += x
        return self.total

    def is_zero(self) -> bool:
        return self.total == 0

    def label(self) -> str:
        return "calc"

    def reset(self) -> None:
        self.total = 0

    def items(self) -> list:
        return [self.total]

    def gen(self):
        yield self.total

    def same(self, x: T) -> T:
        return x

    def untested(self) -> int:
        return 3

    @property
    def doubled(self):
        return self.total * 2

    @staticmethod
    def helper() -> int:
        return 1
'''

CALC_TESTS = '''\
from calc.ops import Calc


def test_add():
    assert Calc().add(2) == 2


def test_is_zero():
    Calc().is_zero()


def test_label():
    Calc().label()


def test_reset():
    Calc().reset()


def test_items():
    assert Calc().items() == [0]


def test_gen():
    list(Calc().gen())
'''


_criteria: dict[int, tuple[str, str]] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or report.when not in ("setup", "call"):
        return
    number, title = marker.args
    if report.failed or report.when == "call":
        _criteria[number] = (title, "PASS" if report.passed else "FAIL")


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_criteria):
        title, verdict = _criteria[number]
        terminalreporter.write_line(f"criterion {number:>2}: {verdict}  {title}")


def write_project(root: Path, files: dict[str, str]) -> Path:
    for rel, text in files.items():
        path = root / rel
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(textwrap.dedent(text))
    return root


@pytest.fixture
def calc_project(tmp_path) -> Path:
    return write_project(
        tmp_path / "calc-project",
        {"calc/__init__.py": "", "calc/ops.py": CALC_SOURCE, "tests/test_ops.py": CALC_TESTS},
    )


@pytest.fixture
def fixture_subject(tmp_path) -> Path:
    return copy_subject(tmp_path / "subject")
