"""Static discovery of methods in a subject source tree."""
from __future__ import annotations

import ast
import os
from collections.abc import Iterator
from dataclasses import dataclass
from pathlib import Path

from tracecarve.errors import ParseFailure
from tracecarve.model import (
    INSTANCE,
    NON_PUBLIC,
    PUBLIC,
    STATIC_LIKE,
    MethodDescriptor,
    make_method_id,
)

SKIP_DIRS = {"__pycache__", "build", "dist", "node_modules", "venv"}

_BOOLEAN = {"bool"}
_INTEGER = {"int"}
_FLOAT = {"float"}
_STRING = {"str"}
COLLECTION_EMPTY = {
    "list": "[]",
    "List": "[]",
    "Sequence": "[]",
    "MutableSequence": "[]",
    "Iterable": "[]",
    "Collection": "[]",
    "dict": "{}",
    "Dict": "{}",
    "Mapping": "{}",
    "MutableMapping": "{}",
    "set": "set()",
    "Set": "set()",
    "AbstractSet": "set()",
    "MutableSet": "set()",
    "frozenset": "frozenset()",
    "FrozenSet": "frozenset()",
    "tuple": "()",
    "Tuple": "()",
}
ITERATOR_TYPES = {"Iterator", "Generator", "AsyncIterator", "AsyncGenerator", "Coroutine"}


def is_test_file(path: Path) -> bool:
    name = path.name
    return name.startswith("test_") or name.endswith("_test.py") or name == "conftest.py"


def iter_source_files(root: Path, exclude: tuple[str, ...] = ("tests",)) -> Iterator[Path]:
    """Subject modules under *root*, skipping test code and the given directories."""
    excluded = {(root / e).resolve() for e in exclude}
    for dirpath, dirnames, filenames in os.walk(root):
        here = Path(dirpath)
        dirnames[:] = sorted(
            d
            for d in dirnames
            if not d.startswith(".")
            and d not in SKIP_DIRS
            and (here / d).resolve() not in excluded
        )
        for filename in sorted(filenames):
            path = here / filename
            if filename.endswith(".py") and not is_test_file(path) and filename != "setup.py":
                yield path


def module_name(rel_path: Path) -> str:
    parts = list(rel_path.with_suffix("").parts)
    if parts[-1] == "__init__":
        parts.pop()
    return ".".join(parts)


def _base_name(node: ast.expr) -> str:
    if isinstance(node, ast.Name):
        return node.id
    if isinstance(node, ast.Attribute):
        return node.attr
    if isinstance(node, ast.Subscript):
        return _base_name(node.value)
    return ""


def _is_none(node: ast.expr) -> bool:
    return isinstance(node, ast.Constant) and node.value is None


def _union_members(node: ast.expr) -> list[ast.expr] | None:
    if isinstance(node, ast.BinOp) and isinstance(node.op, ast.BitOr):
        left = _union_members(node.left) or [node.left]
        right = _union_members(node.right) or [node.right]
        return left + right
    if isinstance(node, ast.Subscript) and _base_name(node.value) in ("Optional", "Union"):
        inner = node.slice
        members = list(inner.elts) if isinstance(inner, ast.Tuple) else [inner]
        if _base_name(node.value) == "Optional":
            members.append(ast.Constant(None))
        return members
    return None


def annotation_shape(node: ast.expr | None, typevars: set[str] = frozenset()) -> str:
    """Return-shape of an annotation expression (without body inference)."""
    if node is None:
        return "reference"
    if isinstance(node, ast.Constant) and isinstance(node.value, str):
        try:
            return annotation_shape(ast.parse(node.value, mode="eval").body, typevars)
        except SyntaxError:
            return "reference"
    if _is_none(node):
        return "unit"
    members = _union_members(node)
    if members is not None:
        concrete = [m for m in members if not _is_none(m)]
        if len(concrete) == 1:
            return annotation_shape(concrete[0], typevars)
        return "reference"
    name = _base_name(node)
    if name in _BOOLEAN:
        return "boolean"
    if name in _INTEGER:
        return "integer-like"
    if name in _FLOAT:
        return "float-like"
    if name in _STRING:
        return "string"
    if name in COLLECTION_EMPTY or name in ITERATOR_TYPES:
        return "collection"
    return "reference"


def _own_nodes(func: ast.AST) -> Iterator[ast.AST]:
    """Nodes of *func*'s body, not descending into nested scopes."""
    stack = list(ast.iter_child_nodes(func))
    while stack:
        node = stack.pop()
        if isinstance(node, (ast.FunctionDef, ast.AsyncFunctionDef, ast.Lambda, ast.ClassDef)):
            continue
        yield node
        stack.extend(ast.iter_child_nodes(node))


def is_generator(func: ast.FunctionDef) -> bool:
    return any(isinstance(n, (ast.Yield, ast.YieldFrom)) for n in _own_nodes(func))


def infer_shape(func: ast.FunctionDef, typevars: set[str]) -> tuple[str, str]:
    """(return shape, annotation text) for a method definition."""
    if func.returns is not None:
        text = ast.unparse(func.returns)
        if _base_name(func.returns) in typevars:
            return "reference", "~" + text
        return annotation_shape(func.returns, typevars), text
    if is_generator(func):
        return "collection", "Generator"
    returns_value = any(
        isinstance(n, ast.Return) and n.value is not None and not _is_none(n.value)
        for n in _own_nodes(func)
    )
    return ("reference" if returns_value else "unit"), ""


def _decorator_names(func: ast.FunctionDef) -> set[str]:
    return {_base_name(d.func if isinstance(d, ast.Call) else d) for d in func.decorator_list}


def _module_typevars(tree: ast.Module) -> set[str]:
    names = set()
    for node in tree.body:
        if (
            isinstance(node, ast.Assign)
            and isinstance(node.value, ast.Call)
            and _base_name(node.value.func) in ("TypeVar", "ParamSpec")
        ):
            names.update(t.id for t in node.targets if isinstance(t, ast.Name))
    return names


@dataclass(frozen=True)
class FoundMethod:
    descriptor: MethodDescriptor
    node: ast.FunctionDef


def parse_source(path: Path, data: bytes | None = None) -> ast.Module:
    if data is None:
        data = path.read_bytes()
    try:
        return ast.parse(data, filename=str(path))
    except SyntaxError as exc:
        raise ParseFailure(f"{path}: {exc}") from exc


def methods_in_module(tree: ast.Module, module: str, rel_path: str) -> list[FoundMethod]:
    typevars = _module_typevars(tree)
    found: list[FoundMethod] = []

    def visit_class(cls: ast.ClassDef, prefix: str) -> None:
        owner = f"{prefix}{cls.name}"
        for item in cls.body:
            if isinstance(item, ast.ClassDef):
                visit_class(item, owner + ".")
            elif isinstance(item, ast.FunctionDef):
                found.append(FoundMethod(_describe(item, module, owner, rel_path, typevars), item))

    for node in tree.body:
        if isinstance(node, ast.ClassDef):
            visit_class(node, "")
    return found


def _describe(
    func: ast.FunctionDef, module: str, owner: str, rel_path: str, typevars: set[str]
) -> MethodDescriptor:
    args = func.args
    positional = [*args.posonlyargs, *args.args]
    decorators = _decorator_names(func)
    static_like = bool(decorators & {"staticmethod", "classmethod"}) or not positional
    arity = len(positional) - (0 if static_like else 1) + len(args.kwonlyargs)
    arity += (args.vararg is not None) + (args.kwarg is not None)
    shape, annotation = infer_shape(func, typevars)
    public = not func.name.startswith("_")
    # accessors are attributes, not callable methods
    if decorators & {"property", "setter", "getter", "deleter", "cached_property"}:
        public = False
    first_lineno = min([func.lineno, *(d.lineno for d in func.decorator_list)])
    return MethodDescriptor(
        id=make_method_id(module, owner, func.name, arity),
        visibility=PUBLIC if public else NON_PUBLIC,
        receiver_kind=STATIC_LIKE if static_like else INSTANCE,
        return_shape=shape,
        param_count=arity,
        return_annotation=annotation,
        path=rel_path,
        lineno=func.lineno,
        first_lineno=first_lineno,
        decorated=bool(func.decorator_list),
        plain_params=not (args.vararg or args.kwarg or args.kwonlyargs),
    )


def scan_methods(root: Path, exclude: tuple[str, ...] = ("tests",)) -> list[FoundMethod]:
    """Every method defined in a class anywhere in the subject (all visibilities)."""
    root = Path(root)
    found: list[FoundMethod] = []
    for path in iter_source_files(root, exclude):
        rel = path.relative_to(root)
        tree = parse_source(path)
        found.extend(methods_in_module(tree, module_name(rel), rel.as_posix()))
    return found


def line_offsets(data: bytes) -> list[int]:
    """Byte offset of the start of each line (1-based line n is index n-1)."""
    offsets = [0]
    for line in data.splitlines(keepends=True):
        offsets.append(offsets[-1] + len(line))
    return offsets


def find_method(tree: ast.Module, owner: str, name: str) -> ast.FunctionDef | None:
    scope: list[ast.stmt] = tree.body
    for part in owner.split("."):
        cls = next((n for n in scope if isinstance(n, ast.ClassDef) and n.name == part), None)
        if cls is None:
            return None
        scope = cls.body
    # the last definition wins, as at runtime
    matches = [n for n in scope if isinstance(n, ast.FunctionDef) and n.name == name]
    return matches[-1] if matches else None
