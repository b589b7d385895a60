"""Canonical text codec for Python value trees.

The encoding is a single line of UTF-8 text. Equal value trees always encode
to identical bytes, so byte equality can be used as an identity key for
recorded values. The grammar::

    value      := scalar | container | object | ref
    scalar     := "None" | "True" | "False" | int | float | str
                | 'b"' HEX '"' | 'bytearray"' HEX '"' | 'decimal' str
    int        := decimal literal, e.g. 0, -12
    float      := repr(float), e.g. 1.5, 1e-07, -0.0; or inf, -inf, nan
    str        := JSON string literal with ASCII escaping
    list       := "[" [value (", " value)*] "]"
    tuple      := "()" | "(" value ",)" | "(" value (", " value)+ ")"
    dict       := "{" [value ": " value (", " value ": " value)*] "}"
    set        := "set{" [value (", " value)*] "}"
    frozenset  := "frozenset{" [value (", " value)*] "}"
    object     := typeref "{" [name "=" value (", " name "=" value)*] "}"
    namedtuple := typeref "(" [value (", " value)*] ")"
    enum       := typeref "." member
    ref        := "@" index
    typeref    := module ":" qualname

Dict keys and set members are ordered by their standalone encoding; object
fields are ordered by name. Lists, tuples, dicts, sets, frozensets,
bytearrays, objects and named tuples receive a pre-order index when first
written; a later occurrence of the same object (sharing or a cycle) is
written as ``@index``. Scalars and enum members are always written out.

Fields named in a class-level ``__transient__`` collection are not encoded.
Decoding imports the modules named in type references: only decode text
from a trusted source.

This module depends on the standard library only, so it can be copied next
to generated tests as their support file.
"""
from __future__ import annotations

import decimal
import enum
import importlib
import io
import json
import math
import re
import socket
import threading
import types
import weakref
from dataclasses import dataclass
from typing import Any

__all__ = [
    "CodecError",
    "ConcurrentMutation",
    "INLINE_THRESHOLD",
    "MalformedEncoding",
    "SerializedValue",
    "ShapeMismatch",
    "UnknownType",
    "UnserializableResource",
    "UnserializableValue",
    "deserialize_value",
    "dumps",
    "loads",
    "serialize_value",
]

INLINE_THRESHOLD = 1024

INLINE_CAPABLE = "inline-capable"
RESOURCE_REQUIRED = "resource-required"


class CodecError(Exception):
    pass


class UnserializableValue(CodecError):
    """The value tree contains something the codec has no converter for."""


class UnserializableResource(UnserializableValue):
    """The value tree owns a system resource (socket, thread, lock, file)."""


class ConcurrentMutation(CodecError):
    """A container or object changed while it was being encoded."""


class MalformedEncoding(CodecError, ValueError):
    pass


class UnknownType(MalformedEncoding):
    pass


class ShapeMismatch(CodecError, TypeError):
    pass


@dataclass(frozen=True)
class SerializedValue:
    data: bytes

    @property
    def size(self) -> int:
        return len(self.data)

    @property
    def text(self) -> str:
        return self.data.decode("utf-8")

    def kind(self, inline_threshold: int = INLINE_THRESHOLD) -> str:
        return INLINE_CAPABLE if self.size <= inline_threshold else RESOURCE_REQUIRED


_RESOURCE_TYPES: tuple[type, ...] = (
    socket.socket,
    threading.Thread,
    type(threading.Lock()),
    type(threading.RLock()),
    io.IOBase,
)

_NO_CONVERTER_TYPES: tuple[type, ...] = (
    types.FunctionType,
    types.BuiltinFunctionType,
    types.MethodType,
    types.ModuleType,
    types.GeneratorType,
    types.CoroutineType,
    types.FrameType,
    types.CodeType,
    type,
    weakref.ref,
    memoryview,
    property,
)

_HEAPTYPE = 1 << 9


def _typeref(cls: type) -> str:
    return f"{cls.__module__}:{cls.__qualname__}"


def _is_namedtuple(cls: type) -> bool:
    return issubclass(cls, tuple) and cls is not tuple and hasattr(cls, "_fields")


def _check_plain_class(cls: type) -> None:
    # Instances of C types (or Python subclasses of them) keep state the
    # codec cannot see; refuse them instead of silently dropping it.
    for base in cls.__mro__:
        if base is object:
            continue
        if not base.__flags__ & _HEAPTYPE:
            raise UnserializableValue(f"no converter for {_typeref(cls)}")


def _transient_names(cls: type) -> set[str]:
    names: set[str] = set()
    for klass in cls.__mro__:
        names.update(klass.__dict__.get("__transient__", ()))
    return names


def _slot_names(cls: type) -> list[str]:
    names = []
    for klass in cls.__mro__:
        slots = klass.__dict__.get("__slots__", ())
        if isinstance(slots, str):
            slots = (slots,)
        for name in slots:
            if name in ("__dict__", "__weakref__"):
                continue
            if name.startswith("__") and not name.endswith("__"):
                name = f"_{klass.__name__.lstrip('_')}{name}"
            names.append(name)
    return names


def _object_fields(obj: Any) -> dict[str, Any]:
    cls = type(obj)
    fields: dict[str, Any] = {}
    state = getattr(obj, "__dict__", None)
    if state is not None:
        fields.update(state)
    for name in _slot_names(cls):
        try:
            fields[name] = getattr(obj, name)
        except AttributeError:
            pass
    for name in _transient_names(cls):
        fields.pop(name, None)
    return fields


class _Encoder:
    def __init__(self) -> None:
        self.parts: list[str] = []
        self.index: dict[int, int] = {}
        self.open_immutables: set[int] = set()
        # Keeps every indexed object alive so id() values stay unique.
        self.keepalive: list[Any] = []

    def encode(self, value: Any) -> str:
        try:
            self.write(value)
        except RecursionError:
            raise UnserializableValue("value tree nested too deeply") from None
        except RuntimeError as exc:
            # dict/set iteration raises this when another thread resizes them
            raise ConcurrentMutation(str(exc)) from None
        return "".join(self.parts)

    def _standalone(self, value: Any) -> str:
        return _Encoder().encode(value)

    def _register(self, value: Any) -> bool:
        """Return True when *value* was already written (a back-reference was emitted)."""
        key = id(value)
        if key in self.index:
            if key in self.open_immutables:
                raise UnserializableValue(
                    f"cycle through immutable {type(value).__name__}"
                )
            self.parts.append(f"@{self.index[key]}")
            return True
        self.index[key] = len(self.index)
        self.keepalive.append(value)
        return False

    def write(self, value: Any) -> None:
        cls = type(value)
        if value is None:
            self.parts.append("None")
        elif cls is bool:
            self.parts.append("True" if value else "False")
        elif cls is int:
            self.parts.append(str(value))
        elif cls is float:
            self.parts.append(_format_float(value))
        elif cls is str:
            self.parts.append(json.dumps(value))
        elif cls is bytes:
            self.parts.append(f'b"{value.hex()}"')
        elif cls is decimal.Decimal:
            self.parts.append("decimal" + json.dumps(str(value)))
        elif isinstance(value, enum.Enum):
            self.parts.append(f"{_typeref(cls)}.{value.name}")
        elif cls is list:
            self._write_list(value)
        elif cls is tuple:
            self._write_tuple(value)
        elif cls is dict:
            self._write_dict(value)
        elif cls is set or cls is frozenset:
            self._write_set(value)
        elif cls is bytearray:
            if not self._register(value):
                self.parts.append(f'bytearray"{value.hex()}"')
        elif isinstance(value, _RESOURCE_TYPES):
            raise UnserializableResource(f"{_typeref(cls)} owns a system resource")
        elif isinstance(value, _NO_CONVERTER_TYPES):
            raise UnserializableValue(f"no converter for {_typeref(cls)}")
        elif _is_namedtuple(cls):
            self._write_namedtuple(value)
        else:
            self._write_object(value)

    def _write_items(self, items: list[Any]) -> None:
        for i, item in enumerate(items):
            if i:
                self.parts.append(", ")
            self.write(item)

    def _write_list(self, value: list) -> None:
        if self._register(value):
            return
        items = list(value)
        self.parts.append("[")
        self._write_items(items)
        self.parts.append("]")
        if len(value) != len(items) or any(a is not b for a, b in zip(value, items)):
            raise ConcurrentMutation("list changed while being encoded")

    def _write_tuple(self, value: tuple) -> None:
        if self._register(value):
            return
        self.open_immutables.add(id(value))
        self.parts.append("(")
        self._write_items(list(value))
        self.parts.append(",)" if len(value) == 1 else ")")
        self.open_immutables.discard(id(value))

    def _write_dict(self, value: dict) -> None:
        if self._register(value):
            return
        items = list(value.items())
        ordered = sorted(items, key=lambda kv: self._standalone(kv[0]))
        self.parts.append("{")
        for i, (k, v) in enumerate(ordered):
            if i:
                self.parts.append(", ")
            self.write(k)
            self.parts.append(": ")
            self.write(v)
        self.parts.append("}")
        if len(value) != len(items) or any(
            value.get(k, _MISSING) is not v for k, v in items
        ):
            raise ConcurrentMutation("dict changed while being encoded")

    def _write_set(self, value: set | frozenset) -> None:
        if self._register(value):
            return
        immutable = type(value) is frozenset
        if immutable:
            self.open_immutables.add(id(value))
        members = list(value)
        ordered = sorted(members, key=self._standalone)
        self.parts.append("frozenset{" if immutable else "set{")
        self._write_items(ordered)
        self.parts.append("}")
        self.open_immutables.discard(id(value))
        if len(value) != len(members):
            raise ConcurrentMutation("set changed while being encoded")

    def _write_namedtuple(self, value: tuple) -> None:
        if self._register(value):
            return
        self.open_immutables.add(id(value))
        self.parts.append(_typeref(type(value)) + "(")
        self._write_items(list(value))
        self.parts.append(")")
        self.open_immutables.discard(id(value))

    def _write_object(self, value: Any) -> None:
        cls = type(value)
        _check_plain_class(cls)
        if self._register(value):
            return
        fields = _object_fields(value)
        self.parts.append(_typeref(cls) + "{")
        for i, name in enumerate(sorted(fields)):
            if not name.isidentifier():
                raise UnserializableValue(f"field name {name!r} is not an identifier")
            if i:
                self.parts.append(", ")
            self.parts.append(name + "=")
            self.write(fields[name])
        self.parts.append("}")
        after = _object_fields(value)
        if after.keys() != fields.keys() or any(
            after[k] is not v for k, v in fields.items()
        ):
            raise ConcurrentMutation(f"{_typeref(cls)} changed while being encoded")


_MISSING = object()


def _format_float(value: float) -> str:
    if math.isnan(value):
        return "nan"
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return repr(value)


_TOKEN = re.compile(r"[^\W\d][\w.]*(?::[^\W\d][\w.]*)?")
_NUMBER = re.compile(r"-?(?:inf|[0-9][0-9.eE+\-]*)")
_REF = re.compile(r"@([0-9]+)")
_HEX = re.compile(r'"((?:[0-9a-f]{2})*)"')
_FIELD = re.compile(r"[^\W\d]\w*=")
_PENDING = object()


def _resolve_type(ref: str) -> Any:
    module_name, _, qualname = ref.partition(":")
    if not module_name or not qualname:
        raise MalformedEncoding(f"bad type reference {ref!r}")
    try:
        target: Any = importlib.import_module(module_name)
        for part in qualname.split("."):
            target = getattr(target, part)
    except (ImportError, AttributeError) as exc:
        raise UnknownType(f"cannot resolve type {ref!r}: {exc}") from None
    return target


class _Decoder:
    def __init__(self, text: str) -> None:
        self.text = text
        self.pos = 0
        self.refs: list[Any] = []

    def fail(self, message: str) -> MalformedEncoding:
        return MalformedEncoding(f"{message} at offset {self.pos}")

    def decode(self) -> Any:
        try:
            value = self.value()
        except RecursionError:
            raise self.fail("value nested too deeply") from None
        if self.pos != len(self.text):
            raise self.fail("trailing data")
        return value

    def peek(self) -> str:
        if self.pos >= len(self.text):
            raise self.fail("truncated encoding")
        return self.text[self.pos]

    def expect(self, literal: str) -> None:
        if not self.text.startswith(literal, self.pos):
            if self.pos + len(literal) > len(self.text):
                raise self.fail("truncated encoding")
            raise self.fail(f"expected {literal!r}")
        self.pos += len(literal)

    def at(self, literal: str) -> bool:
        return self.text.startswith(literal, self.pos)

    def new_ref(self, value: Any) -> int:
        self.refs.append(value)
        return len(self.refs) - 1

    def value(self) -> Any:
        c = self.peek()
        if c == '"':
            return self.string()
        if c == "[":
            return self.list_()
        if c == "(":
            return self.tuple_()
        if c == "{":
            return self.dict_()
        if c == "@":
            return self.ref()
        if c == "-" or c.isdigit():
            return self.number()
        match = _TOKEN.match(self.text, self.pos)
        if match is None:
            raise self.fail(f"unexpected character {c!r}")
        token = match.group()
        self.pos = match.end()
        if token == "None":
            return None
        if token == "True":
            return True
        if token == "False":
            return False
        if token in ("inf", "nan"):
            return float(token)
        if token == "b" and self.at('"'):
            return bytes.fromhex(self.hex())
        if token == "bytearray" and self.at('"'):
            value = bytearray.fromhex(self.hex())
            self.new_ref(value)
            return value
        if token == "decimal" and self.at('"'):
            text = self.string()
            try:
                return decimal.Decimal(text)
            except decimal.InvalidOperation:
                raise self.fail(f"bad decimal {text!r}") from None
        if token in ("set", "frozenset") and self.at("{"):
            return self.set_(frozen=token == "frozenset")
        if ":" in token:
            return self.typed(token)
        raise self.fail(f"unknown token {token!r}")

    def string(self) -> str:
        try:
            value, end = json.decoder.scanstring(self.text, self.pos + 1)
        except json.JSONDecodeError as exc:
            raise self.fail(f"bad string: {exc.msg}") from None
        self.pos = end
        return value

    def hex(self) -> str:
        match = _HEX.match(self.text, self.pos)
        if match is None:
            raise self.fail("bad hex literal")
        self.pos = match.end()
        return match.group(1)

    def number(self) -> int | float:
        match = _NUMBER.match(self.text, self.pos)
        if match is None:
            raise self.fail("bad number")
        token = match.group()
        try:
            if any(ch in token for ch in ".eEn"):
                value: int | float = float(token)
                canonical = _format_float(value)
            else:
                value = int(token)
                canonical = str(value)
        except ValueError:
            raise self.fail(f"bad number {token!r}") from None
        if canonical != token:
            raise self.fail(f"non-canonical number {token!r}")
        self.pos = match.end()
        return value

    def ref(self) -> Any:
        match = _REF.match(self.text, self.pos)
        if match is None:
            raise self.fail("bad reference")
        index = int(match.group(1))
        if index >= len(self.refs):
            raise self.fail(f"reference @{index} before definition")
        target = self.refs[index]
        if target is _PENDING:
            raise self.fail(f"reference @{index} into an unfinished immutable value")
        self.pos = match.end()
        return target

    def items(self, close: str) -> list[Any]:
        out: list[Any] = []
        while not self.at(close):
            if out:
                self.expect(", ")
            out.append(self.value())
        self.expect(close)
        return out

    def list_(self) -> list:
        self.expect("[")
        value: list = []
        self.new_ref(value)
        while not self.at("]"):
            if value:
                self.expect(", ")
            value.append(self.value())
        self.expect("]")
        return value

    def tuple_(self) -> tuple:
        self.expect("(")
        slot = self.new_ref(_PENDING)
        items: list[Any] = []
        while not self.at(")"):
            if items:
                self.expect(", ")
            items.append(self.value())
            if len(items) == 1:
                if self.at(",)"):
                    self.pos += 1
                    break
                if self.at(")"):
                    raise self.fail("one-element tuple without trailing comma")
        self.expect(")")
        value = tuple(items)
        self.refs[slot] = value
        return value

    def dict_(self) -> dict:
        self.expect("{")
        value: dict = {}
        self.new_ref(value)
        first = True
        while not self.at("}"):
            if not first:
                self.expect(", ")
            first = False
            key = self.value()
            self.expect(": ")
            try:
                value[key] = self.value()
            except TypeError as exc:
                raise self.fail(f"unhashable key: {exc}") from None
        self.expect("}")
        return value

    def set_(self, frozen: bool) -> set | frozenset:
        self.expect("{")
        if frozen:
            slot = self.new_ref(_PENDING)
            try:
                value: set | frozenset = frozenset(self.items("}"))
            except TypeError as exc:
                raise self.fail(f"unhashable member: {exc}") from None
            self.refs[slot] = value
            return value
        members: set = set()
        self.new_ref(members)
        first = True
        while not self.at("}"):
            if not first:
                self.expect(", ")
            first = False
            try:
                members.add(self.value())
            except TypeError as exc:
                raise self.fail(f"unhashable member: {exc}") from None
        self.expect("}")
        return members

    def typed(self, token: str) -> Any:
        if self.at("{"):
            return self.object_(_resolve_type(token))
        if self.at("("):
            cls = _resolve_type(token)
            self.expect("(")
            slot = self.new_ref(_PENDING)
            try:
                value = cls(*self.items(")"))
            except TypeError as exc:
                raise self.fail(f"cannot rebuild {token}: {exc}") from None
            self.refs[slot] = value
            return value
        type_name, _, member = token.rpartition(".")
        cls = _resolve_type(type_name)
        if not (isinstance(cls, type) and issubclass(cls, enum.Enum)):
            raise self.fail(f"{type_name} is not an enum")
        try:
            return cls[member]
        except KeyError:
            raise self.fail(f"{type_name} has no member {member!r}") from None

    def object_(self, cls: Any) -> Any:
        if not isinstance(cls, type):
            raise self.fail(f"{cls!r} is not a class")
        try:
            obj = cls.__new__(cls)
        except TypeError as exc:
            raise self.fail(f"cannot allocate {_typeref(cls)}: {exc}") from None
        self.new_ref(obj)
        self.expect("{")
        first = True
        while not self.at("}"):
            if not first:
                self.expect(", ")
            first = False
            match = _FIELD.match(self.text, self.pos)
            if match is None:
                raise self.fail("bad field name")
            self.pos = match.end()
            name = match.group()[:-1]
            try:
                object.__setattr__(obj, name, self.value())
            except AttributeError as exc:
                raise self.fail(f"cannot set {name}: {exc}") from None
        self.expect("}")
        return obj


def dumps(value: Any) -> str:
    """Encode *value* as canonical text."""
    return _Encoder().encode(value)


def loads(text: str) -> Any:
    """Rebuild a value from canonical text produced by :func:`dumps`."""
    return _Decoder(text).decode()


def serialize_value(value: Any) -> SerializedValue:
    return SerializedValue(dumps(value).encode("utf-8"))


def deserialize_value(
    serialized: SerializedValue | bytes, expected: type | tuple[type, ...] | None = None
) -> Any:
    """Decode *serialized*; when *expected* is given the result must be an instance of it."""
    data = serialized.data if isinstance(serialized, SerializedValue) else serialized
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise MalformedEncoding(f"not UTF-8: {exc}") from None
    value = loads(text)
    if expected is not None and not isinstance(value, expected):
        raise ShapeMismatch(
            f"expected {expected!r}, decoded {type(value).__qualname__}"
        )
    return value
