"""Domain types shared by every phase of the pipeline."""
from __future__ import annotations

import hashlib
import re
from dataclasses import asdict, dataclass, field
from typing import Any

from tracecarve.codec import SerializedValue

RETURN_SHAPES = (
    "unit",
    "boolean",
    "integer-like",
    "float-like",
    "string",
    "reference",
    "collection",
)

PUBLIC, NON_PUBLIC = "public", "non-public"
INSTANCE, STATIC_LIKE = "instance", "static-like"

# <module>:<qualified class name>.<method>/<arity>
_METHOD_ID = re.compile(
    r"^(?P<module>[^\W\d][\w.]*):(?P<owner>[^\W\d][\w.]*)\.(?P<name>[^\W\d]\w*)/(?P<arity>\d+)$"
)


@dataclass(frozen=True)
class MethodRef:
    module: str
    owner: str
    name: str
    arity: int

    @property
    def id(self) -> str:
        return f"{self.module}:{self.owner}.{self.name}/{self.arity}"

    @property
    def owner_ref(self) -> str:
        return f"{self.module}:{self.owner}"


def make_method_id(module: str, owner: str, name: str, arity: int) -> str:
    return MethodRef(module, owner, name, arity).id


def parse_method_id(method_id: str) -> MethodRef:
    match = _METHOD_ID.match(method_id)
    if match is None:
        raise ValueError(f"malformed method id {method_id!r}")
    return MethodRef(
        match["module"], match["owner"], match["name"], int(match["arity"])
    )


def method_file_name(method_id: str) -> str:
    """File-system safe name for a method id (``a.b:C.m/2`` -> ``a.b.C.m-2``)."""
    ref = parse_method_id(method_id)
    return f"{ref.module}.{ref.owner}.{ref.name}-{ref.arity}"


def read_target_list(text: str) -> list[str]:
    """Parse a ``targets.list`` file: one method id per line, ``#`` comments allowed."""
    targets = []
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            parse_method_id(line)
            targets.append(line)
    return targets


def write_target_list(method_ids: list[str]) -> str:
    return "".join(f"{m}\n" for m in method_ids)


@dataclass(frozen=True)
class MethodDescriptor:
    id: str
    visibility: str
    receiver_kind: str
    return_shape: str
    param_count: int
    return_annotation: str = ""
    path: str = ""
    lineno: int = 0
    first_lineno: int = 0
    decorated: bool = False
    plain_params: bool = True

    @property
    def eligible(self) -> bool:
        return self.visibility == PUBLIC and self.receiver_kind == INSTANCE

    @property
    def ref(self) -> MethodRef:
        return parse_method_id(self.id)

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> MethodDescriptor:
        return cls(**data)


@dataclass(frozen=True, eq=False)
class ProfileKey:
    digest: str
    parts: tuple[bytes, ...] = field(repr=False)

    @property
    def prefix(self) -> str:
        return self.digest[:8]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ProfileKey):
            return NotImplemented
        # digest equality alone is not trusted; the bytes decide
        return self.digest == other.digest and self.parts == other.parts

    def __hash__(self) -> int:
        return hash(self.digest)


@dataclass(frozen=True)
class ObjectProfile:
    method: str
    seq: int
    receiving: SerializedValue
    parameters: tuple[SerializedValue, ...]
    result: SerializedValue

    @property
    def size(self) -> int:
        return self.receiving.size + sum(p.size for p in self.parameters) + self.result.size

    def key(self) -> ProfileKey:
        return profile_key(self)


def profile_key(profile: ObjectProfile) -> ProfileKey:
    """Identity of a profile's content; ``method`` and ``seq`` do not take part."""
    parts = (
        profile.receiving.data,
        *(p.data for p in profile.parameters),
        profile.result.data,
    )
    h = hashlib.sha256()
    h.update(len(parts).to_bytes(4, "big"))
    for part in parts:
        h.update(len(part).to_bytes(8, "big"))
        h.update(part)
    return ProfileKey(h.hexdigest(), parts)
