"""Append-only profile stream files (``*.pstream``).

Each record is framed as ``<byte length>\\n<record>\\n``. The record body is
line oriented::

    method fontlib.naming:NamingTable.get_name/4
    seq 12
    bytes 311
    receiving <canonical text>
    param <canonical text>        (one line per parameter, in order)
    result <canonical text>

Canonical text never contains a raw newline, so one value fits on one line.
``bytes`` is the sum of the constituent encodings, the quantity charged
against the collection budget.
"""
from __future__ import annotations

import logging
from collections.abc import Iterator
from dataclasses import dataclass
from pathlib import Path
from typing import BinaryIO

from tracecarve.codec import SerializedValue
from tracecarve.model import ObjectProfile

log = logging.getLogger(__name__)


def encode_record(profile: ObjectProfile) -> bytes:
    lines = [
        b"method " + profile.method.encode("utf-8"),
        b"seq %d" % profile.seq,
        b"bytes %d" % profile.size,
        b"receiving " + profile.receiving.data,
    ]
    lines.extend(b"param " + p.data for p in profile.parameters)
    lines.append(b"result " + profile.result.data)
    body = b"\n".join(lines)
    return b"%d\n" % len(body) + body + b"\n"


def decode_record(body: bytes) -> ObjectProfile:
    lines = body.split(b"\n")
    fields: dict[bytes, bytes] = {}
    params: list[SerializedValue] = []
    for line in lines:
        tag, sep, value = line.partition(b" ")
        if not sep:
            raise ValueError(f"bad record line {line[:40]!r}")
        if tag == b"param":
            params.append(SerializedValue(value))
        elif tag in fields or tag not in (b"method", b"seq", b"bytes", b"receiving", b"result"):
            raise ValueError(f"unexpected record field {tag!r}")
        else:
            fields[tag] = value
    profile = ObjectProfile(
        method=fields[b"method"].decode("utf-8"),
        seq=int(fields[b"seq"]),
        receiving=SerializedValue(fields[b"receiving"]),
        parameters=tuple(params),
        result=SerializedValue(fields[b"result"]),
    )
    if int(fields[b"bytes"]) != profile.size:
        raise ValueError("size field does not match record content")
    return profile


def write_record(stream: BinaryIO, profile: ObjectProfile) -> int:
    data = encode_record(profile)
    stream.write(data)
    return len(data)


@dataclass
class StreamReadResult:
    profiles: list[ObjectProfile]
    corrupt: int


def read_stream(path: Path) -> StreamReadResult:
    """Read every well-formed record; malformed ones are counted and skipped.

    A bad length header or a truncated record ends the read, since framing
    cannot be recovered past it.
    """
    data = path.read_bytes()
    profiles: list[ObjectProfile] = []
    corrupt = 0
    pos = 0
    while pos < len(data):
        newline = data.find(b"\n", pos)
        header = data[pos:newline] if newline >= 0 else data[pos:]
        if newline < 0 or not header.isdigit():
            log.warning("%s: bad record header at byte %d", path, pos)
            corrupt += 1
            break
        length = int(header)
        start = newline + 1
        end = start + length
        if end >= len(data) or data[end : end + 1] != b"\n":
            log.warning("%s: truncated record at byte %d", path, pos)
            corrupt += 1
            break
        try:
            profiles.append(decode_record(data[start:end]))
        except (ValueError, KeyError, UnicodeDecodeError) as exc:
            log.warning("%s: corrupt record at byte %d: %s", path, pos, exc)
            corrupt += 1
        pos = end + 1
    return StreamReadResult(profiles, corrupt)


def iter_stream_files(root: Path) -> Iterator[Path]:
    yield from sorted(root.glob("*.pstream"))
