"""Runtime recording library used by instrumented subjects.

Instrumented methods carry a ``probe(method_id)`` decorator. The probe takes
canonical snapshots of the receiver and parameters on entry, runs the
original method, and on normal return hands everything to the active
:class:`Collector`. Nothing the collector does is allowed to change what the
subject observes: every failure becomes a counted skip.

The active collector is configured explicitly with :func:`configure` or, on
first use, from the environment:

``TRACECARVE_STORE``
    store root; recording is disabled when unset
``TRACECARVE_THRESHOLD_BYTES``
    per-method budget of stored profile bytes (default 200,000,000)
"""
from __future__ import annotations

import atexit
import functools
import inspect
import json
import logging
import os
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, BinaryIO, Callable, Union

from tracecarve.codec import (
    CodecError,
    ConcurrentMutation,
    SerializedValue,
    serialize_value,
)
from tracecarve.model import ObjectProfile, method_file_name
from tracecarve.pstream import write_record

log = logging.getLogger(__name__)

DEFAULT_THRESHOLD_BYTES = 200_000_000
DEFAULT_FLUSH_EVERY = 1000
STATS_FILE = "collection-stats.json"
PROFILES_DIR = "profiles"

BUDGET, RESOURCE, MUTATION, OVERFLOW = "budget", "resource", "mutation", "overflow"
SKIP_CAUSES = (BUDGET, RESOURCE, MUTATION, OVERFLOW)

Snapshot = Union[SerializedValue, CodecError]


@dataclass(frozen=True)
class Stored:
    seq: int


@dataclass(frozen=True)
class Skipped:
    cause: str


@dataclass
class MethodCounters:
    invocations: int = 0
    collected: int = 0
    stored_bytes: int = 0
    skipped: dict[str, int] = field(default_factory=lambda: dict.fromkeys(SKIP_CAUSES, 0))

    def to_dict(self) -> dict[str, Any]:
        return {
            "invocations": self.invocations,
            "collected": self.collected,
            "stored_bytes": self.stored_bytes,
            "skipped": dict(self.skipped),
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> MethodCounters:
        skipped = dict.fromkeys(SKIP_CAUSES, 0)
        skipped.update(data.get("skipped", {}))
        return cls(
            data.get("invocations", 0),
            data.get("collected", 0),
            data.get("stored_bytes", 0),
            skipped,
        )


def capture(value: Any) -> Snapshot:
    """Serialize *value* now; failures are returned, not raised."""
    try:
        return serialize_value(value)
    except CodecError as exc:
        return exc
    except Exception as exc:  # user code reached through attribute access
        return CodecError(f"{type(exc).__name__}: {exc}")


def _cause(error: CodecError) -> str:
    return MUTATION if isinstance(error, ConcurrentMutation) else RESOURCE


class Collector:
    """Writes object profiles for one store root and keeps per-method counters.

    Counters left by an earlier process in the same store are picked up, so
    several workload runs can append to one store one after another.
    """

    def __init__(
        self,
        store_root: str | os.PathLike,
        threshold_bytes: int = DEFAULT_THRESHOLD_BYTES,
        flush_every: int = DEFAULT_FLUSH_EVERY,
        lock_timeout: float = 5.0,
    ) -> None:
        if threshold_bytes <= 0:
            raise ValueError("threshold_bytes must be positive")
        self.root = Path(store_root)
        self.threshold_bytes = threshold_bytes
        self.flush_every = flush_every
        self.lock_timeout = lock_timeout
        (self.root / PROFILES_DIR).mkdir(parents=True, exist_ok=True)
        self._counters: dict[str, MethodCounters] = {}
        self._locks: dict[str, threading.Lock] = {}
        self._streams: dict[str, BinaryIO] = {}
        self._registry_lock = threading.Lock()
        self._counter_lock = threading.Lock()
        self._since_flush = 0
        self._closed = False
        stats_path = self.root / STATS_FILE
        if stats_path.exists():
            for method, data in json.loads(stats_path.read_text())["methods"].items():
                self._counters[method] = MethodCounters.from_dict(data)

    def _entry(self, method_id: str) -> tuple[MethodCounters, threading.Lock]:
        with self._registry_lock:
            counters = self._counters.get(method_id)
            if counters is None:
                counters = self._counters[method_id] = MethodCounters()
            lock = self._locks.get(method_id)
            if lock is None:
                lock = self._locks[method_id] = threading.Lock()
            return counters, lock

    def _stream(self, method_id: str) -> BinaryIO:
        stream = self._streams.get(method_id)
        if stream is None:
            path = self.root / PROFILES_DIR / f"{method_file_name(method_id)}.pstream"
            stream = self._streams[method_id] = open(path, "ab")
        return stream

    def _skip(self, counters: MethodCounters, cause: str) -> Skipped:
        with self._counter_lock:
            counters.skipped[cause] += 1
        return Skipped(cause)

    def record_invocation(
        self,
        method_id: str,
        receiver: Snapshot,
        parameters: list[Snapshot] | tuple[Snapshot, ...],
        result: Any,
    ) -> Stored | Skipped:
        """Record one completed invocation. Never raises."""
        try:
            return self._record(method_id, receiver, tuple(parameters), result)
        except Exception:  # the subject must not notice collector bugs
            log.exception("recording %s failed", method_id)
            counters, _ = self._entry(method_id)
            return self._skip(counters, RESOURCE)
        finally:
            self._maybe_flush()

    def _record(
        self,
        method_id: str,
        receiver: Snapshot,
        parameters: tuple[Snapshot, ...],
        result: Any,
    ) -> Stored | Skipped:
        counters, lock = self._entry(method_id)
        if not lock.acquire(timeout=self.lock_timeout):
            with self._counter_lock:
                counters.invocations += 1
            return self._skip(counters, OVERFLOW)
        try:
            with self._counter_lock:
                counters.invocations += 1
                seq = counters.invocations
            for snap in (receiver, *parameters):
                if isinstance(snap, CodecError):
                    return self._skip(counters, _cause(snap))
            result_snap = capture(result)
            if isinstance(result_snap, CodecError):
                return self._skip(counters, _cause(result_snap))
            profile = ObjectProfile(method_id, seq, receiver, parameters, result_snap)
            size = profile.size
            with self._counter_lock:
                if counters.stored_bytes + size > self.threshold_bytes:
                    over_budget = True
                else:
                    over_budget = False
                    counters.stored_bytes += size
            if over_budget:
                return self._skip(counters, BUDGET)
            stream = self._stream(method_id)
            write_record(stream, profile)
            stream.flush()
            with self._counter_lock:
                counters.collected += 1
            return Stored(seq)
        finally:
            lock.release()

    def _maybe_flush(self) -> None:
        with self._counter_lock:
            self._since_flush += 1
            due = self._since_flush >= self.flush_every
            if due:
                self._since_flush = 0
        if due:
            self.write_stats()

    def flush_stats(self) -> dict[str, dict[str, Any]]:
        """Consistent snapshot of every method's counters."""
        with self._counter_lock:
            return {m: c.to_dict() for m, c in sorted(self._counters.items())}

    def write_stats(self) -> Path:
        stats = self.flush_stats()
        path = self.root / STATS_FILE
        tmp = path.with_name(f".{path.name}.{os.getpid()}.{threading.get_ident()}.tmp")
        payload = {"threshold_bytes": self.threshold_bytes, "methods": stats}
        tmp.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
        os.replace(tmp, path)
        return path

    def close(self) -> None:
        if self._closed:
            return
        self._closed = True
        with self._registry_lock:
            for stream in self._streams.values():
                stream.close()
            self._streams.clear()
        self.write_stats()


_active: Collector | None = None
_active_from_env = False
_active_lock = threading.Lock()


def configure(
    store_root: str | os.PathLike | None, threshold_bytes: int = DEFAULT_THRESHOLD_BYTES, **kwargs: Any
) -> Collector | None:
    """Install (or with ``None`` remove) the process-wide collector."""
    global _active, _active_from_env
    with _active_lock:
        if _active is not None:
            _active.close()
        _active = Collector(store_root, threshold_bytes, **kwargs) if store_root else None
        _active_from_env = True
        return _active


def active() -> Collector | None:
    global _active, _active_from_env
    if _active_from_env:
        return _active
    with _active_lock:
        if not _active_from_env:
            store = os.environ.get("TRACECARVE_STORE")
            if store:
                threshold = int(
                    os.environ.get("TRACECARVE_THRESHOLD_BYTES", DEFAULT_THRESHOLD_BYTES)
                )
                _active = Collector(store, threshold)
            _active_from_env = True
    return _active


@atexit.register
def _close_active() -> None:
    if _active is not None:
        _active.close()


def probe(method_id: str) -> Callable[[Callable], Callable]:
    """Decorator injected in front of each target method."""

    def decorate(func: Callable) -> Callable:
        signature = inspect.signature(func)

        @functools.wraps(func)
        def wrapper(*args: Any, **kwargs: Any) -> Any:
            collector = active()
            if collector is None:
                return func(*args, **kwargs)
            try:
                bound = signature.bind(*args, **kwargs)
            except TypeError:
                return func(*args, **kwargs)
            bound.apply_defaults()
            values = list(bound.arguments.values())
            receiver = capture(values[0])
            parameters = [capture(v) for v in values[1:]]
            result = func(*args, **kwargs)
            collector.record_invocation(method_id, receiver, parameters, result)
            return result

        wrapper.__tracecarve_probe__ = method_id  # type: ignore[attr-defined]
        return wrapper

    return decorate
