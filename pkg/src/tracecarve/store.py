"""Load recorded profile streams, deduplicate them and compute per-method counts."""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from pathlib import Path

from tracecarve.collector import PROFILES_DIR, STATS_FILE
from tracecarve.errors import MissingPrerequisite, MixedMethods
from tracecarve.model import ObjectProfile, ProfileKey, method_file_name
from tracecarve.pstream import iter_stream_files, read_stream, write_record

UNIQUE_DIR = "unique-profiles"
PROFILE_STATS_FILE = "profile-stats.json"


@dataclass
class ProfileStats:
    invocations: int = 0
    collected: int = 0
    unique: int = 0
    corrupt: int = 0


def dedupe(profiles: list[ObjectProfile]) -> list[ObjectProfile]:
    """Keep the first profile (lowest seq) of each distinct content key."""
    methods = {p.method for p in profiles}
    if len(methods) > 1:
        raise MixedMethods(f"profiles of several methods: {sorted(methods)}")
    seen: set[ProfileKey] = set()
    unique = []
    for profile in sorted(profiles, key=lambda p: p.seq):
        key = profile.key()
        if key not in seen:
            seen.add(key)
            unique.append(profile)
    return unique


@dataclass
class StoreContents:
    profiles: dict[str, list[ObjectProfile]]
    stats: dict[str, ProfileStats]

    @property
    def corrupt(self) -> int:
        return sum(s.corrupt for s in self.stats.values())


def load_and_stats(store_root: Path) -> StoreContents:
    """Every well-formed record in the store, grouped by method, plus counts.

    Malformed records are skipped and counted in ``ProfileStats.corrupt``.
    """
    store_root = Path(store_root)
    if not store_root.is_dir():
        raise MissingPrerequisite(f"no profile store at {store_root}")
    counters: dict[str, dict] = {}
    stats_path = store_root / STATS_FILE
    if stats_path.exists():
        counters = json.loads(stats_path.read_text())["methods"]

    profiles: dict[str, list[ObjectProfile]] = {}
    corrupt: dict[str, int] = {}
    by_file = {method_file_name(m): m for m in counters}
    for path in iter_stream_files(store_root / PROFILES_DIR):
        result = read_stream(path)
        for profile in result.profiles:
            profiles.setdefault(profile.method, []).append(profile)
        if result.corrupt:
            method = by_file.get(path.stem)
            if method is None and result.profiles:
                method = result.profiles[0].method
            corrupt[method or path.stem] = corrupt.get(method or path.stem, 0) + result.corrupt

    stats: dict[str, ProfileStats] = {}
    for method in sorted(set(counters) | set(profiles) | set(corrupt)):
        loaded = profiles.get(method, [])
        invocations = counters.get(method, {}).get("invocations", 0)
        stats[method] = ProfileStats(
            invocations=max(invocations, len(loaded)),
            collected=len(loaded),
            unique=len(dedupe(loaded)),
            corrupt=corrupt.get(method, 0),
        )
    return StoreContents(profiles, stats)


def write_unique(contents: StoreContents, out_root: Path) -> dict[str, list[ObjectProfile]]:
    """Write ``unique-profiles/*.pstream`` and ``profile-stats.json`` under *out_root*."""
    out_root = Path(out_root)
    unique_dir = out_root / UNIQUE_DIR
    unique_dir.mkdir(parents=True, exist_ok=True)
    unique: dict[str, list[ObjectProfile]] = {}
    for method, profiles in sorted(contents.profiles.items()):
        unique[method] = dedupe(profiles)
        with open(unique_dir / f"{method_file_name(method)}.pstream", "wb") as fh:
            for profile in unique[method]:
                write_record(fh, profile)
    payload = {m: asdict(s) for m, s in sorted(contents.stats.items())}
    (out_root / PROFILE_STATS_FILE).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    return unique


def load_unique(out_root: Path) -> dict[str, list[ObjectProfile]]:
    unique_dir = Path(out_root) / UNIQUE_DIR
    if not unique_dir.is_dir():
        raise MissingPrerequisite(f"no unique profiles under {out_root}")
    unique: dict[str, list[ObjectProfile]] = {}
    for path in iter_stream_files(unique_dir):
        for profile in read_stream(path).profiles:
            unique.setdefault(profile.method, []).append(profile)
    return unique


def load_profile_stats(out_root: Path) -> dict[str, ProfileStats]:
    path = Path(out_root) / PROFILE_STATS_FILE
    if not path.exists():
        raise MissingPrerequisite(f"missing {path}")
    return {m: ProfileStats(**s) for m, s in json.loads(path.read_text()).items()}
