from __future__ import annotations

import json
import random

import pytest

from helpers import brute_force_dedupe, profile, random_multiset
from tracecarve.collector import PROFILES_DIR, STATS_FILE
from tracecarve.errors import MissingPrerequisite, MixedMethods
from tracecarve.model import method_file_name
from tracecarve.pstream import decode_record, encode_record, read_stream, write_record
from tracecarve.store import (
    dedupe,
    load_and_stats,
    load_profile_stats,
    load_unique,
    write_unique,
)


def test_record_round_trip():
    p = profile("Owner{a=1}", ("6", "1"), '"LiberationSans"', seq=7)
    data = encode_record(p)
    header, _, rest = data.partition(b"\n")
    assert int(header) == len(rest) - 1 and rest.endswith(b"\n")
    assert decode_record(rest[:-1]) == p


def test_record_with_no_parameters():
    p = profile(params=())
    assert decode_record(encode_record(p).split(b"\n", 1)[1][:-1]) == p


def test_dedupe_keeps_first_occurrence():
    p, q = profile(seq=1), profile(result="4", seq=2)
    later_p = profile(seq=3)
    assert dedupe([later_p, q, p]) == [p, q]


def test_dedupe_rejects_mixed_methods():
    with pytest.raises(MixedMethods):
        dedupe([profile(), profile(method="x:Y.z/2")])


def test_dedupe_matches_brute_force_oracle():
    rng = random.Random(7)
    for _ in range(50):
        profiles = random_multiset(rng, rng.randint(0, 200))
        assert dedupe(profiles) == brute_force_dedupe(profiles)


def test_dedupe_is_idempotent():
    profiles = random_multiset(random.Random(3), 100)
    once = dedupe(profiles)
    assert dedupe(once) == once


def _write_store(root, profiles, invocations=None):
    (root / PROFILES_DIR).mkdir(parents=True)
    by_method = {}
    for p in profiles:
        by_method.setdefault(p.method, []).append(p)
    for method, items in by_method.items():
        with open(root / PROFILES_DIR / f"{method_file_name(method)}.pstream", "wb") as fh:
            for p in items:
                write_record(fh, p)
    if invocations is not None:
        methods = {
            m: {"invocations": n, "collected": len(by_method.get(m, [])), "stored_bytes": 0, "skipped": {}}
            for m, n in invocations.items()
        }
        (root / STATS_FILE).write_text(json.dumps({"threshold_bytes": 1, "methods": methods}))


def test_identical_records_collapse_to_one(tmp_path):
    profiles = [profile(params=(), result="True", seq=i) for i in range(1, 301)]
    _write_store(tmp_path, profiles, {profiles[0].method: 320})
    contents = load_and_stats(tmp_path)
    stats = contents.stats[profiles[0].method]
    assert (stats.invocations, stats.collected, stats.unique) == (320, 300, 1)


def test_empty_store(tmp_path):
    (tmp_path / PROFILES_DIR).mkdir()
    contents = load_and_stats(tmp_path)
    assert contents.profiles == {} and contents.stats == {}


def test_missing_store(tmp_path):
    with pytest.raises(MissingPrerequisite):
        load_and_stats(tmp_path / "nope")


def test_truncated_trailing_record(tmp_path):
    profiles = [profile(result=str(i), seq=i) for i in range(1, 6)]
    _write_store(tmp_path, profiles)
    path = tmp_path / PROFILES_DIR / f"{method_file_name(profiles[0].method)}.pstream"
    data = path.read_bytes()
    path.write_bytes(data[:-7])
    contents = load_and_stats(tmp_path)
    stats = contents.stats[profiles[0].method]
    assert contents.profiles[profiles[0].method] == profiles[:4]
    assert (stats.collected, stats.corrupt) == (4, 1)


def test_corrupt_middle_record_is_skipped(tmp_path):
    profiles = [profile(result=str(i), seq=i) for i in range(1, 4)]
    _write_store(tmp_path, profiles)
    path = tmp_path / PROFILES_DIR / f"{method_file_name(profiles[0].method)}.pstream"
    # same length, broken size field in the second record
    path.write_bytes(path.read_bytes().replace(b"seq 2\nbytes 4", b"seq 2\nbytes 5", 1))
    result = read_stream(path)
    assert [p.seq for p in result.profiles] == [1, 3]
    assert result.corrupt == 1


def test_stats_invariant_and_outputs(tmp_path):
    rng = random.Random(11)
    profiles = random_multiset(rng, 150) + random_multiset(rng, 60, method="pkg.mod:Other.run/2")
    store = tmp_path / "store"
    _write_store(store, profiles)
    contents = load_and_stats(store)
    for s in contents.stats.values():
        assert s.unique <= s.collected <= s.invocations
    out = tmp_path / "out"
    unique = write_unique(contents, out)
    assert load_unique(out) == unique
    assert {m: s.unique for m, s in load_profile_stats(out).items()} == {m: len(u) for m, u in unique.items()}
