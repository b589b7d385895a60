"""Builders shared by the unit tests."""
from __future__ import annotations

import random

from tracecarve.codec import SerializedValue
from tracecarve.model import ObjectProfile

METHOD = "pkg.mod:Owner.method/2"


def sv(text: str) -> SerializedValue:
    return SerializedValue(text.encode("utf-8"))


def profile(receiving="R", params=("1", "2"), result="3", seq=1, method=METHOD) -> ObjectProfile:
    return ObjectProfile(method, seq, sv(receiving), tuple(sv(p) for p in params), sv(result))


def random_multiset(rng: random.Random, size: int, method: str = METHOD) -> list[ObjectProfile]:
    """Profiles drawn from a small pool so duplicates are common."""
    pool = [
        (rng.choice(["R", "RR", "Owner{a=1}"]), (str(rng.randint(0, 3)), rng.choice(['"a"', '""'])),
         rng.choice(["None", "1", "True"]))
        for _ in range(rng.randint(1, 40))
    ]
    out = []
    for seq in range(1, size + 1):
        receiving, params, result = rng.choice(pool)
        out.append(profile(receiving, params, result, seq=seq, method=method))
    rng.shuffle(out)
    return out


def brute_force_dedupe(profiles: list[ObjectProfile]) -> list[ObjectProfile]:
    """Quadratic reference: keep a profile unless an earlier one has identical bytes."""
    ordered = sorted(profiles, key=lambda p: p.seq)
    kept = []
    for i, p in enumerate(ordered):
        if not any(
            q.receiving.data == p.receiving.data
            and [x.data for x in q.parameters] == [x.data for x in p.parameters]
            and q.result.data == p.result.data
            for q in ordered[:i]
        ):
            kept.append(p)
    return kept
