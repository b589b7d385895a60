from __future__ import annotations

import pytest

from helpers import profile, sv
from tracecarve.model import (
    ObjectProfile,
    make_method_id,
    method_file_name,
    parse_method_id,
    read_target_list,
    write_target_list,
)


def test_method_id_round_trip():
    method_id = make_method_id("fontlib.naming", "NamingTable", "get_name", 4)
    assert method_id == "fontlib.naming:NamingTable.get_name/4"
    ref = parse_method_id(method_id)
    assert (ref.module, ref.owner, ref.name, ref.arity) == ("fontlib.naming", "NamingTable", "get_name", 4)
    assert method_file_name(method_id) == "fontlib.naming.NamingTable.get_name-4"


def test_nested_owner():
    ref = parse_method_id("a:Outer.Inner.run/0")
    assert ref.owner == "Outer.Inner" and ref.name == "run"


@pytest.mark.parametrize("bad", ["", "mod.Owner.m/1", "mod:Owner.m", "mod:m/1", "mod:Owner.m/x"])
def test_malformed_method_ids(bad):
    with pytest.raises(ValueError):
        parse_method_id(bad)


def test_target_list_comments_and_blank_lines():
    text = "# pseudo-tested\na:B.c/0\n\na:B.d/1  # second\n"
    assert read_target_list(text) == ["a:B.c/0", "a:B.d/1"]
    assert read_target_list(write_target_list(["a:B.c/0"])) == ["a:B.c/0"]


def test_key_ignores_method_and_seq():
    a = profile(seq=1)
    b = profile(seq=99, method="other:X.y/2")
    assert a.key() == b.key()
    assert a.key().prefix == a.key().digest[:8]


def test_key_respects_constituent_boundaries():
    # same concatenated bytes, different split between constituents
    a = ObjectProfile("m:O.f/1", 1, sv("ab"), (sv("c"),), sv("d"))
    b = ObjectProfile("m:O.f/1", 1, sv("a"), (sv("bc"),), sv("d"))
    c = ObjectProfile("m:O.f/2", 1, sv("a"), (sv("b"), sv("c")), sv("d"))
    assert len({a.key(), b.key(), c.key()}) == 3


def test_every_single_byte_change_changes_the_key():
    base = profile("Owner{a=1}", ("12", '"x"'), "None")
    key = base.key()
    parts = [base.receiving.data, *(p.data for p in base.parameters), base.result.data]
    for i, part in enumerate(parts):
        for j in range(len(part)):
            for replacement in (0x20, 0x7A, part[j] ^ 1):
                if replacement == part[j]:
                    continue
                mutated = bytearray(part)
                mutated[j] = replacement
                new_parts = list(parts)
                new_parts[i] = bytes(mutated)
                other = ObjectProfile(
                    base.method, base.seq,
                    sv(new_parts[0].decode("latin-1")),
                    tuple(sv(p.decode("latin-1")) for p in new_parts[1:-1]),
                    sv(new_parts[-1].decode("latin-1")),
                )
                assert other.key() != key


def test_profile_size_is_sum_of_constituents():
    p = profile("abcd", ("1", "22"), "333")
    assert p.size == 4 + 1 + 2 + 3
