from __future__ import annotations

import decimal
import math
import socket
from collections import OrderedDict

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tracecarve import codec
from tracecarve.codec import (
    ConcurrentMutation,
    MalformedEncoding,
    ShapeMismatch,
    UnknownType,
    UnserializableResource,
    UnserializableValue,
    dumps,
    loads,
)
from valuetypes import (
    Color,
    Holder,
    IntSubclass,
    Node,
    Pair,
    Point,
    Shifty,
    Slotted,
    WithCache,
)

scalars = st.one_of(
    st.none(),
    st.booleans(),
    st.integers(),
    st.floats(allow_nan=True, allow_infinity=True),
    st.text(),
    st.binary(max_size=16),
    st.decimals(allow_nan=False, places=3),
    st.sampled_from(list(Color)),
)
hashables = st.recursive(
    scalars.filter(lambda v: not (isinstance(v, float) and math.isnan(v))),
    lambda inner: st.one_of(
        st.tuples(inner, inner),
        st.frozensets(inner, max_size=3),
    ),
    max_leaves=6,
)


def _containers(inner):
    return st.one_of(
        st.lists(inner, max_size=4),
        st.tuples(inner),
        st.tuples(inner, inner, inner),
        st.dictionaries(hashables, inner, max_size=4),
        st.sets(hashables, max_size=4),
        st.builds(Point, inner, inner),
        st.builds(Pair, inner, inner),
        st.builds(bytearray, st.binary(max_size=8)),
    )


value_trees = st.recursive(scalars, _containers, max_leaves=25)


@settings(max_examples=300, deadline=None)
@given(value_trees)
def test_round_trip_is_byte_identical(value):
    text = dumps(value)
    assert "\n" not in text
    assert dumps(loads(text)) == text


@pytest.mark.parametrize(
    "value, text",
    [
        (None, "None"),
        (True, "True"),
        (-12, "-12"),
        (1.5, "1.5"),
        (float("-inf"), "-inf"),
        ("LiberationSans", '"LiberationSans"'),
        (b"\x00\xff", 'b"00ff"'),
        ((1,), "(1,)"),
        ((), "()"),
        ({"b": 1, "a": 2}, '{"a": 2, "b": 1}'),
        ({3, 1, 2}, "set{1, 2, 3}"),
        (decimal.Decimal("1.10"), 'decimal"1.10"'),
        (Color.GREEN, "valuetypes:Color.GREEN"),
        (Pair(1, "x"), 'valuetypes:Pair(1, "x")'),
        (Point(2, 1), "valuetypes:Point{x=2, y=1}"),
    ],
)
def test_canonical_text(value, text):
    assert dumps(value) == text


def test_equal_values_encode_identically_regardless_of_insertion_order():
    a = {"x": [1, 2], "y": {"k": None}}
    b = {"y": {"k": None}, "x": [1, 2]}
    assert dumps(a) == dumps(b)
    assert dumps({1, 2, 3}) == dumps({3, 2, 1})


def test_mixed_key_types_sort_by_encoding():
    assert dumps({1: "a", "1": "b", None: "c"}) == '{"1": "b", 1: "a", None: "c"}'


def test_nan_round_trips():
    assert math.isnan(loads(dumps(float("nan"))))


def test_shared_reference_round_trip():
    shared = [1, 2]
    value = [shared, shared]
    text = dumps(value)
    assert text == "[[1, 2], @1]"
    rebuilt = loads(text)
    assert rebuilt[0] is rebuilt[1]


def test_cycle_through_object():
    root = Node("root")
    child = Node("child")
    root.children.append(child)
    child.parent = root
    rebuilt = loads(dumps(root))
    assert rebuilt.children[0].parent is rebuilt
    assert dumps(rebuilt) == dumps(root)


def test_self_containing_list():
    lst = []
    lst.append(lst)
    assert dumps(lst) == "[@0]"
    rebuilt = loads("[@0]")
    assert rebuilt[0] is rebuilt


def test_cycle_through_immutable_is_rejected():
    lst = []
    t = (lst,)
    lst.append(t)
    with pytest.raises(UnserializableValue):
        dumps(t)


def test_slots_and_mangled_names():
    value = Slotted(1, "secret")
    text = dumps(value)
    assert "_Slotted__hidden" in text
    assert loads(text).hidden() == "secret"


def test_transient_fields_are_omitted():
    text = dumps(WithCache(3))
    assert text == "valuetypes:WithCache{key=3}"
    rebuilt = loads(text)
    assert rebuilt.key == 3 and not hasattr(rebuilt, "cache")


def test_resource_fields_are_refused():
    with pytest.raises(UnserializableResource):
        dumps(Holder())
    sock = socket.socket()
    try:
        with pytest.raises(UnserializableResource):
            dumps([sock])
    finally:
        sock.close()


@pytest.mark.parametrize(
    "value",
    [lambda: None, len, iter([]), IntSubclass(3), OrderedDict(a=1), int],
)
def test_values_without_converter(value):
    with pytest.raises(UnserializableValue):
        dumps(value)


def test_state_changing_during_encoding_is_detected():
    with pytest.raises(ConcurrentMutation):
        dumps(Shifty())


@pytest.mark.parametrize(
    "text",
    ["", "[1, 2", "(1)", "{1: }", "01", "1.0e", '"unterminated', "[1] [2]", "@0", "Tru"],
)
def test_malformed_text(text):
    with pytest.raises(MalformedEncoding):
        loads(text)


def test_unknown_type():
    with pytest.raises(UnknownType):
        loads("nowhere.to.be.found:Ghost{}")


def test_deserialize_checks_expected_type():
    data = codec.serialize_value(Point(1, 2))
    assert isinstance(codec.deserialize_value(data, Point), Point)
    with pytest.raises(ShapeMismatch):
        codec.deserialize_value(data, Pair)
    with pytest.raises(MalformedEncoding):
        codec.deserialize_value(b"\xff\xfe")


def test_serialized_value_kind():
    small = codec.serialize_value("x")
    big = codec.serialize_value("x" * 2000)
    assert small.kind() == codec.INLINE_CAPABLE
    assert big.kind() == codec.RESOURCE_REQUIRED
    assert big.kind(inline_threshold=5000) == codec.INLINE_CAPABLE
    assert small.size == len(small.data) == 3
