"""Small classes used as codec test data; importable by module name."""
from __future__ import annotations

import enum
import threading
from typing import NamedTuple


class Point:
    def __init__(self, x, y):
        self.x = x
        self.y = y


class Node:
    def __init__(self, label, children=None):
        self.label = label
        self.children = children if children is not None else []
        self.parent = None


class Slotted:
    __slots__ = ("a", "__hidden")

    def __init__(self, a, hidden):
        self.a = a
        self.__hidden = hidden

    def hidden(self):
        return self.__hidden


class WithCache:
    __transient__ = ("cache",)

    def __init__(self, key):
        self.key = key
        self.cache = {"computed": key * 2}


class Pair(NamedTuple):
    left: object
    right: object


class Color(enum.Enum):
    RED = 1
    GREEN = 2


class Holder:
    def __init__(self):
        self.lock = threading.Lock()


class IntSubclass(int):
    pass


class Shifty:
    """Changes one of its own fields the first time the encoder reads its state."""

    def __init__(self):
        self.value = 1
        object.__setattr__(self, "_armed", True)

    def __getattribute__(self, name):
        state = object.__getattribute__(self, "__dict__")
        if name == "__dict__" and state.get("_armed"):
            state["_armed"] = False
            snapshot = dict(state)
            state["value"] = 2
            return snapshot
        return object.__getattribute__(self, name)
