"""Compare-and-set cells for object references.

CPython exposes no hardware CAS on references, so each compare/store pair
runs under one of a fixed pool of striped locks. A stripe is held for the
duration of an identity comparison and a single store; it is never held
while user code, hooks or pauses run.
"""
from __future__ import annotations

import threading
from typing import Generic, TypeVar

T = TypeVar("T")

_N_STRIPES = 64
_STRIPES = tuple(threading.Lock() for _ in range(_N_STRIPES))


def stripe_for(obj: object) -> threading.Lock:
    return _STRIPES[(id(obj) >> 4) % _N_STRIPES]


class AtomicRef(Generic[T]):
    """A single mutable reference, readable with ``get`` and written only
    through ``compare_and_set``.

    Comparison is by identity, as with a machine word holding a pointer.
    """

    __slots__ = ("_value",)

    def __init__(self, value: T) -> None:
        self._value = value

    def get(self) -> T:
        return self._value

    def compare_and_set(self, expected: T, new: T) -> bool:
        with stripe_for(self):
            if self._value is expected:
                self._value = new
                return True
            return False

    def __repr__(self) -> str:
        return f"AtomicRef({self._value!r})"
