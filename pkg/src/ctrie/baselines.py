"""Single-lock maps used as benchmark baselines and as the negative control of
the progress smoke test. Each exposes the same ``insert``/``lookup``/``remove``
surface as :class:`ctrie.core.Ctrie`."""
from __future__ import annotations

import bisect
import threading
from typing import Any, Callable, Optional

from .core import NOT_FOUND, CasHooks, Found, LookupResult


class LockedHashMap:
    def __init__(self, hash_fn: Optional[Callable[[Any], int]] = None, hooks: Optional[CasHooks] = None) -> None:
        self._lock = threading.Lock()
        self._data: dict[Any, Any] = {}
        self._hooks = hooks

    def insert(self, k: Any, v: Any) -> None:
        with self._lock:
            if self._hooks is not None:
                self._hooks.before_cas("insert", self, None, v)
            self._data[k] = v

    def lookup(self, k: Any) -> LookupResult:
        with self._lock:
            if k in self._data:
                return Found(self._data[k])
            return NOT_FOUND

    def remove(self, k: Any) -> LookupResult:
        with self._lock:
            if self._hooks is not None:
                self._hooks.before_cas("remove", self, None, None)
            if k in self._data:
                return Found(self._data.pop(k))
            return NOT_FOUND

    def __len__(self) -> int:
        with self._lock:
            return len(self._data)

    def to_dict(self) -> dict[Any, Any]:
        with self._lock:
            return dict(self._data)


class LockedOrderedMap:
    """Sorted key list searched with ``bisect``; keys must be mutually orderable."""

    def __init__(self, hash_fn: Optional[Callable[[Any], int]] = None, hooks: Optional[CasHooks] = None) -> None:
        self._lock = threading.Lock()
        self._keys: list[Any] = []
        self._vals: list[Any] = []
        self._hooks = hooks

    def insert(self, k: Any, v: Any) -> None:
        with self._lock:
            if self._hooks is not None:
                self._hooks.before_cas("insert", self, None, v)
            j = bisect.bisect_left(self._keys, k)
            if j < len(self._keys) and self._keys[j] == k:
                self._vals[j] = v
            else:
                self._keys.insert(j, k)
                self._vals.insert(j, v)

    def lookup(self, k: Any) -> LookupResult:
        with self._lock:
            j = bisect.bisect_left(self._keys, k)
            if j < len(self._keys) and self._keys[j] == k:
                return Found(self._vals[j])
            return NOT_FOUND

    def remove(self, k: Any) -> LookupResult:
        with self._lock:
            if self._hooks is not None:
                self._hooks.before_cas("remove", self, None, None)
            j = bisect.bisect_left(self._keys, k)
            if j < len(self._keys) and self._keys[j] == k:
                del self._keys[j]
                return Found(self._vals.pop(j))
            return NOT_FOUND

    def __len__(self) -> int:
        with self._lock:
            return len(self._keys)

    def to_dict(self) -> dict[Any, Any]:
        with self._lock:
            return dict(zip(self._keys, self._vals))
