from __future__ import annotations

from typing import Any

from ..core import NOT_FOUND, Found, LookupResult


class ModelMap:
    """Sequential reference map with the trie's result conventions."""

    def __init__(self) -> None:
        self.entries: dict[Any, Any] = {}

    def insert(self, k: Any, v: Any) -> None:
        self.entries[k] = v

    def lookup(self, k: Any) -> LookupResult:
        if k in self.entries:
            return Found(self.entries[k])
        return NOT_FOUND

    def remove(self, k: Any) -> LookupResult:
        if k in self.entries:
            return Found(self.entries.pop(k))
        return NOT_FOUND
