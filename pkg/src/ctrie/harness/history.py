"""Concurrent operation histories: recording, serialization and a
linearizability checker."""
from __future__ import annotations

import contextlib
import json
import random
import threading
import time
from dataclasses import dataclass, field
from typing import IO, Any, Callable, Iterable, Optional, Union

from ..core import NOT_FOUND, Ctrie, Found
from .fuzz import OP_WEIGHTS, YieldHook, draw_op, thread_switching

MAX_EVENTS = 64


class MalformedHistory(ValueError):
    pass


class HistoryTooLarge(ValueError):
    pass


@dataclass(frozen=True)
class HistoryEvent:
    thread: int
    op: str  # insert | lookup | remove
    key: Any
    value: Any  # inserted value, None otherwise
    result: Any  # None for insert, Found(v) or NOT_FOUND otherwise
    inv: int
    ret: int

    def to_json(self) -> dict[str, Any]:
        if self.op == "insert":
            res = None
        elif self.result is NOT_FOUND:
            res = {"found": False}
        else:
            res = {"found": True, "value": self.result.value}
        return {"t": self.thread, "op": self.op, "k": self.key, "v": self.value,
                "res": res, "inv": self.inv, "ret": self.ret}

    @classmethod
    def from_json(cls, d: dict[str, Any]) -> "HistoryEvent":
        res = d.get("res")
        if d["op"] == "insert":
            result = None
        elif res and res.get("found"):
            result = Found(res.get("value"))
        else:
            result = NOT_FOUND
        return cls(d["t"], d["op"], d["k"], d.get("v"), result, d["inv"], d["ret"])


@dataclass
class History:
    events: list[HistoryEvent]
    key_space: list[Any] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.events)

    def dump_jsonl(self, fp: IO[str]) -> None:
        for e in self.events:
            fp.write(json.dumps(e.to_json()) + "\n")

    @classmethod
    def load_jsonl(cls, lines: Iterable[str]) -> "History":
        events = [HistoryEvent.from_json(json.loads(s)) for s in lines if s.strip()]
        return cls(events, sorted({e.key for e in events}, key=repr))


def check_well_formed(h: History) -> None:
    """Raise :class:`MalformedHistory` unless every event returned after it
    was invoked and each thread's events are sequential."""
    last: dict[int, int] = {}
    for e in sorted(h.events, key=lambda e: (e.thread, e.inv)):
        if e.op not in ("insert", "lookup", "remove"):
            raise MalformedHistory(f"unknown op {e.op!r}")
        if not e.inv < e.ret:
            raise MalformedHistory(f"event {e} returns before it is invoked")
        if e.thread in last and e.inv <= last[e.thread]:
            raise MalformedHistory(f"thread {e.thread} has overlapping events")
        last[e.thread] = e.ret


def record_history(
    threads: int,
    ops_per_thread: int,
    key_space: int,
    seed: int,
    factory: Callable[[], Any] = Ctrie,
    switch_interval: Optional[float] = 1e-6,
    jitter: float = 0.5,
) -> History:
    """Run random operations from ``threads`` workers on one shared map and
    timestamp each call. Inserted values are unique per event.

    With ``jitter > 0`` the map is built with a :class:`YieldHook` so that
    threads are preempted between reads and CASes; ``factory`` must then
    accept a ``hooks`` keyword.
    """
    if threads < 1 or ops_per_thread < 0 or key_space < 1:
        raise ValueError("threads and key_space must be positive")
    trie = factory(hooks=YieldHook(jitter, seed)) if jitter > 0 else factory()
    logs: list[list[HistoryEvent]] = [[] for _ in range(threads)]
    start = threading.Barrier(threads)
    clock = time.monotonic_ns

    def work(tid: int) -> None:
        rng = random.Random(seed * 7919 + tid)
        log = logs[tid]
        start.wait()
        for idx in range(ops_per_thread):
            op = draw_op(rng, OP_WEIGHTS)
            k = rng.randrange(key_space)
            if op == "insert":
                v = tid * ops_per_thread + idx + 1
                inv = clock()
                trie.insert(k, v)
                ret = clock()
                log.append(HistoryEvent(tid, op, k, v, None, inv, ret))
            else:
                inv = clock()
                res = getattr(trie, op)(k)
                ret = clock()
                log.append(HistoryEvent(tid, op, k, None, res, inv, ret))

    ctx = thread_switching(switch_interval) if switch_interval else contextlib.nullcontext()
    with ctx:
        workers = [threading.Thread(target=work, args=(t,)) for t in range(threads)]
        for w in workers:
            w.start()
        for w in workers:
            w.join()
    events = sorted((e for log in logs for e in log), key=lambda e: e.inv)
    return History(events, list(range(key_space)))


@dataclass(frozen=True)
class Accept:
    order: tuple[int, ...]

    @property
    def ok(self) -> bool:
        return True


@dataclass(frozen=True)
class Reject:
    """``witness`` is a linearized prefix (event indices) after which no
    pending event can be applied; the shortest one found is kept."""

    witness: tuple[int, ...]

    @property
    def ok(self) -> bool:
        return False


LinResult = Union[Accept, Reject]

State = frozenset


def apply_event(state: State, e: HistoryEvent) -> Optional[State]:
    """Sequential map semantics: the successor state, or ``None`` if ``e``'s
    recorded result is impossible from ``state``."""
    cur = dict(state)
    if e.op == "insert":
        cur[e.key] = e.value
        return frozenset(cur.items())
    want = Found(cur[e.key]) if e.key in cur else NOT_FOUND
    if want != e.result:
        return None
    if e.op == "remove" and e.key in cur:
        del cur[e.key]
        return frozenset(cur.items())
    return state


def precedence_masks(events: list[HistoryEvent]) -> list[int]:
    """``masks[b]`` has bit ``a`` set when ``a`` returned before ``b`` was invoked."""
    masks = []
    for b in events:
        m = 0
        for a_idx, a in enumerate(events):
            if a.ret < b.inv:
                m |= 1 << a_idx
        masks.append(m)
    return masks


def check_linearizable(h: History, max_events: int = MAX_EVENTS) -> LinResult:
    """Search for a sequential order of ``h`` that respects real-time
    precedence and reproduces every recorded result.

    Depth-first over frontiers (sets of linearized events) with memoization
    of failed ``(frontier, model state)`` pairs.
    """
    events = h.events
    n = len(events)
    if n > max_events:
        raise HistoryTooLarge(f"{n} events exceeds the limit of {max_events}")
    check_well_formed(h)
    preds = precedence_masks(events)
    full = (1 << n) - 1
    failed: set[tuple[int, State]] = set()
    order: list[int] = []
    best: list[Optional[tuple[int, ...]]] = [None]

    def search(done: int, state: State) -> bool:
        if done == full:
            return True
        if (done, state) in failed:
            return False
        progressed = False
        for j in range(n):
            bit = 1 << j
            if done & bit or preds[j] & ~done:
                continue
            nxt = apply_event(state, events[j])
            if nxt is None:
                continue
            progressed = True
            order.append(j)
            if search(done | bit, nxt):
                return True
            order.pop()
        if not progressed and (best[0] is None or len(order) < len(best[0])):
            best[0] = tuple(order)
        failed.add((done, state))
        return False

    if search(0, frozenset()):
        return Accept(tuple(order))
    return Reject(best[0] if best[0] is not None else ())
