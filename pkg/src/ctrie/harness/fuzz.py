"""Sequential differential fuzzing against :class:`ModelMap` and multi-threaded
mixed-operation rounds."""
from __future__ import annotations

import contextlib
import random
import sys
import threading
import time
from dataclasses import dataclass, field
from typing import Any, Callable, Iterator, Optional

from ..core import NOT_FOUND, CNode, Ctrie, SNode, to_weak_tombed
from .. import validator
from .model import ModelMap

OP_WEIGHTS = (("insert", 0.45), ("lookup", 0.35), ("remove", 0.20))


def draw_op(rng: random.Random, weights: tuple = OP_WEIGHTS) -> str:
    x = rng.random()
    acc = 0.0
    for name, w in weights:
        acc += w
        if x < acc:
            return name
    return weights[-1][0]


@dataclass(frozen=True)
class Divergence:
    index: int
    op: str
    key: Any
    expected: Any
    actual: Any

    def __str__(self) -> str:
        return f"op #{self.index} {self.op}({self.key!r}): expected {self.expected!r}, got {self.actual!r}"


@dataclass
class FuzzReport:
    seed: int
    n_ops: int
    key_space: int
    ops_run: int = 0
    divergence: Optional[Divergence] = None
    final_mismatch: Optional[str] = None

    @property
    def ok(self) -> bool:
        return self.divergence is None and self.final_mismatch is None

    def describe(self) -> str:
        if self.ok:
            return f"seed={self.seed} ops={self.ops_run} ok"
        what = str(self.divergence) if self.divergence else self.final_mismatch
        return f"seed={self.seed} diverged: {what}"

    def to_dict(self) -> dict[str, Any]:
        return {
            "seed": self.seed,
            "ops": self.n_ops,
            "keys": self.key_space,
            "ops_run": self.ops_run,
            "ok": self.ok,
            "divergence": str(self.divergence) if self.divergence else None,
            "final_mismatch": self.final_mismatch,
        }


def sequential_fuzz(
    seed: int,
    n_ops: int,
    key_space: int,
    factory: Callable[[], Any] = Ctrie,
    on_step: Optional[Callable[[int, Any], None]] = None,
) -> FuzzReport:
    """Run the same random operation stream on a fresh trie and on a model
    map, comparing every result and the final contents.

    ``on_step(index, trie)`` is called after every operation; the invariant
    suite uses it to sample snapshots.
    """
    if n_ops < 1:
        raise ValueError("n_ops must be >= 1")
    rng = random.Random(seed)
    trie = factory()
    model = ModelMap()
    report = FuzzReport(seed, n_ops, key_space)
    for idx in range(n_ops):
        op = draw_op(rng)
        k = rng.randrange(key_space)
        if op == "insert":
            trie.insert(k, idx)
            model.insert(k, idx)
        else:
            got = getattr(trie, op)(k)
            want = getattr(model, op)(k)
            if got != want:
                report.ops_run = idx + 1
                report.divergence = Divergence(idx, op, k, want, got)
                return report
        if on_step is not None:
            on_step(idx, trie)
    report.ops_run = n_ops
    final = validator.to_dict(trie)
    if final != model.entries:
        missing = model.entries.keys() - final.keys()
        extra = final.keys() - model.entries.keys()
        report.final_mismatch = f"final contents differ: {len(missing)} missing, {len(extra)} extra"
    return report


class SkipTombCtrie(Ctrie):
    """Known-bad build: weak tombing skips entombing the surviving leaf of a
    1-way node and discards it instead."""

    def _weak_tomb(self, cn: CNode):
        res = to_weak_tombed(cn)
        if type(res) is SNode:
            return None
        return res


class SkipUntombCtrie(Ctrie):
    """Known-bad build: contraction writes the tombed leaf into the parent
    without clearing its tomb flag."""

    def _untomb(self, sn: SNode) -> SNode:
        return sn


FAULTS: dict[str, type] = {"skip-tomb": SkipTombCtrie, "skip-untomb": SkipUntombCtrie}


@contextlib.contextmanager
def thread_switching(interval: float = 1e-5) -> Iterator[None]:
    """Temporarily shorten the interpreter's thread switch interval so that
    concurrent operations interleave inside each other."""
    old = sys.getswitchinterval()
    sys.setswitchinterval(interval)
    try:
        yield
    finally:
        sys.setswitchinterval(old)


class YieldHook:
    """CAS hook that gives up the interpreter lock between a node read and its
    CAS with probability ``p``, widening the window for conflicting writers."""

    def __init__(self, p: float = 0.5, seed: int = 0) -> None:
        self.p = p
        self._rng = random.Random(seed)

    def before_cas(self, site: str, target: Any, expected: Any, new: Any) -> None:
        if self._rng.random() < self.p:
            time.sleep(0)

    def after_cas(self, site: str, target: Any, expected: Any, new: Any, ok: bool) -> None:
        pass


@dataclass
class StressReport:
    threads: int
    ops: int
    elapsed_s: float
    errors: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.errors


def concurrent_mixed(
    trie: Any,
    threads: int,
    ops_per_thread: int,
    key_space: int,
    seed: int,
    weights: tuple = OP_WEIGHTS,
) -> StressReport:
    """Hammer ``trie`` from ``threads`` workers with random operations.

    Inserted values are ``(key, thread, index)`` so that every value later
    observed can be attributed to an insert of the same key.
    """
    errors: list[str] = []
    counts = [0] * threads
    start = threading.Barrier(threads + 1)

    def work(tid: int) -> None:
        rng = random.Random(seed * 1_000_003 + tid)
        try:
            start.wait()
            for idx in range(ops_per_thread):
                op = draw_op(rng, weights)
                k = rng.randrange(key_space)
                if op == "insert":
                    trie.insert(k, (k, tid, idx))
                else:
                    res = getattr(trie, op)(k)
                    if res is not NOT_FOUND and res.value[0] != k:
                        errors.append(f"{op}({k}) returned foreign value {res.value!r}")
                counts[tid] += 1
        except Exception as exc:  # surfaced through the report
            errors.append(f"thread {tid}: {exc!r}")

    workers = [threading.Thread(target=work, args=(t,), daemon=True) for t in range(threads)]
    for w in workers:
        w.start()
    start.wait()
    t0 = time.perf_counter()
    for w in workers:
        w.join()
    elapsed = time.perf_counter() - t0
    if sum(counts) != threads * ops_per_thread and not errors:
        errors.append(f"completed {sum(counts)} of {threads * ops_per_thread} ops")
    return StressReport(threads, sum(counts), elapsed, errors)
