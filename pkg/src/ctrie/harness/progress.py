"""Progress smoke test: suspend some threads between a read and their CAS and
check the others still finish their work."""
from __future__ import annotations

import random
import threading
import time
from dataclasses import dataclass
from typing import Any, Callable

from ..core import Ctrie


class PauseHook:
    """CAS hook that parks registered threads in ``before_cas`` until
    :meth:`release` is called."""

    def __init__(self) -> None:
        self.paused: set[int] = set()
        self.parked = threading.Semaphore(0)
        self._release = threading.Event()

    def before_cas(self, site: str, target: Any, expected: Any, new: Any) -> None:
        if threading.get_ident() in self.paused:
            self.parked.release()
            self._release.wait()

    def after_cas(self, site: str, target: Any, expected: Any, new: Any, ok: bool) -> None:
        pass

    def release(self) -> None:
        self._release.set()


@dataclass
class ProgressReport:
    passed: bool
    completed_ops: int
    budget_ops: int
    elapsed_s: float
    paused_threads: int
    active_threads: int

    def to_dict(self) -> dict[str, Any]:
        return dict(self.__dict__)


def progress_smoke(
    paused_threads: int,
    active_threads: int,
    budget_ops: int,
    timeout: float,
    factory: Callable[..., Any] = Ctrie,
    key_space: int = 64,
    seed: int = 0,
) -> ProgressReport:
    """Passes iff the active threads jointly complete ``budget_ops``
    operations within ``timeout`` seconds while every paused thread sits
    between reading a node and issuing its CAS.

    ``factory`` must accept a ``hooks`` keyword. This is a smoke test for
    progress regressions, not a proof of lock-freedom.
    """
    hook = PauseHook()
    m = factory(hooks=hook)
    for k in range(0, key_space, 2):
        m.insert(k, -k)

    def parked_insert(k: int) -> None:
        hook.paused.add(threading.get_ident())
        m.insert(k, k)

    parkers = [
        threading.Thread(target=parked_insert, args=(2 * j + 1,), daemon=True)
        for j in range(paused_threads)
    ]
    for p in parkers:
        p.start()
    for _ in parkers:
        if not hook.parked.acquire(timeout=max(timeout, 1.0)):
            hook.release()
            raise RuntimeError("paused thread never reached a CAS")

    counts = [0] * active_threads
    share = [budget_ops // active_threads + (1 if t < budget_ops % active_threads else 0)
             for t in range(active_threads)] if active_threads else []

    def work(tid: int) -> None:
        rng = random.Random(seed * 31 + tid)
        for _ in range(share[tid]):
            k = rng.randrange(key_space)
            x = rng.random()
            if x < 0.45:
                m.insert(k, tid)
            elif x < 0.8:
                m.lookup(k)
            else:
                m.remove(k)
            counts[tid] += 1

    workers = [threading.Thread(target=work, args=(t,), daemon=True) for t in range(active_threads)]
    t0 = time.perf_counter()
    deadline = t0 + timeout
    for w in workers:
        w.start()
    for w in workers:
        w.join(max(0.0, deadline - time.perf_counter()))
    elapsed = time.perf_counter() - t0
    done = sum(counts)
    passed = done == budget_ops and not any(w.is_alive() for w in workers)

    hook.release()
    for p in parkers:
        p.join(5.0)
    for w in workers:
        w.join(5.0)
    return ProgressReport(passed, done, budget_ops, elapsed, paused_threads, active_threads)
